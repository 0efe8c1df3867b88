"""Trial runner: concurrent evaluation episodes over seeded fresh worlds."""

from __future__ import annotations

import asyncio
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from gridcover.agents.base import CoveragePolicy
from gridcover.core.config import ObservationConfig, RunConfig, get_settings
from gridcover.core.constants import EVAL_SEED_BASE
from gridcover.core.exceptions import TrialError
from gridcover.core.logging import get_logger
from gridcover.core.models import TrialRecord, TrialStats
from gridcover.evaluation.aggregator import summarize_trials
from gridcover.io.episode_log import EpisodeLog, EpisodeRecorder, write_episode_log
from gridcover.observation.belief import init_beliefs, update_belief
from gridcover.observation.builder import build_observation
from gridcover.sim.world import World, generate_world, step

logger = get_logger(__name__)


def eval_seeds(n_trials: int, offset: int = 0) -> list[int]:
    """Evaluation seeds; disjoint from every training seed (< TRAIN_SEED_LIMIT)."""
    return [EVAL_SEED_BASE + offset + i for i in range(n_trials)]


def eval_world(seed: int, config: RunConfig) -> World:
    """Fresh evaluation world under the evaluation collision mode."""
    world_cfg = config.world.model_copy(
        update={"collision_mode": config.evaluation.collision_mode}
    )
    return generate_world(seed, world_cfg, config.disturbances, config.rewards)


def run_episode(
    policy: CoveragePolicy,
    world: World,
    *,
    observation: ObservationConfig | None = None,
    greedy: bool = True,
    record: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[TrialRecord, EpisodeLog | None]:
    """Run ``policy`` on ``world`` until coverage completes or the timeout hits.

    Completion steps equal the timeout for censored episodes.
    """
    obs_cfg = observation or ObservationConfig()
    rng = rng or np.random.default_rng([world.seed, 1])
    delay = world.factors.comm_delay_steps
    policy.reset(world)
    beliefs = init_beliefs(world, delay) if policy.uses_observations else []
    recorder = EpisodeRecorder(world, policy.name, policy.region_map()) if record else None

    while not world.done:
        if policy.uses_observations:
            observations = [
                build_observation(world, beliefs[i], agent, obs_cfg) if agent.active else None
                for i, agent in enumerate(world.agents)
            ]
        else:
            observations = [None] * world.n_agents
        actions = policy.act(world, observations, rng, greedy=greedy)
        world, rewards, _, info = step(world, actions)
        for belief in beliefs:
            update_belief(belief, world, delay)
        if recorder is not None:
            recorder.record(world, actions, rewards, info)

    trial = TrialRecord(
        seed=world.seed,
        completion_steps=world.t,
        coverage=world.coverage_fraction,
        completed=world.is_complete,
    )
    return trial, (recorder.log if recorder else None)


def record_episode(
    policy: CoveragePolicy, world: World, observation: ObservationConfig | None = None
) -> EpisodeLog:
    """Run one episode and return its log."""
    _, log = run_episode(policy, world, observation=observation, record=True)
    assert log is not None
    return log


async def run_trials(
    policy: CoveragePolicy,
    config: RunConfig,
    n_trials: int | None = None,
    seeds: Sequence[int] | None = None,
    *,
    condition: str = "",
    max_concurrent: int | None = None,
    log_dir: Path | None = None,
) -> TrialStats:
    """Evaluate ``policy`` on ``n_trials`` fresh worlds, greedy actions.

    1. Fan out one task per seed, bounded by a semaphore
    2. Each task forks the policy and runs its episode in a worker thread
    3. Wait for every trial, then fail the whole evaluation if any trial raised
    4. Aggregate in seed order

    Args:
        policy: Any registered policy.
        config: World, disturbance and observation settings.
        n_trials: Trial count; defaults to ``config.evaluation.n_trials``.
        seeds: Explicit world seeds; defaults to ``eval_seeds(n_trials)``.
        condition: Label carried into the returned stats.
        max_concurrent: Concurrent trials; defaults to the process setting.
        log_dir: When set, each trial's episode log is written there.

    Returns:
        Aggregated TrialStats with every per-trial record.

    Raises:
        TrialError: At least one trial raised; no statistics are returned.
    """
    start_ms = time.perf_counter_ns() // 1_000_000
    if seeds is None:
        seeds = eval_seeds(n_trials or config.evaluation.n_trials)
    if max_concurrent is None:
        max_concurrent = get_settings().max_concurrent_trials
    semaphore = asyncio.Semaphore(max_concurrent)

    def _trial(seed: int) -> TrialRecord:
        world = eval_world(seed, config)
        trial, log = run_episode(
            policy.fork(), world, observation=config.observation, record=log_dir is not None
        )
        if log_dir is not None and log is not None:
            write_episode_log(log, log_dir / f"{policy.name}_{seed}.jsonl")
        return trial

    async def _bounded_trial(seed: int) -> TrialRecord:
        async with semaphore:
            return await asyncio.to_thread(_trial, seed)

    logger.info("trials_started", policy=policy.name, condition=condition, trials=len(seeds))

    # all trials run to completion before any failure is raised
    results = await asyncio.gather(*(_bounded_trial(s) for s in seeds), return_exceptions=True)

    records: list[TrialRecord] = []
    failures: list[tuple[int, Exception]] = []
    for seed, result in zip(seeds, results, strict=True):
        if isinstance(result, Exception):
            logger.error("trial_failed", policy=policy.name, seed=seed, error=str(result))
            failures.append((seed, result))
        elif isinstance(result, BaseException):
            raise result
        else:
            records.append(result)

    if failures:
        seed, error = failures[0]
        raise TrialError(
            f"{len(failures)} of {len(seeds)} trials of '{policy.name}' failed; "
            f"first at seed {seed}: {error}",
            seed=seed,
            failed=len(failures),
        ) from error

    stats = summarize_trials(records, condition=condition or policy.name)
    total_ms = (time.perf_counter_ns() // 1_000_000) - start_ms
    logger.info("evaluation_complete", **stats.stats, duration_ms=total_ms)
    return stats


def run_trials_sync(
    policy: CoveragePolicy,
    config: RunConfig,
    n_trials: int | None = None,
    seeds: Sequence[int] | None = None,
    *,
    condition: str = "",
    max_concurrent: int | None = None,
    log_dir: Path | None = None,
) -> TrialStats:
    """Blocking wrapper around :func:`run_trials` for non-async callers."""
    return asyncio.run(
        run_trials(
            policy,
            config,
            n_trials,
            seeds,
            condition=condition,
            max_concurrent=max_concurrent,
            log_dir=log_dir,
        )
    )
