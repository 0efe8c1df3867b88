"""Pieces every trainer shares: seed streams, results, eval hooks, divergence handling."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gridcover.agents.base import TrainedModel
from gridcover.core.config import RunConfig
from gridcover.core.constants import TRAIN_SEED_LIMIT
from gridcover.core.exceptions import DivergenceError
from gridcover.core.logging import get_logger
from gridcover.core.models import CurvePoint

logger = get_logger(__name__)

# Called at every evaluation point with (episode, model); returns eval mean completion
EvalHook = Callable[[int, TrainedModel], float]


@dataclass
class TrainingResult:
    model: TrainedModel
    curve: list[CurvePoint] = field(default_factory=list)
    episodes: int = 0
    duration_s: float = 0.0

    @property
    def final_eval(self) -> float | None:
        for point in reversed(self.curve):
            if point.eval_mean_completion is not None:
                return point.eval_mean_completion
        return None


def training_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Independent generators for init, world seeds, action sampling and auxiliary draws."""
    return tuple(np.random.default_rng(seed).spawn(4))


def next_world_seeds(rng: np.random.Generator, n_envs: int) -> list[int]:
    """Training world seeds; always below the evaluation seed range."""
    return [int(s) for s in rng.integers(0, TRAIN_SEED_LIMIT, size=n_envs)]


def diverged(
    reason: str,
    model: TrainedModel,
    config: RunConfig,
    episode: int,
    checkpoint_dir: Path | None,
) -> DivergenceError:
    """Write a diagnostic checkpoint (when a directory is given) and build the error to raise."""
    algorithm = str(model.algorithm)
    path = None
    if checkpoint_dir is not None:
        from gridcover.io.checkpoint import save_checkpoint

        target = checkpoint_dir / f"diverged_{algorithm}.ckpt"
        path = str(save_checkpoint(model, target, config))
    logger.error(
        "training_diverged", algorithm=algorithm, episode=episode, reason=reason, checkpoint=path
    )
    return DivergenceError(
        f"{algorithm.upper()} diverged at episode {episode}: {reason}", checkpoint_path=path
    )


def default_eval_hook(config: RunConfig, episode_log_path: Path | None = None) -> EvalHook:
    """Greedy evaluation of the current parameters on ``eval_trials`` held-out worlds.

    With ``episode_log_path`` set, the first evaluation world's episode is
    appended to that rolling log at every evaluation point.
    """
    from gridcover.agents.registry import create_policy
    from gridcover.evaluation.harness import eval_seeds, eval_world, record_episode, run_trials_sync
    from gridcover.io.episode_log import append_episode_log

    seeds = eval_seeds(config.training.eval_trials)

    def hook(episode: int, model: TrainedModel) -> float:
        policy = create_policy(model.algorithm, model)
        stats = run_trials_sync(policy, config, seeds=seeds, condition=f"episode_{episode}")
        if episode_log_path is not None:
            log = record_episode(policy.fork(), eval_world(seeds[0], config), config.observation)
            append_episode_log(log, episode_log_path)
        return stats.mean_completion

    return hook


def should_evaluate(episode: int, config: RunConfig, hook: EvalHook | None) -> bool:
    return hook is not None and episode % config.training.eval_interval == 0


def log_progress(algorithm: str, point: CurvePoint) -> None:
    logger.info(
        "training_progress",
        algorithm=algorithm,
        episode=point.episode,
        mean_length=round(point.mean_length, 2),
        mean_coverage=round(point.mean_coverage, 4),
        eval_mean_completion=(
            None if point.eval_mean_completion is None else round(point.eval_mean_completion, 2)
        ),
    )
