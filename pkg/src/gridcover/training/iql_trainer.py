"""Independent Q-learning: ε-greedy rollouts, per-agent replay and target sync."""

from __future__ import annotations

import time
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridcover.agents.iql import (
    IqlTeam,
    QLearner,
    Transition,
    build_iql_team,
    epsilon_at,
    epsilon_greedy,
)
from gridcover.core.config import RunConfig
from gridcover.core.exceptions import DivergenceError
from gridcover.core.logging import get_logger
from gridcover.core.models import CurvePoint
from gridcover.nn.optim import adam_step
from gridcover.training.common import (
    EvalHook,
    TrainingResult,
    diverged,
    log_progress,
    next_world_seeds,
    should_evaluate,
    training_streams,
)
from gridcover.training.losses import q_regression_loss
from gridcover.training.rollout import AgentTrajectory, collect_rollouts, reset_worlds

logger = get_logger(__name__)


@dataclass
class EpsilonBehavior:
    """ε-greedy over each agent's own Q network, one generator per agent."""

    team: IqlTeam
    rngs: list[np.random.Generator]
    epsilon: float = 1.0

    def __call__(self, agent: int, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = self.team.learners[agent].q_values(obs)
        actions = epsilon_greedy(q, self.epsilon, self.rngs[agent])
        return actions, np.zeros(actions.shape[0])


def trajectory_transitions(
    trajectories: list[AgentTrajectory],
) -> tuple[Transition, np.ndarray]:
    """(o_t, u_t, r_t, o_{t+1}, done_t) tuples from one agent's trajectories, with each t.

    A trajectory cut by the timeout ends on a non-terminal record that
    bootstraps from ``final_observation``.  Any other last record is terminal
    and its next observation is a placeholder masked by ``done``.
    """
    obs, actions, rewards, nxt, dones, times = [], [], [], [], [], []
    for traj in trajectories:
        horizon = len(traj)
        for t in range(horizon):
            obs.append(traj.observations[t])
            if t + 1 < horizon:
                nxt.append(traj.observations[t + 1])
                dones.append(traj.dones[t])
            elif traj.final_observation is not None and not traj.dones[t]:
                nxt.append(traj.final_observation)
                dones.append(False)
            else:
                nxt.append(traj.observations[t])
                dones.append(True)
            actions.append(traj.actions[t])
            rewards.append(traj.rewards[t])
            times.append(traj.times[t])
    if not obs:
        empty = np.zeros((0, 0), np.float32)
        batch = Transition(empty, np.zeros(0, np.int64), np.zeros(0), empty, np.zeros(0, bool))
        return batch, np.zeros(0, np.int64)
    batch = Transition(
        observations=np.stack(obs).astype(np.float32),
        actions=np.asarray(actions, dtype=np.int64),
        rewards=np.asarray(rewards, dtype=np.float32),
        next_observations=np.stack(nxt).astype(np.float32),
        dones=np.asarray(dones, dtype=bool),
    )
    return batch, np.asarray(times, dtype=np.int64)


def _by_step(batch: Transition, times: np.ndarray) -> Iterator[Transition]:
    """Split an on-policy batch into one minibatch per vector step."""
    for t in np.unique(times):
        idx = np.flatnonzero(times == t)
        yield Transition(
            batch.observations[idx],
            batch.actions[idx],
            batch.rewards[idx],
            batch.next_observations[idx],
            batch.dones[idx],
        )


def update_learner(
    learner: QLearner,
    batch: Transition,
    times: np.ndarray,
    n_updates: int,
    config: RunConfig,
    rng: np.random.Generator,
    agent: int,
) -> float:
    """Add ``batch`` to the learner's data and take the episode's gradient steps.

    With replay each step samples a uniform minibatch; without it, each step
    regresses on one vector step of this episode's transitions.
    """
    iql = config.iql
    if not len(batch):
        return 0.0
    if iql.use_replay:
        learner.replay.add(batch)
        minibatches: Iterator[Transition] = (
            learner.replay.sample(iql.batch_size, rng) for _ in range(n_updates)
        )
    else:
        minibatches = _by_step(batch, times)

    losses: list[float] = []
    for minibatch in minibatches:
        loss, grads = q_regression_loss(
            learner.online, learner.target, minibatch, config.training.gamma
        )
        if not np.isfinite(loss):
            raise DivergenceError(f"Q loss of agent {agent} is {loss}")
        grads.clip(config.optimizer.grad_clip)
        adam_step(learner.online, grads, learner.optimizer)
        learner.updates += 1
        losses.append(loss)
        if learner.updates % iql.target_sync_interval == 0:
            learner.sync_target()
            logger.debug("iql_target_sync", agent=agent, updates=learner.updates)
    return float(np.mean(losses)) if losses else 0.0


def train(
    config: RunConfig,
    *,
    eval_hook: EvalHook | None = None,
    checkpoint_dir: Path | None = None,
) -> TrainingResult:
    """Train one independent Q-learner per agent.

    Agents share nothing but the environment: each has its own network,
    target copy, replay buffer, optimiser and random stream.

    Raises:
        DivergenceError: non-finite Q loss.
    """
    start = time.perf_counter()
    train_cfg = config.training
    n_agents = config.world.n_agents
    init_rng, seed_rng, action_rng, replay_rng = training_streams(config.seed)
    team = build_iql_team(config, init_rng)
    behave = EpsilonBehavior(team, list(action_rng.spawn(n_agents)))
    replay_rngs = list(replay_rng.spawn(n_agents))
    curve: list[CurvePoint] = []

    logger.info(
        "training_started",
        algorithm="iql",
        episodes=train_cfg.max_episodes,
        n_envs=train_cfg.n_envs,
        replay=config.iql.use_replay,
    )
    for episode in range(1, train_cfg.max_episodes + 1):
        behave.epsilon = epsilon_at((episode - 1) / train_cfg.max_episodes, config.iql)
        worlds = reset_worlds(next_world_seeds(seed_rng, train_cfg.n_envs), config)
        buffer = collect_rollouts(worlds, behave, config.observation)
        n_updates = max(buffer.lengths)
        losses = []
        for i, learner in enumerate(team.learners):
            batch, times = trajectory_transitions(buffer.agent(i))
            try:
                losses.append(
                    update_learner(learner, batch, times, n_updates, config, replay_rngs[i], i)
                )
            except DivergenceError as e:
                raise diverged(str(e), team, config, episode, checkpoint_dir) from e

        point = CurvePoint(
            episode=episode,
            mean_length=buffer.mean_length(),
            mean_coverage=buffer.mean_coverage(),
        )
        logger.debug("iql_update", episode=episode, epsilon=behave.epsilon, q_loss=losses)
        if should_evaluate(episode, config, eval_hook):
            assert eval_hook is not None
            point.eval_mean_completion = eval_hook(episode, team)
            log_progress("iql", point)
        curve.append(point)

    duration = time.perf_counter() - start
    logger.info(
        "training_complete", algorithm="iql", episodes=len(curve), duration_s=round(duration, 1)
    )
    return TrainingResult(model=team, curve=curve, episodes=len(curve), duration_s=duration)
