"""Independent actor-critic: per-agent actor and own-observation critic, no sharing."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridcover.agents.iac import IacLearner, IacTeam, build_iac_team
from gridcover.core.config import RunConfig
from gridcover.core.exceptions import DivergenceError
from gridcover.core.logging import get_logger
from gridcover.core.models import CurvePoint
from gridcover.nn.dense import forward
from gridcover.nn.functional import log_softmax, sample_categorical
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
from gridcover.training.losses import iac_actor_loss, value_regression_loss
from gridcover.training.rollout import (
    AgentTrajectory,
    collect_rollouts,
    compute_returns,
    reset_worlds,
)

logger = get_logger(__name__)


@dataclass
class IndependentBehavior:
    """Samples from each agent's own actor, one generator per agent."""

    team: IacTeam
    rngs: list[np.random.Generator]

    def __call__(self, agent: int, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        logits, _ = forward(self.team.learners[agent].actor, obs)
        logp = log_softmax(logits)
        actions = np.asarray(sample_categorical(np.exp(logp), self.rngs[agent]))
        return actions, logp[np.arange(actions.shape[0]), actions]


def update_learner(
    learner: IacLearner,
    trajectories: list[AgentTrajectory],
    config: RunConfig,
) -> dict[str, float]:
    """Critic then actor step from this agent's own trajectories only."""
    train = config.training
    clip = config.optimizer.grad_clip
    kept = [traj for traj in trajectories if len(traj)]
    if not kept:
        return {"critic_loss": 0.0, "actor_loss": 0.0}
    obs = np.concatenate([traj.observation_matrix() for traj in kept])
    actions = np.concatenate([np.asarray(traj.actions, dtype=np.int64) for traj in kept])
    returns = np.concatenate([compute_returns(traj.rewards, train.gamma) for traj in kept])

    c_loss, c_grads = value_regression_loss(learner.critic, obs, returns)
    if not np.isfinite(c_loss):
        raise DivergenceError(f"critic loss is {c_loss}")
    c_grads.clip(clip)
    adam_step(learner.critic, c_grads, learner.critic_optimizer)

    advantages = returns - learner.values(obs).astype(np.float64)
    if train.normalize_advantages and advantages.size > 1:
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
    a_loss, a_grads = iac_actor_loss(
        learner.actor, obs, actions, advantages, train.entropy_coeff, train.entropy_mode
    )
    if not np.isfinite(a_loss):
        raise DivergenceError(f"actor loss is {a_loss}")
    a_grads.clip(clip)
    adam_step(learner.actor, a_grads, learner.actor_optimizer)
    return {"critic_loss": c_loss, "actor_loss": a_loss}


def train(
    config: RunConfig,
    *,
    eval_hook: EvalHook | None = None,
    checkpoint_dir: Path | None = None,
) -> TrainingResult:
    """Train one actor-critic pair per agent on that agent's own experience.

    Raises:
        DivergenceError: non-finite loss.
    """
    start = time.perf_counter()
    train_cfg = config.training
    n_agents = config.world.n_agents
    init_rng, seed_rng, action_rng, _ = training_streams(config.seed)
    team = build_iac_team(config, init_rng)
    behave = IndependentBehavior(team, list(action_rng.spawn(n_agents)))
    curve: list[CurvePoint] = []

    logger.info(
        "training_started",
        algorithm="iac",
        episodes=train_cfg.max_episodes,
        n_envs=train_cfg.n_envs,
    )
    for episode in range(1, train_cfg.max_episodes + 1):
        worlds = reset_worlds(next_world_seeds(seed_rng, train_cfg.n_envs), config)
        buffer = collect_rollouts(worlds, behave, config.observation)
        losses = []
        for i, learner in enumerate(team.learners):
            try:
                losses.append(update_learner(learner, buffer.agent(i), config))
            except DivergenceError as e:
                reason = f"agent {i}: {e}"
                raise diverged(reason, team, config, episode, checkpoint_dir) from e

        point = CurvePoint(
            episode=episode,
            mean_length=buffer.mean_length(),
            mean_coverage=buffer.mean_coverage(),
        )
        logger.debug("iac_update", episode=episode, losses=losses)
        if should_evaluate(episode, config, eval_hook):
            assert eval_hook is not None
            point.eval_mean_completion = eval_hook(episode, team)
            log_progress("iac", point)
        curve.append(point)

    duration = time.perf_counter() - start
    logger.info(
        "training_complete", algorithm="iac", episodes=len(curve), duration_s=round(duration, 1)
    )
    return TrainingResult(model=team, curve=curve, episodes=len(curve), duration_s=duration)
