"""EMAC training loop: batched rollouts, then critic → actor → triplet updates."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridcover.agents.emac import EmacModel, build_emac_model
from gridcover.core.config import RunConfig
from gridcover.core.exceptions import DivergenceError
from gridcover.core.logging import get_logger
from gridcover.core.models import CurvePoint
from gridcover.nn.dense import forward
from gridcover.nn.functional import log_softmax, sample_categorical
from gridcover.nn.optim import AdamState, adam_step
from gridcover.training.common import (
    EvalHook,
    TrainingResult,
    diverged,
    log_progress,
    next_world_seeds,
    should_evaluate,
    training_streams,
)
from gridcover.training.losses import (
    ActorBatch,
    actor_loss,
    critic_loss,
    critic_targets,
    sample_triplets,
    triplet_loss,
)
from gridcover.training.rollout import (
    Behavior,
    TrajectoryBuffer,
    buffer_returns,
    collect_rollouts,
    reset_worlds,
)

logger = get_logger(__name__)


@dataclass
class EmacOptimizers:
    encoders: list[AdamState]
    actor: AdamState
    critic: AdamState

    @classmethod
    def for_model(cls, model: EmacModel, config: RunConfig) -> EmacOptimizers:
        opt = config.optimizer
        return cls(
            encoders=[AdamState.for_net(enc, opt) for enc in model.encoders],
            actor=AdamState.for_net(model.actor, opt),
            critic=AdamState.for_net(model.critic, opt),
        )


def sampling_behavior(model: EmacModel, rng: np.random.Generator) -> Behavior:
    """Stochastic rollout behaviour from the current parameters."""

    def behave(agent: int, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z, _ = forward(model.encoders[agent], obs)
        logits, _ = forward(model.actor, z)
        logp = log_softmax(logits)
        actions = np.asarray(sample_categorical(np.exp(logp), rng))
        return actions, logp[np.arange(actions.shape[0]), actions]

    return behave


def normalize_advantages(advantages: list[np.ndarray]) -> list[np.ndarray]:
    """Zero-mean, unit-variance over every agent's samples together."""
    parts = [a for a in advantages if a.size]
    if not parts:
        return advantages
    flat = np.concatenate(parts)
    if flat.size < 2:
        return advantages
    mean, std = flat.mean(), flat.std() + 1e-8
    return [(a - mean) / std for a in advantages]


def actor_batch(
    model: EmacModel,
    buffer: TrajectoryBuffer,
    returns: list[list[np.ndarray]],
    *,
    normalize: bool = False,
) -> ActorBatch:
    """Per-agent samples with advantages A^i_t = R^i_t − V(s_t), V held constant."""
    values: list[np.ndarray] = []
    for env_states in buffer.states:
        v, _ = forward(model.critic, np.stack(env_states))
        values.append(v[:, 0].astype(np.float64))
    observations, actions, advantages = [], [], []
    for i in range(buffer.n_agents):
        obs_i, act_i, adv_i = [], [], []
        for e, traj in enumerate(buffer.agent(i)):
            if not len(traj):
                continue
            obs_i.append(traj.observation_matrix())
            act_i.append(np.asarray(traj.actions, dtype=np.int64))
            adv_i.append(returns[e][i] - values[e][: len(traj)])
        dim = model.encoders[i].input_dim
        observations.append(np.concatenate(obs_i) if obs_i else np.zeros((0, dim), np.float32))
        actions.append(np.concatenate(act_i) if act_i else np.zeros(0, np.int64))
        advantages.append(np.concatenate(adv_i) if adv_i else np.zeros(0))
    if normalize:
        advantages = normalize_advantages(advantages)
    return ActorBatch(observations, actions, advantages)


def _check(name: str, value: float) -> None:
    if not np.isfinite(value):
        raise DivergenceError(f"{name} is {value}")


def update_emac(
    model: EmacModel,
    optimizers: EmacOptimizers,
    buffer: TrajectoryBuffer,
    config: RunConfig,
    triplet_rng: np.random.Generator,
) -> dict[str, float]:
    """One critic, one actor and one triplet step on a finished episode batch.

    Raises:
        DivergenceError: a loss, gradient or updated parameter is non-finite.
    """
    train = config.training
    emac = config.emac
    clip = config.optimizer.grad_clip
    returns = buffer_returns(buffer, train.gamma)

    states, targets = critic_targets(buffer, returns)
    c_loss, c_grads = critic_loss(model, states, targets)
    _check("critic loss", c_loss)
    c_grads.clip(clip)
    adam_step(model.critic, c_grads, optimizers.critic)

    batch = actor_batch(model, buffer, returns, normalize=train.normalize_advantages)
    a_loss, a_grads = actor_loss(
        model,
        batch,
        train.entropy_coeff,
        train.entropy_mode,
        grad_to_encoder=emac.actor_grad_to_encoder,
    )
    _check("actor loss", a_loss)
    if a_grads.actor is not None:
        a_grads.actor.clip(clip)
        adam_step(model.actor, a_grads.actor, optimizers.actor)
    for i, grads in enumerate(a_grads.encoders):
        if grads is not None:
            grads.clip(clip)
            adam_step(model.encoders[i], grads, optimizers.encoders[i])

    t_loss = 0.0
    if model.n_agents > 1 and emac.triplet_weight > 0.0:
        triplets = sample_triplets(buffer, emac.triplet_time_buffer, triplet_rng)
        t_loss, t_grads = triplet_loss(
            model, buffer, triplets, emac.triplet_margin, emac.triplet_form
        )
        _check("triplet loss", t_loss)
        for i, grads in enumerate(t_grads):
            if grads is not None:
                grads.scale(emac.triplet_weight).clip(clip)
                adam_step(model.encoders[i], grads, optimizers.encoders[i])
    return {"critic_loss": c_loss, "actor_loss": a_loss, "triplet_loss": t_loss}


def train(
    config: RunConfig,
    *,
    eval_hook: EvalHook | None = None,
    checkpoint_dir: Path | None = None,
) -> TrainingResult:
    """Train EMAC for ``config.training.max_episodes`` episode batches.

    Each episode resets E worlds from the master seed stream, rolls all of
    them to the end, then applies one update per network.  Every
    ``eval_interval`` episodes ``eval_hook`` fills the curve's eval column.

    Raises:
        DivergenceError: non-finite loss; a diagnostic checkpoint is written
            to ``checkpoint_dir`` first when one is given.
    """
    start = time.perf_counter()
    train_cfg = config.training
    init_rng, seed_rng, action_rng, triplet_rng = training_streams(config.seed)
    model = build_emac_model(config, init_rng)
    optimizers = EmacOptimizers.for_model(model, config)
    behave = sampling_behavior(model, action_rng)
    curve: list[CurvePoint] = []

    logger.info(
        "training_started",
        algorithm="emac",
        episodes=train_cfg.max_episodes,
        n_envs=train_cfg.n_envs,
        grid=config.world.grid_size,
        agents=config.world.n_agents,
    )
    for episode in range(1, train_cfg.max_episodes + 1):
        worlds = reset_worlds(next_world_seeds(seed_rng, train_cfg.n_envs), config)
        buffer = collect_rollouts(worlds, behave, config.observation)
        try:
            losses = update_emac(model, optimizers, buffer, config, triplet_rng)
        except DivergenceError as e:
            raise diverged(str(e), model, config, episode, checkpoint_dir) from e

        point = CurvePoint(
            episode=episode,
            mean_length=buffer.mean_length(),
            mean_coverage=buffer.mean_coverage(),
        )
        logger.debug("emac_update", episode=episode, mean_length=point.mean_length, **losses)
        if should_evaluate(episode, config, eval_hook):
            assert eval_hook is not None
            point.eval_mean_completion = eval_hook(episode, model)
            log_progress("emac", point)
        curve.append(point)

    duration = time.perf_counter() - start
    logger.info(
        "training_complete", algorithm="emac", episodes=len(curve), duration_s=round(duration, 1)
    )
    return TrainingResult(model=model, curve=curve, episodes=len(curve), duration_s=duration)
