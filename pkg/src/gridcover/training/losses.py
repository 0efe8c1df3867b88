"""Losses with analytic gradients: value regression, policy head, triplet, Q-regression.

Every function returns ``(loss, gradients)``; gradients are of the mean loss.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gridcover.agents.emac import EmacModel
from gridcover.agents.iql import Transition
from gridcover.core.models import EntropyMode, TripletForm
from gridcover.nn.dense import DenseNet, Gradients, Tape, backward, forward
from gridcover.nn.functional import log_softmax
from gridcover.training.rollout import TrajectoryBuffer

# ── Value regression (critic) ────────────────────────────────────────────────


def value_regression_loss(
    net: DenseNet, inputs: np.ndarray, targets: np.ndarray
) -> tuple[float, Gradients]:
    """mean((R − V(x))²) for a scalar-output network."""
    values, tape = forward(net, inputs)
    diff = values[:, 0] - targets.astype(values.dtype)
    batch = max(diff.shape[0], 1)
    loss = float(np.mean(diff * diff)) if diff.size else 0.0
    grads = backward(net, tape, (2.0 * diff / batch)[:, None])
    return loss, grads


def critic_targets(
    buffer: TrajectoryBuffer, returns: Sequence[Sequence[np.ndarray]]
) -> tuple[np.ndarray, np.ndarray]:
    """Pair each global state s_t with the mean of the acting agents' returns R^i_t."""
    states: list[np.ndarray] = []
    targets: list[float] = []
    for e, env_states in enumerate(buffer.states):
        for t, state in enumerate(env_states):
            values = [
                float(returns[e][i][t])
                for i, traj in enumerate(buffer.trajectories[e])
                if t < len(traj)
            ]
            if values:
                states.append(state)
                targets.append(float(np.mean(values)))
    return np.stack(states), np.asarray(targets)


def critic_loss(
    model: EmacModel, states: np.ndarray, targets: np.ndarray
) -> tuple[float, Gradients]:
    """Centralised critic regression; gradients w.r.t. φ only."""
    return value_regression_loss(model.critic, states, targets)


# ── Policy head ──────────────────────────────────────────────────────────────


def policy_head_loss(
    logits: np.ndarray,
    actions: np.ndarray,
    advantages: np.ndarray,
    entropy_coeff: float,
    mode: EntropyMode = EntropyMode.FULL,
    total: int | None = None,
) -> tuple[float, np.ndarray]:
    """Summed policy-gradient and entropy terms over the rows, divided by ``total``.

    loss = −log π(u)·A + c·Σ_u π(u) log π(u)   (full)
    loss = −log π(u)·A + c·π(u) log π(u)       (sampled)

    Returns the loss and dL/dlogits.
    """
    rows = np.arange(logits.shape[0])
    total = total or max(logits.shape[0], 1)
    logp = log_softmax(logits)
    probs = np.exp(logp)
    adv = advantages.astype(logits.dtype)
    taken = logp[rows, actions]

    one_hot = np.zeros_like(probs)
    one_hot[rows, actions] = 1.0
    loss = -float(np.sum(taken * adv))
    dlogits = -(one_hot - probs) * adv[:, None]

    if entropy_coeff:
        if mode is EntropyMode.FULL:
            neg_entropy = np.sum(probs * logp, axis=-1)
            loss += entropy_coeff * float(np.sum(neg_entropy))
            dlogits += entropy_coeff * probs * (logp - neg_entropy[:, None])
        else:
            p_taken = probs[rows, actions]
            loss += entropy_coeff * float(np.sum(p_taken * taken))
            scale = ((taken + 1.0) * p_taken)[:, None]
            dlogits += entropy_coeff * scale * (one_hot - probs)
    return loss / total, dlogits / total


@dataclass
class ActorBatch:
    """Per-agent stacked samples: observations (B_i, L_i), actions, advantages."""

    observations: list[np.ndarray]
    actions: list[np.ndarray]
    advantages: list[np.ndarray]

    @property
    def total(self) -> int:
        return sum(int(a.shape[0]) for a in self.actions)


@dataclass
class EmacGradients:
    encoders: list[Gradients | None]
    actor: Gradients | None = None


def actor_loss(
    model: EmacModel,
    batch: ActorBatch,
    entropy_coeff: float,
    mode: EntropyMode = EntropyMode.FULL,
    *,
    grad_to_encoder: bool = True,
) -> tuple[float, EmacGradients]:
    """Shared-actor loss over every (e, i, t) sample, advantages held constant.

    Gradients flow through θ and, when ``grad_to_encoder``, on through each
    f_i into its encoder.
    """
    total = max(batch.total, 1)
    loss = 0.0
    actor_grads = Gradients.zeros_like(model.actor)
    encoder_grads: list[Gradients | None] = [None] * model.n_agents
    for i, (obs, actions, adv) in enumerate(
        zip(batch.observations, batch.actions, batch.advantages, strict=True)
    ):
        if actions.shape[0] == 0:
            continue
        z, enc_tape = forward(model.encoders[i], obs)
        logits, act_tape = forward(model.actor, z)
        part, dlogits = policy_head_loss(logits, actions, adv, entropy_coeff, mode, total)
        loss += part
        grads = backward(model.actor, act_tape, dlogits)
        actor_grads.accumulate(grads)
        if grad_to_encoder:
            assert grads.input is not None
            encoder_grads[i] = backward(model.encoders[i], enc_tape, grads.input)
    return loss, EmacGradients(encoders=encoder_grads, actor=actor_grads)


def iac_actor_loss(
    actor: DenseNet,
    observations: np.ndarray,
    actions: np.ndarray,
    advantages: np.ndarray,
    entropy_coeff: float,
    mode: EntropyMode = EntropyMode.FULL,
) -> tuple[float, Gradients]:
    """The same policy-head loss applied to one agent's own actor on raw observations."""
    logits, tape = forward(actor, observations)
    loss, dlogits = policy_head_loss(logits, actions, advantages, entropy_coeff, mode)
    return loss, backward(actor, tape, dlogits)


# ── Triplet ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Triplet:
    """Anchor o^i_t, positive o^j_t (j ≠ i), negative o^i_t' with |t' − t| > buffer."""

    env: int
    agent: int
    teammate: int
    t: int
    negative_t: int


def sample_triplets(
    buffer: TrajectoryBuffer, time_buffer: int, rng: np.random.Generator
) -> list[Triplet]:
    """One triplet per (e, i, t) with a uniform teammate and a uniform far-away time.

    Environments whose episode is shorter than 2·time_buffer + 1 are skipped.
    """
    triplets: list[Triplet] = []
    for e, env in enumerate(buffer.trajectories):
        if buffer.lengths[e] < 2 * time_buffer + 1:
            continue
        for i, traj in enumerate(env):
            horizon = len(traj)
            for t in range(horizon):
                mates = [j for j, other in enumerate(env) if j != i and len(other) > t]
                n_low = max(t - time_buffer, 0)
                n_high = max(horizon - (t + time_buffer + 1), 0)
                if not mates or n_low + n_high == 0:
                    continue
                j = mates[int(rng.integers(len(mates)))]
                pick = int(rng.integers(n_low + n_high))
                negative_t = pick if pick < n_low else t + time_buffer + 1 + (pick - n_low)
                triplets.append(Triplet(e, i, j, t, negative_t))
    return triplets


def triplet_terms(
    anchor: np.ndarray,
    positive: np.ndarray,
    negative: np.ndarray,
    margin: float,
    form: TripletForm = TripletForm.HINGE,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean triplet loss over rows and its gradients w.r.t. a, p and n.

    hinge: max(0, ‖a−p‖² − ‖a−n‖² + α);  soft: log(1 + exp(‖a−p‖² − ‖a−n‖² + α)).
    """
    count = max(anchor.shape[0], 1)
    ap = anchor - positive
    an = anchor - negative
    h = np.sum(ap * ap, axis=-1) - np.sum(an * an, axis=-1) + margin
    if form is TripletForm.HINGE:
        values = np.maximum(h, 0.0)
        weight = (h > 0.0).astype(anchor.dtype)
    else:
        values = np.logaddexp(0.0, h)
        weight = 1.0 / (1.0 + np.exp(-h))
    w = (weight / count)[:, None]
    d_anchor = w * 2.0 * (negative - positive)
    d_positive = w * -2.0 * ap
    d_negative = w * 2.0 * an
    return float(np.sum(values) / count), d_anchor, d_positive, d_negative


def triplet_loss(
    model: EmacModel,
    buffer: TrajectoryBuffer,
    triplets: Sequence[Triplet],
    margin: float,
    form: TripletForm = TripletForm.HINGE,
) -> tuple[float, list[Gradients | None]]:
    """Triplet loss through the encoders; one batched forward per encoder."""
    n = model.n_agents
    rows: list[list[np.ndarray]] = [[] for _ in range(n)]

    def slot(agent: int, obs: np.ndarray) -> tuple[int, int]:
        rows[agent].append(obs)
        return agent, len(rows[agent]) - 1

    roles = []
    for tr in triplets:
        env = buffer.trajectories[tr.env]
        roles.append(
            (
                slot(tr.agent, env[tr.agent].observations[tr.t]),
                slot(tr.teammate, env[tr.teammate].observations[tr.t]),
                slot(tr.agent, env[tr.agent].observations[tr.negative_t]),
            )
        )
    if not roles:
        return 0.0, [None] * n

    embeddings: dict[int, np.ndarray] = {}
    tapes: dict[int, Tape] = {}
    for i in range(n):
        if rows[i]:
            embeddings[i], tapes[i] = forward(model.encoders[i], np.stack(rows[i]))

    def gather(role: int) -> np.ndarray:
        return np.stack([embeddings[r[role][0]][r[role][1]] for r in roles])

    loss, da, dp, dn = triplet_terms(gather(0), gather(1), gather(2), margin, form)
    dz = {i: np.zeros_like(z) for i, z in embeddings.items()}
    for k, r in enumerate(roles):
        for (agent, row), grad in zip(r, (da[k], dp[k], dn[k]), strict=True):
            dz[agent][row] += grad

    grads: list[Gradients | None] = [None] * n
    for i, grad_z in dz.items():
        grads[i] = backward(model.encoders[i], tapes[i], grad_z)
    return loss, grads


# ── Q-regression ─────────────────────────────────────────────────────────────


def q_regression_loss(
    online: DenseNet, target: DenseNet, batch: Transition, gamma: float
) -> tuple[float, Gradients]:
    """mean((Q(o,u) − y)²), y = r + γ·max_u' Q⁻(o', u') (y = r on terminal transitions)."""
    q, tape = forward(online, batch.observations)
    q_next, _ = forward(target, batch.next_observations)
    not_done = 1.0 - batch.dones.astype(q.dtype)
    y = batch.rewards.astype(q.dtype) + gamma * not_done * np.max(q_next, axis=-1)
    rows = np.arange(q.shape[0])
    diff = q[rows, batch.actions] - y
    count = max(q.shape[0], 1)
    dq = np.zeros_like(q)
    dq[rows, batch.actions] = 2.0 * diff / count
    return float(np.mean(diff * diff)), backward(online, tape, dq)
