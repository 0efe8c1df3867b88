"""Finite-difference suites for every analytic gradient the trainers rely on.

Each suite builds small random float64 instances and returns the max
relative error between analytic and central-difference gradients.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from gridcover.agents.emac import EmacModel, build_emac_model
from gridcover.agents.iql import Transition
from gridcover.core.config import RunConfig, validate_config
from gridcover.core.constants import GRADCHECK_TOLERANCE, NUM_ACTIONS
from gridcover.core.logging import get_logger
from gridcover.core.models import Activation, EntropyMode, TripletForm
from gridcover.nn.dense import DenseNet, backward, forward, init_dense
from gridcover.nn.gradcheck import max_relative_error
from gridcover.training.losses import (
    ActorBatch,
    Triplet,
    actor_loss,
    iac_actor_loss,
    q_regression_loss,
    sample_triplets,
    triplet_loss,
    value_regression_loss,
)
from gridcover.training.rollout import TrajectoryBuffer

logger = get_logger(__name__)

# Hinge triplets closer than this to the kink are dropped from an instance
KINK_GAP = 0.05
TRIPLET_MARGIN = 0.2
TRIPLET_TIME_BUFFER = 1

Suite = Callable[[np.random.Generator], float]


@dataclass
class SuiteResult:
    name: str
    instances: int
    max_error: float

    @property
    def passed(self) -> bool:
        return self.max_error <= GRADCHECK_TOLERANCE


def small_config() -> RunConfig:
    """Two agents with different sensors on a 4×4 grid; tiny networks."""
    return validate_config(
        {
            "world": {"grid_size": 4, "n_agents": 2, "sensor_k": [3, 5], "obstacle_density": 0.0},
            "observation": {"near_size": 3, "far_size": 2},
            "network": {
                "embed_dim": 4,
                "actor_hidden": [5],
                "critic_hidden": [5],
                "q_hidden": [6],
            },
        }
    )


def _float64_model(rng: np.random.Generator) -> EmacModel:
    model = build_emac_model(small_config(), rng)
    return EmacModel(
        encoders=[enc.astype(np.float64) for enc in model.encoders],
        actor=model.actor.astype(np.float64),
        critic=model.critic.astype(np.float64),
    )


def _random_net(rng: np.random.Generator, in_dim: int, out_dim: int) -> DenseNet:
    hidden = [int(h) for h in rng.integers(2, 7, size=int(rng.integers(1, 3)))]
    sizes = [in_dim, *hidden, out_dim]
    activations = [Activation.TANH] * len(hidden) + [Activation.IDENTITY]
    return init_dense(sizes, activations, rng, dtype=np.float64)


def _params(nets: Sequence[DenseNet]) -> list[np.ndarray]:
    return [p for net in nets for p in net.parameters()]


# ── Suites ───────────────────────────────────────────────────────────────────


def dense_suite(rng: np.random.Generator) -> float:
    """Linear readout of a random net: parameters and input."""
    net = _random_net(rng, int(rng.integers(2, 6)), int(rng.integers(1, 4)))
    x = rng.normal(size=(int(rng.integers(1, 5)), net.input_dim))
    w = rng.normal(size=(x.shape[0], net.output_dim))

    def loss() -> float:
        y, _ = forward(net, x)
        return float(np.sum(w * y))

    _, tape = forward(net, x)
    grads = backward(net, tape, w)
    assert grads.input is not None
    return max_relative_error(loss, [*net.parameters(), x], [*grads.parameters(), grads.input])


def composite_suite(rng: np.random.Generator) -> float:
    """Encoder → actor chain; gradients reach the encoder through dL/dz."""
    encoder = _random_net(rng, int(rng.integers(3, 7)), 4)
    actor = _random_net(rng, 4, NUM_ACTIONS)
    x = rng.normal(size=(3, encoder.input_dim))
    w = rng.normal(size=(3, NUM_ACTIONS))

    def loss() -> float:
        z, _ = forward(encoder, x)
        y, _ = forward(actor, z)
        return float(np.sum(w * y))

    z, enc_tape = forward(encoder, x)
    _, act_tape = forward(actor, z)
    act_grads = backward(actor, act_tape, w)
    assert act_grads.input is not None
    enc_grads = backward(encoder, enc_tape, act_grads.input)
    assert enc_grads.input is not None
    params = [*encoder.parameters(), *actor.parameters(), x]
    analytic = [*enc_grads.parameters(), *act_grads.parameters(), enc_grads.input]
    return max_relative_error(loss, params, analytic)


def critic_suite(rng: np.random.Generator) -> float:
    model = _float64_model(rng)
    states = rng.integers(0, 2, size=(5, model.critic.input_dim)).astype(np.float64)
    targets = rng.normal(size=5)

    def loss() -> float:
        return value_regression_loss(model.critic, states, targets)[0]

    _, grads = value_regression_loss(model.critic, states, targets)
    return max_relative_error(loss, model.critic.parameters(), grads.parameters())


def _actor_suite(rng: np.random.Generator, mode: EntropyMode) -> float:
    model = _float64_model(rng)
    sizes = [int(rng.integers(1, 4)) for _ in model.encoders]
    batch = ActorBatch(
        observations=[
            rng.normal(size=(b, enc.input_dim))
            for b, enc in zip(sizes, model.encoders, strict=True)
        ],
        actions=[rng.integers(0, NUM_ACTIONS, size=b) for b in sizes],
        advantages=[rng.normal(size=b) for b in sizes],
    )
    coeff = float(rng.uniform(0.01, 0.5))

    def loss() -> float:
        return actor_loss(model, batch, coeff, mode)[0]

    _, grads = actor_loss(model, batch, coeff, mode)
    params = _params([*model.encoders, model.actor])
    analytic = [p for g in grads.encoders if g is not None for p in g.parameters()]
    assert grads.actor is not None
    return max_relative_error(loss, params, [*analytic, *grads.actor.parameters()])


def actor_full_suite(rng: np.random.Generator) -> float:
    return _actor_suite(rng, EntropyMode.FULL)


def actor_sampled_suite(rng: np.random.Generator) -> float:
    return _actor_suite(rng, EntropyMode.SAMPLED)


def iac_actor_suite(rng: np.random.Generator) -> float:
    actor = _random_net(rng, int(rng.integers(3, 8)), NUM_ACTIONS)
    obs = rng.normal(size=(4, actor.input_dim))
    actions = rng.integers(0, NUM_ACTIONS, size=4)
    adv = rng.normal(size=4)

    def loss() -> float:
        return iac_actor_loss(actor, obs, actions, adv, 0.1)[0]

    _, grads = iac_actor_loss(actor, obs, actions, adv, 0.1)
    return max_relative_error(loss, actor.parameters(), grads.parameters())


def random_buffer(model: EmacModel, horizon: int, rng: np.random.Generator) -> TrajectoryBuffer:
    """One environment where every agent acts for ``horizon`` steps on random observations."""
    buffer = TrajectoryBuffer.empty(1, model.n_agents)
    buffer.lengths[0] = horizon
    for i, traj in enumerate(buffer.trajectories[0]):
        for t in range(horizon):
            traj.observations.append(rng.normal(size=model.encoders[i].input_dim))
            traj.actions.append(int(rng.integers(NUM_ACTIONS)))
            traj.log_probs.append(0.0)
            traj.rewards.append(float(rng.normal()))
            traj.times.append(t)
            traj.dones.append(t == horizon - 1)
    return buffer


def _hinge_arguments(
    model: EmacModel, buffer: TrajectoryBuffer, triplets: Sequence[Triplet]
) -> np.ndarray:
    values = []
    for tr in triplets:
        env = buffer.trajectories[tr.env]
        a, _ = forward(model.encoders[tr.agent], env[tr.agent].observations[tr.t])
        p, _ = forward(model.encoders[tr.teammate], env[tr.teammate].observations[tr.t])
        n, _ = forward(model.encoders[tr.agent], env[tr.agent].observations[tr.negative_t])
        values.append(np.sum((a - p) ** 2) - np.sum((a - n) ** 2) + TRIPLET_MARGIN)
    return np.asarray(values)


def _triplet_suite(rng: np.random.Generator, form: TripletForm) -> float:
    model = _float64_model(rng)
    buffer = random_buffer(model, 6, rng)
    triplets = sample_triplets(buffer, TRIPLET_TIME_BUFFER, rng)
    if form is TripletForm.HINGE:
        h = _hinge_arguments(model, buffer, triplets)
        triplets = [tr for tr, value in zip(triplets, h, strict=True) if abs(value) >= KINK_GAP]

    def loss() -> float:
        return triplet_loss(model, buffer, triplets, TRIPLET_MARGIN, form)[0]

    _, grads = triplet_loss(model, buffer, triplets, TRIPLET_MARGIN, form)
    params, analytic = [], []
    for enc, g in zip(model.encoders, grads, strict=True):
        if g is not None:
            params.extend(enc.parameters())
            analytic.extend(g.parameters())
    return max_relative_error(loss, params, analytic)


def triplet_hinge_suite(rng: np.random.Generator) -> float:
    return _triplet_suite(rng, TripletForm.HINGE)


def triplet_soft_suite(rng: np.random.Generator) -> float:
    return _triplet_suite(rng, TripletForm.SOFT)


def q_regression_suite(rng: np.random.Generator) -> float:
    online = _random_net(rng, int(rng.integers(3, 8)), NUM_ACTIONS)
    target = _random_net(rng, online.input_dim, NUM_ACTIONS)
    size = int(rng.integers(2, 6))
    batch = Transition(
        observations=rng.normal(size=(size, online.input_dim)),
        actions=rng.integers(0, NUM_ACTIONS, size=size),
        rewards=rng.normal(size=size),
        next_observations=rng.normal(size=(size, online.input_dim)),
        dones=rng.random(size) < 0.3,
    )

    def loss() -> float:
        return q_regression_loss(online, target, batch, 0.9)[0]

    _, grads = q_regression_loss(online, target, batch, 0.9)
    return max_relative_error(loss, online.parameters(), grads.parameters())


SUITES: dict[str, Suite] = {
    "dense": dense_suite,
    "composite": composite_suite,
    "critic": critic_suite,
    "actor_full": actor_full_suite,
    "actor_sampled": actor_sampled_suite,
    "iac_actor": iac_actor_suite,
    "triplet_hinge": triplet_hinge_suite,
    "triplet_soft": triplet_soft_suite,
    "q_regression": q_regression_suite,
}


def run_suite(name: str, instances: int = 20, seed: int = 0) -> SuiteResult:
    suite = SUITES[name]
    streams = np.random.default_rng(seed).spawn(instances)
    worst = max((suite(rng) for rng in streams), default=0.0)
    result = SuiteResult(name=name, instances=instances, max_error=worst)
    logger.info(
        "gradcheck_suite_complete",
        suite=name,
        instances=instances,
        max_relative_error=worst,
        passed=result.passed,
    )
    return result


def run_gradcheck(
    instances: int = 20, seed: int = 0, suites: Sequence[str] | None = None
) -> list[SuiteResult]:
    """Run the named suites (all by default), ``instances`` random instances each."""
    return [run_suite(name, instances, seed) for name in (suites or SUITES)]
