"""EMAC model: per-agent embedding layers, a shared actor and a centralised critic."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gridcover.agents.base import CoveragePolicy
from gridcover.core.config import RunConfig
from gridcover.core.constants import NUM_ACTIONS
from gridcover.core.exceptions import ShapeError
from gridcover.core.models import Action, Activation, Algorithm
from gridcover.nn.dense import DenseNet, forward, init_dense, mlp
from gridcover.nn.functional import sample_categorical, softmax
from gridcover.observation.builder import observation_length

if TYPE_CHECKING:
    from gridcover.sim.world import World

# Near-uniform initial policy
ACTOR_OUTPUT_SCALE = 0.01


@dataclass
class EmacModel:
    """Encoders f_i (L_i → d), actor θ (d → 9) and critic φ (3M² → 1)."""

    encoders: list[DenseNet]
    actor: DenseNet
    critic: DenseNet
    algorithm: Algorithm = Algorithm.EMAC

    @property
    def embed_dim(self) -> int:
        return self.actor.input_dim

    @property
    def n_agents(self) -> int:
        return len(self.encoders)

    @property
    def observation_lengths(self) -> list[int]:
        return [enc.input_dim for enc in self.encoders]

    def networks(self) -> list[tuple[str, DenseNet]]:
        nets = [(f"encoder_{i}", enc) for i, enc in enumerate(self.encoders)]
        return [*nets, ("actor", self.actor), ("critic", self.critic)]

    @classmethod
    def from_networks(cls, nets: dict[str, DenseNet]) -> EmacModel:
        n = sum(1 for name in nets if name.startswith("encoder_"))
        return cls(
            encoders=[nets[f"encoder_{i}"] for i in range(n)],
            actor=nets["actor"],
            critic=nets["critic"],
        )


def build_emac_model(config: RunConfig, rng: np.random.Generator) -> EmacModel:
    """Freshly initialised model sized from ``config``.

    Encoders are a single identity-activated dense layer; heterogeneous
    sensor sizes give different input lengths but the same output ``d``.
    """
    net_cfg = config.network
    obs_cfg = config.observation
    d = net_cfg.embed_dim
    encoders = [
        init_dense(
            [observation_length(k, obs_cfg.near_size, obs_cfg.far_size), d],
            [Activation.IDENTITY],
            rng,
        )
        for k in config.world.sensor_k
    ]
    actor = mlp(
        d,
        net_cfg.actor_hidden,
        NUM_ACTIONS,
        rng,
        hidden_activation=net_cfg.hidden_activation,
        output_scale=ACTOR_OUTPUT_SCALE,
    )
    state_dim = 3 * config.world.grid_size**2
    critic = mlp(
        state_dim,
        net_cfg.critic_hidden,
        1,
        rng,
        hidden_activation=net_cfg.hidden_activation,
    )
    return EmacModel(encoders=encoders, actor=actor, critic=critic)


def embed(encoder: DenseNet, observation: np.ndarray) -> np.ndarray:
    """Fixed-length embedding of one observation (or a batch of them).

    Raises:
        ShapeError: observation length differs from the encoder's L_i.
    """
    length = np.shape(observation)[-1]
    if length != encoder.input_dim:
        raise ShapeError(
            f"Observation length {length} does not match encoder input {encoder.input_dim}"
        )
    z, _ = forward(encoder, observation)
    return z


def action_probabilities(model: EmacModel, agent: int, observation: np.ndarray) -> np.ndarray:
    """π(· | f_i(o_i)) for one agent; depends on nothing but its own observation."""
    logits, _ = forward(model.actor, embed(model.encoders[agent], observation))
    return softmax(logits)


def select_actions(
    probs: np.ndarray, rng: np.random.Generator, *, greedy: bool
) -> np.ndarray:
    """Row-wise argmax or inverse-CDF sample over a (batch, 9) probability matrix."""
    if greedy:
        return np.argmax(probs, axis=-1)
    return np.asarray(sample_categorical(probs, rng))


def act(
    model: EmacModel,
    observations: Sequence[np.ndarray | None],
    rng: np.random.Generator,
    *,
    greedy: bool = False,
) -> list[Action]:
    """Decentralised execution: each agent acts on its own observation, no critic."""
    actions: list[Action] = []
    for i, obs in enumerate(observations):
        if obs is None:
            actions.append(Action.NO_MOVE)
            continue
        probs = action_probabilities(model, i, obs)
        actions.append(Action(int(select_actions(probs[None, :], rng, greedy=greedy)[0])))
    return actions


class EmacPolicy(CoveragePolicy):
    name = "emac"
    algorithm = Algorithm.EMAC

    def __init__(self, model: EmacModel) -> None:
        self.model = model

    def act(
        self,
        world: World,
        observations: Sequence[np.ndarray | None],
        rng: np.random.Generator,
        *,
        greedy: bool = True,
    ) -> list[Action]:
        return act(self.model, observations, rng, greedy=greedy)
