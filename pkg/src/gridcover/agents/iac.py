"""Independent actor-critic learners: one actor and one own-observation critic per agent."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gridcover.agents.base import CoveragePolicy
from gridcover.agents.emac import ACTOR_OUTPUT_SCALE, select_actions
from gridcover.core.config import RunConfig
from gridcover.core.constants import NUM_ACTIONS
from gridcover.core.models import Action, Algorithm
from gridcover.nn.dense import DenseNet, forward, mlp
from gridcover.nn.functional import softmax
from gridcover.nn.optim import AdamState
from gridcover.observation.builder import observation_length

if TYPE_CHECKING:
    from gridcover.sim.world import World


@dataclass
class IacLearner:
    """No parameter sharing and no global state: everything keyed to one agent."""

    actor: DenseNet
    critic: DenseNet
    actor_optimizer: AdamState
    critic_optimizer: AdamState

    def probabilities(self, observations: np.ndarray) -> np.ndarray:
        logits, _ = forward(self.actor, observations)
        return softmax(logits)

    def values(self, observations: np.ndarray) -> np.ndarray:
        v, _ = forward(self.critic, observations)
        return v[..., 0]


def build_iac_learner(obs_dim: int, config: RunConfig, rng: np.random.Generator) -> IacLearner:
    net = config.network
    actor = mlp(
        obs_dim,
        net.actor_hidden,
        NUM_ACTIONS,
        rng,
        hidden_activation=net.hidden_activation,
        output_scale=ACTOR_OUTPUT_SCALE,
    )
    critic = mlp(obs_dim, net.critic_hidden, 1, rng, hidden_activation=net.hidden_activation)
    return IacLearner(
        actor=actor,
        critic=critic,
        actor_optimizer=AdamState.for_net(actor, config.optimizer),
        critic_optimizer=AdamState.for_net(critic, config.optimizer),
    )


@dataclass
class IacTeam:
    learners: list[IacLearner]
    algorithm: Algorithm = Algorithm.IAC

    def networks(self) -> list[tuple[str, DenseNet]]:
        nets: list[tuple[str, DenseNet]] = []
        for i, learner in enumerate(self.learners):
            nets.extend(((f"actor_{i}", learner.actor), (f"critic_{i}", learner.critic)))
        return nets

    @classmethod
    def from_networks(cls, nets: dict[str, DenseNet], config: RunConfig) -> IacTeam:
        n = sum(1 for name in nets if name.startswith("actor_"))
        return cls(
            [
                IacLearner(
                    actor=nets[f"actor_{i}"],
                    critic=nets[f"critic_{i}"],
                    actor_optimizer=AdamState.for_net(nets[f"actor_{i}"], config.optimizer),
                    critic_optimizer=AdamState.for_net(nets[f"critic_{i}"], config.optimizer),
                )
                for i in range(n)
            ]
        )


def build_iac_team(config: RunConfig, rng: np.random.Generator) -> IacTeam:
    obs = config.observation
    return IacTeam(
        [
            build_iac_learner(observation_length(k, obs.near_size, obs.far_size), config, rng)
            for k in config.world.sensor_k
        ]
    )


class IacPolicy(CoveragePolicy):
    name = "iac"
    algorithm = Algorithm.IAC

    def __init__(self, team: IacTeam) -> None:
        self.team = team

    def act(
        self,
        world: World,
        observations: Sequence[np.ndarray | None],
        rng: np.random.Generator,
        *,
        greedy: bool = True,
    ) -> list[Action]:
        actions: list[Action] = []
        for learner, obs in zip(self.team.learners, observations, strict=True):
            if obs is None:
                actions.append(Action.NO_MOVE)
                continue
            probs = learner.probabilities(obs[None, :])
            actions.append(Action(int(select_actions(probs, rng, greedy=greedy)[0])))
        return actions
