"""Independent Q-learners: per-agent online/target Q networks and replay."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from gridcover.agents.base import CoveragePolicy
from gridcover.core.config import IqlConfig, RunConfig
from gridcover.core.constants import NUM_ACTIONS
from gridcover.core.models import Action, Algorithm
from gridcover.nn.dense import DenseNet, forward, mlp
from gridcover.nn.optim import AdamState
from gridcover.observation.builder import observation_length

if TYPE_CHECKING:
    from gridcover.sim.world import World


@dataclass
class Transition:
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_observations: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return int(self.actions.shape[0])


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int) -> None:
        self.capacity = capacity
        self._obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self._next = np.zeros((capacity, obs_dim), dtype=np.float32)
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity, dtype=np.float32)
        self._dones = np.zeros(capacity, dtype=bool)
        self._pos = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, batch: Transition) -> None:
        for idx in range(len(batch)):
            slot = self._pos
            self._obs[slot] = batch.observations[idx]
            self._next[slot] = batch.next_observations[idx]
            self._actions[slot] = batch.actions[idx]
            self._rewards[slot] = batch.rewards[idx]
            self._dones[slot] = batch.dones[idx]
            self._pos = (self._pos + 1) % self.capacity
            self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Transition:
        idx = rng.integers(0, self._size, size=min(batch_size, self._size))
        return Transition(
            self._obs[idx],
            self._actions[idx],
            self._rewards[idx],
            self._next[idx],
            self._dones[idx],
        )


@dataclass
class QLearner:
    """One agent's Q_i, its target copy Q_i⁻, optimiser and replay."""

    online: DenseNet
    target: DenseNet
    optimizer: AdamState
    replay: ReplayBuffer
    updates: int = field(default=0)

    def q_values(self, observations: np.ndarray) -> np.ndarray:
        q, _ = forward(self.online, observations)
        return q

    def sync_target(self) -> None:
        self.target = self.online.copy()


def build_q_learner(
    obs_dim: int, config: RunConfig, rng: np.random.Generator
) -> QLearner:
    online = mlp(
        obs_dim,
        config.network.q_hidden,
        NUM_ACTIONS,
        rng,
        hidden_activation=config.network.hidden_activation,
    )
    return QLearner(
        online=online,
        target=online.copy(),
        optimizer=AdamState.for_net(online, config.optimizer),
        replay=ReplayBuffer(config.iql.replay_capacity, obs_dim),
    )


def epsilon_at(progress: float, config: IqlConfig) -> float:
    """Linear ε anneal, reaching ε_end at ``epsilon_anneal_fraction`` of training."""
    frac = min(max(progress / config.epsilon_anneal_fraction, 0.0), 1.0)
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)


def epsilon_greedy(
    q_values: np.ndarray, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """Row-wise ε-greedy over a (batch, 9) Q matrix; one uniform draw per row."""
    greedy = np.argmax(q_values, axis=-1)
    explore = rng.random(q_values.shape[0]) < epsilon
    random_actions = rng.integers(0, NUM_ACTIONS, size=q_values.shape[0])
    return np.where(explore, random_actions, greedy)


@dataclass
class IqlTeam:
    learners: list[QLearner]
    algorithm: Algorithm = Algorithm.IQL

    def networks(self) -> list[tuple[str, DenseNet]]:
        return [(f"q_{i}", learner.online) for i, learner in enumerate(self.learners)]

    @classmethod
    def from_networks(cls, nets: dict[str, DenseNet], config: RunConfig) -> IqlTeam:
        learners = []
        for i in range(sum(1 for name in nets if name.startswith("q_"))):
            online = nets[f"q_{i}"]
            learners.append(
                QLearner(
                    online=online,
                    target=online.copy(),
                    optimizer=AdamState.for_net(online, config.optimizer),
                    replay=ReplayBuffer(config.iql.replay_capacity, online.input_dim),
                )
            )
        return cls(learners)


def build_iql_team(config: RunConfig, rng: np.random.Generator) -> IqlTeam:
    obs = config.observation
    return IqlTeam(
        [
            build_q_learner(observation_length(k, obs.near_size, obs.far_size), config, rng)
            for k in config.world.sensor_k
        ]
    )


class IqlPolicy(CoveragePolicy):
    """Greedy (or ε = 0.05 sampled) actions from each agent's own Q network."""

    name = "iql"
    algorithm = Algorithm.IQL

    def __init__(self, team: IqlTeam, epsilon: float = 0.05) -> None:
        self.team = team
        self.epsilon = epsilon

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
            q = learner.q_values(obs[None, :])
            eps = 0.0 if greedy else self.epsilon
            actions.append(Action(int(epsilon_greedy(q, eps, rng)[0])))
        return actions
