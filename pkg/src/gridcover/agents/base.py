"""Abstract base class for every coverage policy."""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import TYPE_CHECKING, Protocol

import numpy as np

from gridcover.core.models import Action, Algorithm

if TYPE_CHECKING:
    from gridcover.nn.dense import DenseNet
    from gridcover.sim.world import World


class TrainedModel(Protocol):
    """Anything a checkpoint can hold: named networks in declaration order."""

    algorithm: Algorithm

    def networks(self) -> list[tuple[str, DenseNet]]: ...


class CoveragePolicy(ABC):
    """Maps a world (and per-agent observations) to a joint action.

    Each policy:
    1. Is reset once per episode with the freshly generated world
    2. Is asked for one action per agent every step
    3. Can be forked so concurrent trials never share mutable state
    """

    name: str = "base_policy"
    algorithm: Algorithm
    # False for planners that read the world directly instead of observations
    uses_observations: bool = True

    def reset(self, world: World) -> None:  # noqa: B027
        """Prepare for a new episode on ``world``."""

    @abstractmethod
    def act(
        self,
        world: World,
        observations: Sequence[np.ndarray | None],
        rng: np.random.Generator,
        *,
        greedy: bool = True,
    ) -> list[Action]:
        """Choose the joint action.

        Args:
            world: Current world; learned policies must not read it.
            observations: One entry per agent, ``None`` for inactive agents.
            rng: Source of randomness for sampled actions.
            greedy: Argmax instead of sampling.

        Returns:
            One action per agent; inactive agents get NoMove.
        """
        ...

    def region_map(self) -> np.ndarray | None:
        """Per-cell region ids to draw under the paths, if the policy has any."""
        return None

    def fork(self) -> CoveragePolicy:
        """A copy that can run another episode concurrently (parameters shared)."""
        return copy.copy(self)
