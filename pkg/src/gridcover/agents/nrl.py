"""NRL planner: Voronoi regions planned with full map knowledge, executed open-loop."""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from gridcover.agents.base import CoveragePolicy
from gridcover.core.logging import get_logger
from gridcover.core.models import Action, Algorithm
from gridcover.evaluation.harness import record_episode
from gridcover.planning.coverage_plan import CoveragePlan, plan_region
from gridcover.planning.voronoi import VoronoiPartition, voronoi_partition

if TYPE_CHECKING:
    from gridcover.io.episode_log import EpisodeLog
    from gridcover.sim.world import World

logger = get_logger(__name__)


class NrlPolicy(CoveragePolicy):
    """Plans every agent once at reset, then replays the action queues.

    No replanning happens: an agent pushed off course by wind keeps issuing
    its planned moves, and an agent that finishes its region stays put.
    """

    name = "nrl"
    algorithm = Algorithm.NRL
    uses_observations = False

    def __init__(self) -> None:
        self.partition: VoronoiPartition | None = None
        self.plans: list[CoveragePlan] = []
        self._queues: list[deque[Action]] = []

    def reset(self, world: World) -> None:
        self.partition = voronoi_partition(world.terrain, [a.position for a in world.agents])
        self.plans = [
            plan_region(self.partition, agent.id, agent.sensor_k, world.coverage)
            for agent in world.agents
        ]
        self._queues = [deque(plan.actions) for plan in self.plans]
        logger.debug(
            "nrl_planned",
            seed=world.seed,
            plan_lengths=[len(q) for q in self._queues],
            region_sizes=self.partition.sizes(),
        )

    def act(
        self,
        world: World,
        observations: Sequence[np.ndarray | None],
        rng: np.random.Generator,
        *,
        greedy: bool = True,
    ) -> list[Action]:
        actions: list[Action] = []
        for agent, queue in zip(world.agents, self._queues, strict=True):
            if agent.active and queue:
                actions.append(queue.popleft())
            else:
                actions.append(Action.NO_MOVE)
        return actions

    def region_map(self) -> np.ndarray | None:
        return None if self.partition is None else self.partition.assignment

    def fork(self) -> NrlPolicy:
        return NrlPolicy()


def nrl_execute(world: World) -> EpisodeLog:
    """Plan and run one NRL episode on ``world`` (mutated), returning its log."""
    return record_episode(NrlPolicy(), world)
