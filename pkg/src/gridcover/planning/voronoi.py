"""Voronoi decomposition of the grid around agent start cells."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gridcover.core.exceptions import PartitionError
from gridcover.sim.terrain import Cell, TerrainGrid


@dataclass
class VoronoiPartition:
    """``assignment[r, c]`` is the id of the nearest seed (Chebyshev metric)."""

    assignment: np.ndarray
    seeds: list[Cell]
    terrain: TerrainGrid

    def region(self, agent_id: int) -> np.ndarray:
        return self.assignment == agent_id

    def free_region(self, agent_id: int) -> np.ndarray:
        return self.region(agent_id) & self.terrain.free

    def sizes(self) -> list[int]:
        return [int(self.region(i).sum()) for i in range(len(self.seeds))]


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def voronoi_partition(terrain: TerrainGrid, seeds: Sequence[Cell]) -> VoronoiPartition:
    """Assign every cell to its nearest seed; ties go to the lowest seed index.

    Obstacle cells are assigned too, so each region's sensing duty includes them.

    Raises:
        PartitionError: no seeds, duplicate seeds, or a seed on an Obstacle.
    """
    seeds = [tuple(s) for s in seeds]
    if not seeds:
        raise PartitionError("At least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise PartitionError(f"Duplicate seeds: {seeds}")
    for seed in seeds:
        if not terrain.is_free(seed):
            raise PartitionError(f"Seed {seed} is not a Free cell")

    size = terrain.size
    rows, cols = np.indices((size, size))
    distances = np.stack(
        [np.maximum(np.abs(rows - r), np.abs(cols - c)) for r, c in seeds]
    )
    # argmin returns the first minimum, i.e. the lowest agent id
    assignment = np.argmin(distances, axis=0).astype(np.int64)
    return VoronoiPartition(assignment=assignment, seeds=list(seeds), terrain=terrain)
