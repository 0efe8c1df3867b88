"""Terrain grids, 8-connectivity, and sensor footprints."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from gridcover.core.constants import ACTION_DELTAS
from gridcover.core.exceptions import WorldGenerationError
from gridcover.core.logging import get_logger

logger = get_logger(__name__)

Cell = tuple[int, int]

# N, NE, E, SE, S, SW, W, NW: the fixed neighbour expansion order
NEIGHBOR_OFFSETS: tuple[Cell, ...] = ACTION_DELTAS[:8]


@dataclass(eq=False)
class TerrainGrid:
    """M×M terrain; ``obstacles[r, c]`` is True for Obstacle cells."""

    obstacles: np.ndarray

    @property
    def size(self) -> int:
        return int(self.obstacles.shape[0])

    @property
    def free(self) -> np.ndarray:
        return ~self.obstacles

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.size and 0 <= c < self.size

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self.obstacles[cell]

    def free_cells(self) -> list[Cell]:
        rows, cols = np.nonzero(~self.obstacles)
        return list(zip(rows.tolist(), cols.tolist(), strict=True))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TerrainGrid):
            return NotImplemented
        return np.array_equal(self.obstacles, other.obstacles)


def neighbors(cell: Cell, size: int) -> Iterator[Cell]:
    """In-bounds 8-neighbours in N, NE, E, SE, S, SW, W, NW order."""
    r, c = cell
    for dr, dc in NEIGHBOR_OFFSETS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < size and 0 <= nc < size:
            yield nr, nc


def is_free_connected(obstacles: np.ndarray) -> bool:
    """True when the Free cells form one 8-connected component (or none exist)."""
    free = ~obstacles
    total = int(free.sum())
    if total == 0:
        return True
    size = obstacles.shape[0]
    first = np.argwhere(free)[0]
    start = (int(first[0]), int(first[1]))
    seen = np.zeros_like(free)
    seen[start] = True
    queue: deque[Cell] = deque([start])
    reached = 1
    while queue:
        cell = queue.popleft()
        for nxt in neighbors(cell, size):
            if free[nxt] and not seen[nxt]:
                seen[nxt] = True
                reached += 1
                queue.append(nxt)
    return reached == total


def obstacle_count(size: int, density: float) -> int:
    """round(ρ·M²), halves rounded up."""
    return int(np.floor(density * size * size + 0.5))


def generate_terrain(
    size: int,
    density: float,
    rng: np.random.Generator,
    max_attempts: int = 1000,
) -> TerrainGrid:
    """Scatter round(ρ·M²) obstacles, rejecting maps whose Free cells are disconnected.

    Raises:
        WorldGenerationError: No connected map after ``max_attempts`` draws.
    """
    n_obstacles = obstacle_count(size, density)
    for attempt in range(max_attempts):
        obstacles = np.zeros((size, size), dtype=bool)
        if n_obstacles:
            flat = rng.choice(size * size, size=n_obstacles, replace=False)
            obstacles.flat[flat] = True
        if is_free_connected(obstacles):
            if attempt:
                logger.debug("generation_retry", attempts=attempt + 1, size=size)
            return TerrainGrid(obstacles)
    raise WorldGenerationError(
        f"No Free-connected {size}x{size} map with density {density} "
        f"after {max_attempts} attempts"
    )


def footprint_bounds(position: Cell, k: int, size: int) -> tuple[int, int, int, int]:
    """Half-open (r0, r1, c0, c1) slice bounds of the clipped k×k footprint."""
    radius = (k - 1) // 2
    r, c = position
    return (
        max(r - radius, 0),
        min(r + radius + 1, size),
        max(c - radius, 0),
        min(c + radius + 1, size),
    )


def sensor_footprint(position: Cell, k: int, size: int) -> set[Cell]:
    """All in-bounds cells within Chebyshev radius (k−1)/2 of ``position``.

    Obstacles are included: the aerial sensor sees over them.
    """
    r0, r1, c0, c1 = footprint_bounds(position, k, size)
    return {(r, c) for r in range(r0, r1) for c in range(c0, c1)}
