"""Egocentric observation tuple: terrain patch, near/far visit maps, last action.

Layout of the flat vector (row-major within each part):

    [ k×k terrain | j×j near visits | m×m pooled far visits | 9-way one-hot ]
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gridcover.core.config import ObservationConfig
from gridcover.core.constants import NUM_ACTIONS, OFF_MAP_TERRAIN, OFF_MAP_VISITED
from gridcover.core.exceptions import ConfigError
from gridcover.observation.belief import BeliefCoverage
from gridcover.sim.terrain import Cell
from gridcover.sim.world import AgentState, World


def observation_length(k: int, j: int, m: int) -> int:
    return k * k + j * j + m * m + NUM_ACTIONS


@dataclass(frozen=True)
class ObservationLayout:
    """Slices of each observation part inside the flat vector."""

    k: int
    j: int
    m: int

    @property
    def length(self) -> int:
        return observation_length(self.k, self.j, self.m)

    @property
    def terrain(self) -> slice:
        return slice(0, self.k * self.k)

    @property
    def near(self) -> slice:
        start = self.k * self.k
        return slice(start, start + self.j * self.j)

    @property
    def far(self) -> slice:
        start = self.k * self.k + self.j * self.j
        return slice(start, start + self.m * self.m)

    @property
    def last_action(self) -> slice:
        return slice(self.length - NUM_ACTIONS, self.length)


def egocentric_window(grid: np.ndarray, center: Cell, size: int, pad_value: float) -> np.ndarray:
    """size×size window of ``grid`` centred on ``center``; off-map cells get ``pad_value``."""
    out = np.full((size, size), pad_value, dtype=np.float32)
    half = size // 2
    rows, cols = grid.shape
    r, c = center
    r0, c0 = r - half, c - half
    gr0, gr1 = max(r0, 0), min(r0 + size, rows)
    gc0, gc1 = max(c0, 0), min(c0 + size, cols)
    if gr0 < gr1 and gc0 < gc1:
        out[gr0 - r0 : gr1 - r0, gc0 - c0 : gc1 - c0] = grid[gr0:gr1, gc0:gc1]
    return out


def sense_terrain(world: World, agent: AgentState) -> np.ndarray:
    """k×k patch: Free=0, Obstacle=1, off-map=1."""
    obstacles = world.terrain.obstacles
    return egocentric_window(obstacles, agent.position, agent.sensor_k, OFF_MAP_TERRAIN)


def near_field_visits(belief: BeliefCoverage, agent: AgentState, j: int) -> np.ndarray:
    """j×j patch of believed coverage: covered=1, uncovered=0, off-map=1."""
    return egocentric_window(belief.believed, agent.position, j, OFF_MAP_VISITED)


@lru_cache(maxsize=64)
def _bin_edges(width: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    starts = np.array([(a * width) // m for a in range(m)], dtype=np.int64)
    ends = np.array([((a + 1) * width) // m for a in range(m)], dtype=np.int64)
    # m may exceed width by one (m = 2M, W = 2M−1): never leave a bin empty
    ends = np.maximum(ends, starts + 1)
    return starts, ends


def adaptive_avg_pool(window: np.ndarray, m: int) -> np.ndarray:
    """Mean over m×m near-equal bins with edges floor(a·W/m)..floor((a+1)·W/m)."""
    width = window.shape[0]
    starts, ends = _bin_edges(width, m)
    integral = np.zeros((width + 1, width + 1), dtype=np.float64)
    integral[1:, 1:] = window.cumsum(axis=0).cumsum(axis=1)
    r0, r1 = starts[:, None], ends[:, None]
    c0, c1 = starts[None, :], ends[None, :]
    sums = integral[r1, c1] - integral[r0, c1] - integral[r1, c0] + integral[r0, c0]
    areas = (r1 - r0) * (c1 - c0)
    return (sums / areas).astype(np.float32)


def far_field_visits(belief: BeliefCoverage, agent: AgentState, m: int) -> np.ndarray:
    """(2M−1)² egocentric believed-coverage window, average-pooled to m×m.

    Raises:
        ConfigError: m outside [1, 2M].
    """
    size = belief.believed.shape[0]
    if m < 1 or m > 2 * size:
        raise ConfigError(f"far_size must lie in [1, {2 * size}], got {m}", key="far_size")
    window = egocentric_window(belief.believed, agent.position, 2 * size - 1, OFF_MAP_VISITED)
    return adaptive_avg_pool(window, m)


def build_observation(
    world: World,
    belief: BeliefCoverage,
    agent: AgentState,
    config: ObservationConfig | None = None,
) -> np.ndarray:
    """Flat float32 observation of length k² + j² + m² + 9, every entry in [0, 1]."""
    cfg = config or ObservationConfig()
    one_hot = np.zeros(NUM_ACTIONS, dtype=np.float32)
    one_hot[agent.last_action.value] = 1.0
    return np.concatenate(
        [
            sense_terrain(world, agent).ravel(),
            near_field_visits(belief, agent, cfg.near_size).ravel(),
            far_field_visits(belief, agent, cfg.far_size).ravel(),
            one_hot,
        ]
    )
