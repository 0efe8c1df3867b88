"""Tests for gridcover.sim.terrain — map generation, connectivity and footprints."""

from __future__ import annotations

import numpy as np
import pytest

from gridcover.core.exceptions import WorldGenerationError
from gridcover.sim.terrain import (
    TerrainGrid,
    footprint_bounds,
    generate_terrain,
    is_free_connected,
    neighbors,
    obstacle_count,
    sensor_footprint,
)


class TestNeighbors:
    def test_interior_order(self):
        assert list(neighbors((1, 1), 3)) == [
            (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0),
        ]

    def test_corner_clipped(self):
        assert sorted(neighbors((0, 0), 4)) == [(0, 1), (1, 0), (1, 1)]


class TestConnectivity:
    def test_empty_map_connected(self):
        assert is_free_connected(np.zeros((5, 5), dtype=bool))

    def test_all_obstacles_counts_as_connected(self):
        assert is_free_connected(np.ones((3, 3), dtype=bool))

    def test_diagonal_link_connects(self):
        grid = np.ones((3, 3), dtype=bool)
        grid[0, 0] = grid[1, 1] = grid[2, 2] = False
        assert is_free_connected(grid)

    def test_wall_disconnects(self):
        grid = np.zeros((4, 4), dtype=bool)
        grid[:, 2] = True
        assert not is_free_connected(grid)


class TestGenerateTerrain:
    def test_obstacle_count_rounds_half_up(self):
        assert obstacle_count(16, 0.1) == 26
        assert obstacle_count(10, 0.005) == 1
        assert obstacle_count(10, 0.0) == 0

    def test_exact_obstacle_count(self):
        terrain = generate_terrain(16, 0.1, np.random.default_rng(0))
        assert int(terrain.obstacles.sum()) == 26

    def test_always_connected(self):
        for seed in range(20):
            terrain = generate_terrain(10, 0.25, np.random.default_rng(seed))
            assert is_free_connected(terrain.obstacles)

    def test_deterministic(self):
        a = generate_terrain(12, 0.2, np.random.default_rng(3))
        b = generate_terrain(12, 0.2, np.random.default_rng(3))
        assert a == b

    def test_gives_up_when_density_too_high(self):
        with pytest.raises(WorldGenerationError):
            generate_terrain(20, 0.9, np.random.default_rng(0), max_attempts=3)


class TestTerrainGrid:
    def test_free_cells_and_bounds(self):
        grid = np.zeros((3, 3), dtype=bool)
        grid[1, 1] = True
        terrain = TerrainGrid(grid)
        assert terrain.size == 3
        assert len(terrain.free_cells()) == 8
        assert not terrain.is_free((1, 1))
        assert not terrain.is_free((-1, 0))
        assert terrain.is_free((0, 0))


class TestFootprint:
    def test_interior(self):
        assert len(sensor_footprint((5, 5), 5, 16)) == 25

    def test_corner_clipped(self):
        assert sensor_footprint((0, 0), 3, 8) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_bounds_half_open(self):
        assert footprint_bounds((2, 7), 3, 8) == (1, 4, 6, 8)

    def test_includes_obstacles(self):
        # sensing is aerial: the footprint ignores terrain
        assert (1, 1) in sensor_footprint((0, 0), 3, 4)
