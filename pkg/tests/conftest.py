"""Shared test fixtures for all Gridcover tests."""

from __future__ import annotations

import numpy as np
import pytest

from gridcover.core.config import RunConfig, WorldConfig, validate_config
from gridcover.sim.terrain import TerrainGrid
from gridcover.sim.world import AgentState, World, generate_world


def tiny_config(**sections) -> RunConfig:
    """6×6 grid, two k=3 agents, tiny networks, a handful of episodes."""
    base = {
        "seed": 7,
        "world": {
            "grid_size": 6,
            "n_agents": 2,
            "sensor_k": [3, 3],
            "obstacle_density": 0.1,
            "timeout": 20,
        },
        "observation": {"near_size": 3, "far_size": 4},
        "network": {
            "embed_dim": 8,
            "actor_hidden": [16],
            "critic_hidden": [16],
            "q_hidden": [16],
        },
        "training": {
            "n_envs": 2,
            "max_episodes": 3,
            "eval_interval": 2,
            "eval_trials": 2,
        },
        "iql": {"replay_capacity": 500, "batch_size": 8, "target_sync_interval": 5},
        "evaluation": {"n_trials": 3},
    }
    for section, values in sections.items():
        if isinstance(base.get(section), dict):
            base[section] = {**base[section], **values}
        else:
            base[section] = values
    return validate_config(base)


def open_world(
    size: int,
    positions: list[tuple[int, int]],
    *,
    sensor_k: int = 3,
    obstacles: list[tuple[int, int]] | None = None,
    timeout: int = 100,
    **world_fields,
) -> World:
    """Hand-placed world with no random generation; coverage seeded from the start footprints."""
    grid = np.zeros((size, size), dtype=bool)
    for cell in obstacles or []:
        grid[cell] = True
    config = WorldConfig(
        grid_size=size,
        n_agents=len(positions),
        sensor_k=[sensor_k] * len(positions),
        obstacle_density=0.0,
        timeout=timeout,
        **world_fields,
    )
    agents = [AgentState(id=i, position=p, sensor_k=sensor_k) for i, p in enumerate(positions)]
    coverage = np.zeros((size, size), dtype=bool)
    half = sensor_k // 2
    for agent in agents:
        r, c = agent.position
        coverage[max(r - half, 0) : r + half + 1, max(c - half, 0) : c + half + 1] = True
    return World(
        terrain=TerrainGrid(grid),
        coverage=coverage,
        agents=agents,
        rng=np.random.default_rng(0),
        config=config,
    )


@pytest.fixture
def tiny() -> RunConfig:
    return tiny_config()


@pytest.fixture
def tiny_world(tiny: RunConfig) -> World:
    return generate_world(11, tiny.world, tiny.disturbances, tiny.rewards)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def uniform_behavior(seed: int = 0):
    """Rollout behavior drawing uniform actions; records (agent, batch) per call."""
    rng = np.random.default_rng(seed)
    log_p = float(np.log(1.0 / 9.0))
    calls: list[tuple[int, int]] = []

    def behavior(agent: int, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        calls.append((agent, obs.shape[0]))
        return rng.integers(0, 9, size=obs.shape[0]), np.full(obs.shape[0], log_p)

    behavior.calls = calls
    return behavior
