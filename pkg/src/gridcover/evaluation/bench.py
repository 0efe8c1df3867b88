"""Simulator throughput: random joint actions, steps per second."""

from __future__ import annotations

import time

import numpy as np
from pydantic import BaseModel

from gridcover.core.config import RunConfig
from gridcover.core.constants import NUM_ACTIONS
from gridcover.core.logging import get_logger
from gridcover.core.models import Action
from gridcover.sim.world import World, generate_world, step

logger = get_logger(__name__)


class BenchResult(BaseModel):
    steps: int
    episodes: int
    seconds: float

    @property
    def steps_per_second(self) -> float:
        return self.steps / self.seconds if self.seconds > 0 else float("inf")


def _fresh_world(seed: int, config: RunConfig) -> World:
    return generate_world(seed, config.world, config.disturbances, config.rewards)


def benchmark_simulator(config: RunConfig, n_steps: int = 10_000, seed: int = 0) -> BenchResult:
    """Step random joint actions for ``n_steps`` world steps, resetting on episode end.

    World generation is included in the timing.
    """
    rng = np.random.default_rng(seed)
    episodes = 1
    start = time.perf_counter()
    world = _fresh_world(seed, config)
    for _ in range(n_steps):
        if world.done:
            world = _fresh_world(seed + episodes, config)
            episodes += 1
        actions = [Action(int(a)) for a in rng.integers(0, NUM_ACTIONS, size=world.n_agents)]
        world, _, _, _ = step(world, actions)
    result = BenchResult(steps=n_steps, episodes=episodes, seconds=time.perf_counter() - start)
    logger.info(
        "benchmark_complete",
        steps=result.steps,
        episodes=result.episodes,
        steps_per_second=round(result.steps_per_second, 1),
    )
    return result
