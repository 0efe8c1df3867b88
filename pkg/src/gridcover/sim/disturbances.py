"""Environmental disturbances: wind turbulence and agent dropout.

Neither function draws from the rng when its probability is zero, so a
disabled factor leaves the random stream (and thus the episode) untouched.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from gridcover.core.logging import get_logger
from gridcover.core.models import Action

if TYPE_CHECKING:
    from gridcover.sim.world import World

logger = get_logger(__name__)


def apply_wind(action: Action, wind_prob: float, rng: np.random.Generator) -> Action:
    """With probability ``wind_prob`` swap a movement for one of its two compass neighbours."""
    if wind_prob <= 0.0 or not action.is_movement:
        return action
    if rng.random() >= wind_prob:
        return action
    clockwise, counter = action.ring_neighbors()
    return clockwise if rng.random() < 0.5 else counter


def apply_dropout(
    world: World,
    p: float,
    min_agents: int,
    rng: np.random.Generator,
) -> World:
    """Independently drop each active agent with probability ``p``.

    Agents are visited in index order and drops stop once only
    ``min_agents`` remain active.
    """
    if p <= 0.0:
        return world
    active = world.active_count
    for agent in world.agents:
        if not agent.active:
            continue
        if active <= min_agents:
            break
        if rng.random() < p:
            agent.active = False
            active -= 1
            logger.debug("agent_dropped", agent=agent.id, t=world.t, remaining=active)
    return world
