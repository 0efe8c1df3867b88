"""Per-agent believed coverage, fed by (possibly delayed) teammate messages."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from gridcover.sim.terrain import footprint_bounds
from gridcover.sim.world import World


@dataclass(frozen=True)
class FootprintMessage:
    """A teammate's sensed footprint as half-open slice bounds."""

    sender: int
    bounds: tuple[int, int, int, int]
    send_time: int


@dataclass
class BeliefCoverage:
    owner: int
    believed: np.ndarray
    inbox: deque[FootprintMessage] = field(default_factory=deque)

    def deliver(self, now: int, delay: int) -> None:
        """Apply every queued message whose delay has elapsed (inbox is send-time ordered)."""
        while self.inbox and self.inbox[0].send_time + delay <= now:
            r0, r1, c0, c1 = self.inbox.popleft().bounds
            self.believed[r0:r1, c0:c1] = True


def update_belief(belief: BeliefCoverage, world: World, comm_delay_steps: int) -> BeliefCoverage:
    """Fold the current step's footprints into ``belief``.

    The owner's own footprint lands immediately; each active teammate's
    footprint sent at time t becomes visible at t + comm_delay_steps.
    Call once per environment step, after movement.
    """
    now = world.t
    size = world.size
    for agent in world.agents:
        if not agent.active:
            continue
        bounds = footprint_bounds(agent.position, agent.sensor_k, size)
        if agent.id == belief.owner:
            r0, r1, c0, c1 = bounds
            belief.believed[r0:r1, c0:c1] = True
        else:
            belief.inbox.append(FootprintMessage(agent.id, bounds, now))
    belief.deliver(now, comm_delay_steps)
    return belief


def init_beliefs(world: World, comm_delay_steps: int) -> list[BeliefCoverage]:
    """One belief per agent, seeded with the t=0 footprints (teammates' subject to delay)."""
    beliefs = [
        BeliefCoverage(owner=agent.id, believed=np.zeros_like(world.coverage))
        for agent in world.agents
    ]
    for belief in beliefs:
        update_belief(belief, world, comm_delay_steps)
    return beliefs
