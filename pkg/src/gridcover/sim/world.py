"""The coverage world: generation, joint-action transitions, termination."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from gridcover.core.config import DisturbanceConfig, RewardConfig, WorldConfig
from gridcover.core.exceptions import ContractViolationError, WorldGenerationError
from gridcover.core.logging import get_logger
from gridcover.core.models import Action, CollisionMode
from gridcover.sim.disturbances import apply_dropout, apply_wind
from gridcover.sim.rewards import RewardVector, compute_rewards
from gridcover.sim.terrain import Cell, TerrainGrid, footprint_bounds, generate_terrain

logger = get_logger(__name__)


@dataclass
class AgentState:
    id: int
    position: Cell
    sensor_k: int
    active: bool = True
    last_action: Action = Action.NO_MOVE


@dataclass
class StepInfo:
    """Diagnostics of one transition."""

    executed_actions: list[Action]
    collisions: list[bool]
    new_cells: list[int]
    newly_covered: int
    dropped: list[int] = field(default_factory=list)
    done_by_coverage: bool = False


@dataclass(eq=False)
class World:
    """True environment state s_t. Owns its rng; never shared between threads."""

    terrain: TerrainGrid
    coverage: np.ndarray
    agents: list[AgentState]
    rng: np.random.Generator
    config: WorldConfig
    factors: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    seed: int = 0
    t: int = 0

    @property
    def size(self) -> int:
        return self.terrain.size

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def covered_count(self) -> int:
        return int(self.coverage.sum())

    @property
    def coverage_fraction(self) -> float:
        return self.covered_count / self.coverage.size

    @property
    def is_complete(self) -> bool:
        return bool(self.coverage.all())

    @property
    def active_count(self) -> int:
        return sum(1 for a in self.agents if a.active)

    @property
    def done(self) -> bool:
        return self.is_complete or self.t >= self.config.timeout

    def occupancy(self) -> np.ndarray:
        grid = np.zeros_like(self.coverage)
        for agent in self.agents:
            if agent.active:
                grid[agent.position] = True
        return grid

    def global_state(self) -> np.ndarray:
        """Critic input: terrain, coverage and active-agent occupancy, flattened (3M²)."""
        return np.concatenate(
            [
                self.terrain.obstacles.ravel(),
                self.coverage.ravel(),
                self.occupancy().ravel(),
            ]
        ).astype(np.float32)

    def same_state(self, other: World) -> bool:
        """Field-by-field equality of the observable state (rng excluded)."""
        return (
            self.terrain == other.terrain
            and np.array_equal(self.coverage, other.coverage)
            and self.agents == other.agents
            and self.t == other.t
        )


def generate_world(
    seed: int,
    config: WorldConfig,
    disturbances: DisturbanceConfig | None = None,
    rewards: RewardConfig | None = None,
) -> World:
    """Build a fresh world; identical (seed, config) always yields the identical world.

    Raises:
        WorldGenerationError: Density too high for a connected map, or more
            agents than Free cells.
    """
    rng = np.random.default_rng(seed)
    size = config.grid_size
    terrain = generate_terrain(size, config.obstacle_density, rng, config.max_generation_attempts)

    free = terrain.free_cells()
    if config.n_agents > len(free):
        raise WorldGenerationError(
            f"{config.n_agents} agents do not fit on {len(free)} Free cells"
        )
    picks = rng.choice(len(free), size=config.n_agents, replace=False)
    agents = [
        AgentState(id=i, position=free[int(idx)], sensor_k=config.sensor_k[i])
        for i, idx in enumerate(picks)
    ]

    coverage = np.zeros((size, size), dtype=bool)
    for agent in agents:
        r0, r1, c0, c1 = footprint_bounds(agent.position, agent.sensor_k, size)
        coverage[r0:r1, c0:c1] = True

    world = World(
        terrain=terrain,
        coverage=coverage,
        agents=agents,
        rng=rng,
        config=config,
        factors=disturbances or DisturbanceConfig(),
        rewards=rewards or RewardConfig(),
        seed=seed,
    )
    logger.debug(
        "world_generated",
        seed=seed,
        size=size,
        obstacles=int(terrain.obstacles.sum()),
        coverage=round(world.coverage_fraction, 4),
    )
    return world


def _resolve_moves(world: World, actions: Sequence[Action]) -> list[bool]:
    """Apply movement with collision handling; returns per-agent collision flags.

    Blocked moves (bounds, obstacle, contested cell, swap) are reverted.  A
    contested cell goes to a stationary occupant if any, else to the lowest
    index claimant; every mover into it is flagged.
    """
    agents = world.agents
    n = len(agents)
    pos = [a.position for a in agents]
    target = list(pos)
    collided = [False] * n
    active = [i for i, a in enumerate(agents) if a.active]

    for i in active:
        action = actions[i]
        if not action.is_movement:
            continue
        dr, dc = action.delta
        cell = (pos[i][0] + dr, pos[i][1] + dc)
        if world.terrain.is_free(cell):
            target[i] = cell
        else:
            collided[i] = True

    for idx, i in enumerate(active):
        for j in active[idx + 1 :]:
            if target[i] == pos[j] and target[j] == pos[i] and target[i] != pos[i]:
                collided[i] = collided[j] = True
                target[i], target[j] = pos[i], pos[j]

    changed = True
    while changed:
        changed = False
        claims: dict[Cell, list[int]] = {}
        for i in active:
            claims.setdefault(target[i], []).append(i)
        for claimants in claims.values():
            if len(claimants) < 2:
                continue
            holders = [i for i in claimants if target[i] == pos[i]]
            keep = holders[0] if holders else min(claimants)
            for i in claimants:
                if i in holders:
                    continue
                collided[i] = True
                if i != keep:
                    target[i] = pos[i]
                    changed = True

    deactivate = world.config.collision_mode is CollisionMode.DEACTIVATE
    for i in active:
        agent = agents[i]
        if collided[i] and deactivate:
            agent.active = False
            agent.last_action = Action.NO_MOVE
            continue
        agent.last_action = actions[i] if target[i] != pos[i] else Action.NO_MOVE
        agent.position = target[i]
    return collided


def step(
    world: World, joint_action: Sequence[Action | int]
) -> tuple[World, RewardVector, bool, StepInfo]:
    """Advance the world by one joint action (mutates and returns ``world``).

    Order: wind → dropout → targets → collisions → positions → coverage →
    rewards → t += 1.  Inactive agents' actions are ignored and their reward
    components are zero.

    Raises:
        ContractViolationError: ``joint_action`` length differs from n.
    """
    n = world.n_agents
    if len(joint_action) != n:
        raise ContractViolationError(f"Expected {n} actions, got {len(joint_action)}")
    actions = [Action(a) for a in joint_action]
    was_active = [a.active for a in world.agents]
    coverage_before = world.coverage.copy()

    if world.is_complete:
        world.t += 1
        rewards = compute_rewards(
            coverage_before, world.coverage, [0] * n, [False] * n, True, world.rewards
        )
        rewards.mask(was_active)
        info = StepInfo(
            executed_actions=[Action.NO_MOVE] * n,
            collisions=[False] * n,
            new_cells=[0] * n,
            newly_covered=0,
            done_by_coverage=True,
        )
        return world, rewards, True, info

    factors = world.factors
    executed = [
        apply_wind(action, factors.wind_prob, world.rng) if agent.active else Action.NO_MOVE
        for agent, action in zip(world.agents, actions, strict=True)
    ]

    apply_dropout(world, factors.dropout_prob, factors.dropout_min_agents, world.rng)
    dropped = [i for i, a in enumerate(world.agents) if was_active[i] and not a.active]

    collisions = _resolve_moves(world, executed)

    size = world.size
    new_cells: list[int] = []
    for agent in world.agents:
        if not agent.active:
            new_cells.append(0)
            continue
        r0, r1, c0, c1 = footprint_bounds(agent.position, agent.sensor_k, size)
        new_cells.append(int((~coverage_before[r0:r1, c0:c1]).sum()))
        world.coverage[r0:r1, c0:c1] = True

    done_by_coverage = world.is_complete
    rewards = compute_rewards(
        coverage_before, world.coverage, new_cells, collisions, done_by_coverage, world.rewards
    )
    rewards.mask(was_active)
    world.t += 1
    done = done_by_coverage or world.t >= world.config.timeout

    info = StepInfo(
        executed_actions=executed,
        collisions=collisions,
        new_cells=new_cells,
        newly_covered=int(world.coverage.sum()) - int(coverage_before.sum()),
        dropped=dropped,
        done_by_coverage=done_by_coverage,
    )
    return world, rewards, done, info
