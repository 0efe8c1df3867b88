"""Comprehensive tests for gridcover.sim.world — generation, transitions, termination."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from gridcover.core.config import DisturbanceConfig, WorldConfig
from gridcover.core.exceptions import ContractViolationError, WorldGenerationError
from gridcover.core.models import Action, CollisionMode
from gridcover.sim.world import generate_world, step
from tests.conftest import open_world

N, E, W, S, STAY = Action.N, Action.E, Action.W, Action.S, Action.NO_MOVE


# ── Generation ───────────────────────────────────────────────────────────────


class TestGenerateWorld:
    def test_deterministic(self, tiny):
        a = generate_world(5, tiny.world)
        b = generate_world(5, tiny.world)
        assert a.same_state(b)

    def test_seeds_differ(self, tiny):
        a = generate_world(5, tiny.world)
        b = generate_world(6, tiny.world)
        assert not a.same_state(b)

    def test_agents_on_distinct_free_cells(self, tiny_world):
        positions = [a.position for a in tiny_world.agents]
        assert len(set(positions)) == len(positions)
        assert all(tiny_world.terrain.is_free(p) for p in positions)

    def test_initial_coverage_is_start_footprints(self):
        config = WorldConfig(grid_size=10, n_agents=1, sensor_k=[3], obstacle_density=0.0)
        world = generate_world(0, config)
        assert world.covered_count in (4, 6, 9)
        assert world.t == 0
        r, c = world.agents[0].position
        assert world.coverage[r, c]

    def test_sensor_sizes_assigned(self):
        config = WorldConfig(grid_size=10, n_agents=2, sensor_k=[3, 5])
        world = generate_world(1, config)
        assert [a.sensor_k for a in world.agents] == [3, 5]

    def test_too_many_agents(self):
        config = WorldConfig(grid_size=2, n_agents=5, sensor_k=[3] * 5, obstacle_density=0.0)
        with pytest.raises(WorldGenerationError):
            generate_world(0, config)

    def test_global_state_layout(self, tiny_world):
        state = tiny_world.global_state()
        m2 = tiny_world.size**2
        assert state.shape == (3 * m2,)
        assert state.dtype == np.float32
        assert state[m2 : 2 * m2].sum() == tiny_world.covered_count
        assert state[2 * m2 :].sum() == tiny_world.active_count


# ── Movement and collisions ──────────────────────────────────────────────────


class TestStepMovement:
    def test_free_move(self):
        world = open_world(6, [(2, 2)])
        _, _, _, info = step(world, [E])
        assert world.agents[0].position == (2, 3)
        assert info.collisions == [False]
        assert world.agents[0].last_action is E

    def test_out_of_bounds_reverts(self):
        world = open_world(6, [(0, 0)])
        _, rewards, _, info = step(world, [N])
        assert world.agents[0].position == (0, 0)
        assert info.collisions == [True]
        assert rewards.collision[0] == -0.5
        assert world.agents[0].last_action is STAY

    def test_obstacle_reverts(self):
        world = open_world(6, [(2, 2)], obstacles=[(2, 3)])
        _, _, _, info = step(world, [E])
        assert world.agents[0].position == (2, 2)
        assert info.collisions == [True]

    def test_swap_blocked(self):
        world = open_world(6, [(2, 2), (2, 3)])
        _, _, _, info = step(world, [E, W])
        assert [a.position for a in world.agents] == [(2, 2), (2, 3)]
        assert info.collisions == [True, True]

    def test_contested_cell_goes_to_lowest_index(self):
        world = open_world(6, [(2, 2), (2, 4)])
        _, _, _, info = step(world, [E, W])
        assert world.agents[0].position == (2, 3)
        assert world.agents[1].position == (2, 4)
        assert info.collisions == [True, True]

    def test_stationary_occupant_keeps_cell(self):
        world = open_world(6, [(2, 2), (2, 3)])
        _, _, _, info = step(world, [STAY, W])
        assert [a.position for a in world.agents] == [(2, 2), (2, 3)]
        assert info.collisions == [False, True]

    def test_follow_the_leader_allowed(self):
        world = open_world(6, [(2, 2), (2, 3)])
        _, _, _, info = step(world, [E, E])
        assert [a.position for a in world.agents] == [(2, 3), (2, 4)]
        assert info.collisions == [False, False]

    def test_blocked_chain_reverts(self):
        world = open_world(6, [(2, 3), (2, 4)], obstacles=[(2, 5)])
        _, _, _, info = step(world, [E, E])
        assert [a.position for a in world.agents] == [(2, 3), (2, 4)]
        assert info.collisions[1]

    def test_positions_stay_distinct(self):
        rng = np.random.default_rng(0)
        config = WorldConfig(grid_size=5, n_agents=4, sensor_k=[3] * 4, timeout=200)
        world = generate_world(3, config)
        while not world.done:
            step(world, [Action(int(a)) for a in rng.integers(0, 9, size=4)])
            positions = [a.position for a in world.agents]
            assert len(set(positions)) == 4
            assert all(world.terrain.is_free(p) for p in positions)

    def test_wrong_action_count(self):
        world = open_world(6, [(2, 2)])
        with pytest.raises(ContractViolationError):
            step(world, [E, E])


class TestDeactivateMode:
    def test_collider_deactivated(self):
        world = open_world(6, [(0, 0), (3, 3)], collision_mode=CollisionMode.DEACTIVATE)
        step(world, [N, STAY])
        assert not world.agents[0].active
        assert world.agents[1].active

    def test_inactive_agent_ignored_and_zero_reward(self):
        world = open_world(8, [(0, 0), (4, 4)], collision_mode=CollisionMode.DEACTIVATE)
        step(world, [N, STAY])
        _, rewards, _, info = step(world, [S, STAY])
        assert world.agents[0].position == (0, 0)
        assert info.executed_actions[0] is STAY
        assert rewards.total[0] == 0.0

    def test_inactive_agent_leaves_occupancy(self):
        world = open_world(6, [(0, 0), (3, 3)], collision_mode=CollisionMode.DEACTIVATE)
        step(world, [N, STAY])
        assert not world.occupancy()[0, 0]


class TestJointActionOccupancy:
    @pytest.mark.parametrize("mode", [CollisionMode.NO_MOVE, CollisionMode.DEACTIVATE])
    @pytest.mark.parametrize(
        "layout",
        [[(2, 1), (2, 2)], [(1, 2), (2, 2)], [(0, 0), (1, 1)]],
        ids=["row", "column", "diagonal"],
    )
    def test_every_joint_action(self, mode, layout):
        for pair in itertools.product(range(9), repeat=2):
            world = open_world(5, layout, collision_mode=mode)
            _, _, _, info = step(world, list(pair))
            positions = [a.position for a in world.agents if a.active]
            assert len(set(positions)) == len(positions), pair
            assert all(world.terrain.is_free(p) for p in positions), pair
            for agent, start, action, collided in zip(
                world.agents, layout, pair, info.collisions, strict=True
            ):
                dr, dc = Action(action).delta
                moved = (start[0] + dr, start[1] + dc)
                assert agent.position in (start, moved), pair
                if mode is CollisionMode.DEACTIVATE:
                    assert agent.active is not collided, pair
                    if collided:
                        assert agent.position == start, pair
                else:
                    assert agent.active, pair


# ── Coverage, rewards, termination ───────────────────────────────────────────


class TestCoverageAndTermination:
    def test_coverage_monotone(self):
        rng = np.random.default_rng(1)
        config = WorldConfig(grid_size=8, n_agents=2, sensor_k=[3, 3], timeout=60)
        world = generate_world(2, config)
        previous = world.coverage.copy()
        while not world.done:
            step(world, [Action(int(a)) for a in rng.integers(0, 9, size=2)])
            assert not np.any(previous & ~world.coverage)
            previous = world.coverage.copy()

    def test_new_cells_counted(self):
        world = open_world(8, [(1, 1)])
        _, rewards, _, info = step(world, [E])
        assert info.new_cells == [3]
        assert info.newly_covered == 3
        assert rewards.discovery[0] == 0.1
        assert rewards.progress[0] == pytest.approx(3 / 64)

    def test_revisit_penalised(self):
        world = open_world(8, [(1, 1)])
        _, rewards, _, _ = step(world, [STAY])
        assert rewards.visitation[0] == -0.05
        assert rewards.discovery[0] == 0.0

    def test_timeout(self):
        world = open_world(8, [(1, 1)], timeout=3)
        done = False
        for _ in range(3):
            assert not done
            _, _, done, _ = step(world, [STAY])
        assert done
        assert world.t == 3
        assert not world.is_complete

    def test_completion_pays_terminal_to_everyone(self):
        world = open_world(3, [(1, 1), (0, 0)])
        assert world.is_complete
        _, rewards, done, info = step(world, [STAY, STAY])
        assert done
        assert info.done_by_coverage
        assert list(rewards.terminal) == [10.0, 10.0]

    def test_completing_step(self):
        world = open_world(3, [(0, 0)])
        _, rewards, done, info = step(world, [Action.SE])
        assert done
        assert info.done_by_coverage
        assert rewards.terminal[0] == 10.0

    def test_same_seed_and_actions_same_trajectory(self, tiny):
        disturbed = DisturbanceConfig(wind_prob=0.3, dropout_prob=0.1)
        a = generate_world(9, tiny.world, disturbed)
        b = generate_world(9, tiny.world, disturbed)
        rng = np.random.default_rng(4)
        while not a.done:
            actions = [Action(int(x)) for x in rng.integers(0, 9, size=2)]
            step(a, actions)
            step(b, actions)
            assert a.same_state(b)
