"""Tests for gridcover.observation.belief — believed coverage under message delay."""

from __future__ import annotations

import pytest

from gridcover.core.models import Action
from gridcover.observation.belief import init_beliefs, update_belief
from gridcover.sim.world import step
from tests.conftest import open_world

STAY = Action.NO_MOVE


def _run(world, beliefs, delay: int, steps: int, actions=None) -> None:
    for _ in range(steps):
        step(world, actions or [STAY] * world.n_agents)
        for belief in beliefs:
            update_belief(belief, world, delay)


class TestBelief:
    def test_no_delay_matches_true_coverage(self):
        world = open_world(10, [(1, 1), (8, 8)])
        beliefs = init_beliefs(world, 0)
        for belief in beliefs:
            assert (belief.believed == world.coverage).all()

    def test_own_footprint_immediate(self):
        world = open_world(10, [(1, 1), (8, 8)])
        own, _ = init_beliefs(world, 3)
        assert own.believed[0:3, 0:3].all()
        assert not own.believed[7:10, 7:10].any()

    def test_teammate_visible_after_delay(self):
        world = open_world(10, [(1, 1), (8, 8)])
        beliefs = init_beliefs(world, 2)
        _run(world, beliefs, 2, 1)
        assert not beliefs[0].believed[8, 8]
        _run(world, beliefs, 2, 1)
        assert beliefs[0].believed[8, 8]
        assert beliefs[1].believed[1, 1]

    def test_belief_never_exceeds_truth(self):
        world = open_world(10, [(1, 1), (8, 8)])
        beliefs = init_beliefs(world, 4)
        for _ in range(6):
            step(world, [Action.E, Action.W])
            for belief in beliefs:
                update_belief(belief, world, 4)
                assert not (belief.believed & ~world.coverage).any()

    def test_inactive_teammate_sends_nothing(self):
        world = open_world(10, [(1, 1), (8, 8)])
        world.agents[1].active = False
        beliefs = init_beliefs(world, 0)
        assert not beliefs[0].believed[8, 8]

    @pytest.mark.parametrize("delay", [0, 1, 4])
    def test_new_cell_arrives_exactly_after_delay(self, delay):
        world = open_world(10, [(1, 1), (8, 8)])
        beliefs = init_beliefs(world, delay)
        _run(world, beliefs, delay, 9)
        _run(world, beliefs, delay, 1, [STAY, Action.W])
        assert world.t == 10
        assert world.coverage[8, 6]
        assert beliefs[1].believed[8, 6]
        for _ in range(delay + 1):
            assert beliefs[0].believed[8, 6] == (world.t >= 10 + delay), world.t
            _run(world, beliefs, delay, 1)
        assert beliefs[0].believed[8, 6]
