"""Tests for gridcover.evaluation.bench."""

from __future__ import annotations

from gridcover.evaluation.bench import BenchResult, benchmark_simulator


class TestBench:
    def test_counts_steps_and_resets(self, tiny):
        result = benchmark_simulator(tiny, n_steps=100, seed=1)
        assert result.steps == 100
        # tiny worlds time out after 20 steps
        assert result.episodes >= 100 // tiny.world.timeout
        assert result.seconds > 0.0

    def test_rate(self):
        assert BenchResult(steps=10, episodes=1, seconds=2.0).steps_per_second == 5.0
        assert BenchResult(steps=10, episodes=1, seconds=0.0).steps_per_second == float("inf")
