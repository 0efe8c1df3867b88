"""Comprehensive tests for gridcover.evaluation.aggregator."""

from __future__ import annotations

import pytest

from gridcover.core.models import CurvePoint, TrialRecord
from gridcover.evaluation.aggregator import (
    STATS_COLUMNS,
    curve_table,
    format_table,
    stats_table,
    summarize_trials,
)


def _record(seed: int, steps: int, coverage: float = 1.0, completed: bool = True) -> TrialRecord:
    return TrialRecord(seed=seed, completion_steps=steps, coverage=coverage, completed=completed)


class TestSummarizeTrials:
    """Tests for summarize_trials()."""

    def test_empty(self):
        stats = summarize_trials([], condition="none")
        assert stats.n_trials == 0
        assert stats.condition == "none"

    def test_mean_and_std(self):
        stats = summarize_trials([_record(1, 10), _record(2, 20), _record(3, 30)])
        assert stats.mean_completion == pytest.approx(20.0)
        assert stats.std_completion == pytest.approx((200 / 3) ** 0.5)

    def test_timeouts_count_as_timeout(self):
        records = [_record(1, 10), _record(2, 100, coverage=0.9, completed=False)]
        stats = summarize_trials(records)
        assert stats.mean_completion == pytest.approx(55.0)
        assert stats.completion_rate == pytest.approx(0.5)
        assert stats.mean_coverage == pytest.approx(0.95)

    def test_keeps_records_and_seeds(self):
        records = [_record(5, 10), _record(6, 12)]
        stats = summarize_trials(records)
        assert stats.seeds == [5, 6]
        assert stats.records == records

    def test_recomputable_from_records(self):
        stats = summarize_trials([_record(1, 7), _record(2, 9), _record(3, 14)], condition="c")
        again = summarize_trials(stats.records, condition="c")
        assert again == stats


class TestTables:
    def test_stats_table_rows_in_order(self):
        a = summarize_trials([_record(1, 10)], condition="emac")
        b = summarize_trials([_record(1, 20)], condition="iql")
        table = stats_table("baseline", [a, b])
        assert table.columns == STATS_COLUMNS
        assert table.column("condition") == ["emac", "iql"]
        assert table.column("mean_completion") == [10.0, 20.0]

    def test_format_table(self):
        table = stats_table("t", [summarize_trials([_record(1, 10)], condition="x")])
        text = format_table(table)
        lines = text.splitlines()
        assert lines[0] == "\t".join(STATS_COLUMNS)
        assert lines[1].startswith("x\t10.0\t")
        assert text.endswith("\n")

    def test_custom_delimiter(self):
        table = stats_table("t", [summarize_trials([_record(1, 10)], condition="x")])
        assert format_table(table, delimiter=",").splitlines()[0].count(",") == 5

    def test_curve_table_merges_on_episode(self):
        curves = {
            "emac": [
                CurvePoint(episode=1, mean_length=50, mean_coverage=0.5),
                CurvePoint(episode=2, mean_length=40, mean_coverage=0.6, eval_mean_completion=35.0),
            ],
            "iql": [
                CurvePoint(episode=2, mean_length=45, mean_coverage=0.5, eval_mean_completion=48.0),
                CurvePoint(episode=4, mean_length=44, mean_coverage=0.6, eval_mean_completion=46.0),
            ],
        }
        table = curve_table(curves)
        assert table.columns == ["episode", "emac", "iql"]
        assert table.rows == [[2, 35.0, 48.0], [4, "", 46.0]]
