"""Result aggregation — trial statistics and delimiter-separated tables."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from gridcover.core.constants import TABLE_DELIMITER
from gridcover.core.logging import get_logger
from gridcover.core.models import CurvePoint, ResultTable, TrialRecord, TrialStats

logger = get_logger(__name__)

STATS_COLUMNS = [
    "condition",
    "mean_completion",
    "std_completion",
    "mean_coverage",
    "completion_rate",
    "n_trials",
]


def summarize_trials(records: Sequence[TrialRecord], condition: str = "") -> TrialStats:
    """Aggregate per-trial records; timeouts count as the timeout value.

    The result keeps ``records`` so every statistic can be recomputed.
    """
    if not records:
        logger.warning("no_trials_to_summarize", condition=condition)
        return TrialStats(condition=condition)
    steps = np.array([r.completion_steps for r in records], dtype=np.float64)
    coverage = np.array([r.coverage for r in records], dtype=np.float64)
    return TrialStats(
        condition=condition,
        mean_completion=float(steps.mean()),
        std_completion=float(steps.std()),
        mean_coverage=float(min(coverage.mean(), 1.0)),
        completion_rate=sum(r.completed for r in records) / len(records),
        n_trials=len(records),
        seeds=[r.seed for r in records],
        records=list(records),
    )


def stats_table(title: str, stats: Sequence[TrialStats]) -> ResultTable:
    """One row per condition, in the given order."""
    table = ResultTable(title=title, columns=list(STATS_COLUMNS))
    for s in stats:
        table.add_row(
            s.condition,
            round(s.mean_completion, 3),
            round(s.std_completion, 3),
            round(s.mean_coverage, 4),
            round(s.completion_rate, 4),
            s.n_trials,
        )
    return table


def curve_table(curves: Mapping[str, Sequence[CurvePoint]]) -> ResultTable:
    """Merge per-algorithm curves on the episode axis (eval completion per column)."""
    names = list(curves)
    by_episode: dict[int, dict[str, float]] = {}
    for name, points in curves.items():
        for point in points:
            if point.eval_mean_completion is not None:
                by_episode.setdefault(point.episode, {})[name] = point.eval_mean_completion
    table = ResultTable(title="training_curves", columns=["episode", *names])
    for episode in sorted(by_episode):
        row = by_episode[episode]
        table.add_row(episode, *(round(row[n], 3) if n in row else "" for n in names))
    return table


def format_table(table: ResultTable, delimiter: str = TABLE_DELIMITER) -> str:
    """Header line then one line per row."""
    lines = [delimiter.join(table.columns)]
    lines.extend(delimiter.join(str(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"
