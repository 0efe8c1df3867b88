"""Result tables, training curves and per-trial record files."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError as PydanticValidationError

from gridcover.core.constants import TABLE_DELIMITER
from gridcover.core.exceptions import PersistenceError
from gridcover.core.models import CurvePoint, ResultTable, TrialRecord, TrialStats
from gridcover.evaluation.aggregator import format_table

CURVE_COLUMNS = ["episode", "mean_length", "mean_coverage", "eval_mean_completion"]


def _prepare(path: str | Path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def write_table(table: ResultTable, path: str | Path) -> Path:
    out = _prepare(path)
    out.write_text(format_table(table), encoding="utf-8")
    return out


def write_trial_records(stats: Sequence[TrialStats], path: str | Path) -> Path:
    """One JSON line per trial, tagged with its condition."""
    out = _prepare(path)
    with out.open("w", encoding="utf-8") as fh:
        for s in stats:
            for record in s.records:
                fh.write(json.dumps({"condition": s.condition, **record.model_dump()}) + "\n")
    return out


def read_trial_records(path: str | Path) -> dict[str, list[TrialRecord]]:
    """Per-condition records, in file order."""
    grouped: dict[str, list[TrialRecord]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            condition = data.pop("condition")
            grouped.setdefault(condition, []).append(TrialRecord.model_validate(data))
        except (json.JSONDecodeError, KeyError, PydanticValidationError) as e:
            raise PersistenceError(f"Malformed trial record at line {lineno} of {path}") from e
    return grouped


def write_curve(points: Sequence[CurvePoint], path: str | Path) -> Path:
    """Tab-separated training curve; the eval column is blank between eval points."""
    out = _prepare(path)
    lines = [TABLE_DELIMITER.join(CURVE_COLUMNS)]
    for p in points:
        eval_col = "" if p.eval_mean_completion is None else f"{p.eval_mean_completion:.4f}"
        lines.append(
            TABLE_DELIMITER.join(
                [str(p.episode), f"{p.mean_length:.4f}", f"{p.mean_coverage:.6f}", eval_col]
            )
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_curve(path: str | Path) -> list[CurvePoint]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    points: list[CurvePoint] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        episode, length, coverage, eval_col = line.split(TABLE_DELIMITER)
        points.append(
            CurvePoint(
                episode=int(episode),
                mean_length=float(length),
                mean_coverage=float(coverage),
                eval_mean_completion=float(eval_col) if eval_col else None,
            )
        )
    return points
