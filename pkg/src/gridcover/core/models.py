"""Domain models shared across all Gridcover modules.

Enums name every discrete choice in the system.  Records that cross a
persistence or reporting boundary are Pydantic models; hot-path simulator
state lives in dataclasses next to the code that mutates it.
"""

from __future__ import annotations

from enum import IntEnum, StrEnum
from typing import Any

from pydantic import BaseModel, Field

from gridcover.core.constants import ACTION_DELTAS, COMPASS_RING_SIZE

# ── Enums ────────────────────────────────────────────────────────────────────


class Action(IntEnum):
    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7
    NO_MOVE = 8

    @property
    def delta(self) -> tuple[int, int]:
        return ACTION_DELTAS[self.value]

    @property
    def is_movement(self) -> bool:
        return self is not Action.NO_MOVE

    def ring_neighbors(self) -> tuple[Action, Action]:
        """The two compass neighbours (clockwise, counter-clockwise)."""
        if not self.is_movement:
            raise ValueError("NoMove has no compass neighbours")
        return (
            Action((self.value + 1) % COMPASS_RING_SIZE),
            Action((self.value - 1) % COMPASS_RING_SIZE),
        )

    @classmethod
    def from_delta(cls, drow: int, dcol: int) -> Action:
        return cls(ACTION_DELTAS.index((drow, dcol)))


class CollisionMode(StrEnum):
    NO_MOVE = "no_move"
    DEACTIVATE = "deactivate"


class Algorithm(StrEnum):
    EMAC = "emac"
    IQL = "iql"
    IAC = "iac"
    NRL = "nrl"


class Activation(StrEnum):
    RELU = "relu"
    TANH = "tanh"
    IDENTITY = "identity"


class TripletForm(StrEnum):
    HINGE = "hinge"
    SOFT = "soft"


class EntropyMode(StrEnum):
    FULL = "full"        # Σ_u π(u) log π(u)
    SAMPLED = "sampled"  # π(u_t) log π(u_t) at the taken action


# ── Evaluation records ──────────────────────────────────────────────────────


class TrialRecord(BaseModel):
    """Outcome of one evaluation episode."""

    seed: int
    completion_steps: int = Field(ge=0)
    coverage: float = Field(ge=0.0, le=1.0)
    completed: bool


class TrialStats(BaseModel):
    """Aggregate over trials of one condition; recomputable from ``records``."""

    condition: str = ""
    mean_completion: float = 0.0
    std_completion: float = 0.0
    mean_coverage: float = Field(ge=0.0, le=1.0, default=0.0)
    completion_rate: float = Field(ge=0.0, le=1.0, default=0.0)
    n_trials: int = 0
    seeds: list[int] = Field(default_factory=list)
    records: list[TrialRecord] = Field(default_factory=list)

    @property
    def stats(self) -> dict[str, Any]:
        """Quick stats for logging."""
        return {
            "condition": self.condition,
            "n_trials": self.n_trials,
            "mean_completion": round(self.mean_completion, 3),
            "mean_coverage": round(self.mean_coverage, 4),
        }


class CurvePoint(BaseModel):
    """One row of a training curve."""

    episode: int
    mean_length: float
    mean_coverage: float
    eval_mean_completion: float | None = None


class ResultTable(BaseModel):
    """A delimiter-separated result table (one per experiment)."""

    title: str
    columns: list[str]
    rows: list[list[str | int | float]] = Field(default_factory=list)

    def add_row(self, *values: str | int | float) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list[str | int | float]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

