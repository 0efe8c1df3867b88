"""Domain exception hierarchy.

All exceptions inherit from ``GridcoverError`` so callers can catch broadly
or narrowly as needed.  The CLI maps these to exit codes.
"""

from __future__ import annotations


class GridcoverError(Exception):
    """Base exception for all Gridcover errors."""

    def __init__(self, message: str = "", *, detail: str = "") -> None:
        self.detail = detail or message
        super().__init__(message)


# ── Configuration ────────────────────────────────────────────────────────────


class ConfigError(GridcoverError):
    """A configuration file or value failed validation."""

    def __init__(self, message: str = "", *, key: str = "", detail: str = "") -> None:
        self.key = key
        super().__init__(message, detail=detail)


# ── Simulation ───────────────────────────────────────────────────────────────


class SimulationError(GridcoverError):
    """Error raised by the gridworld simulator."""


class WorldGenerationError(SimulationError):
    """No valid world could be generated for the requested configuration."""


class ContractViolationError(SimulationError):
    """A caller broke an operation's precondition."""


class ShapeError(ContractViolationError):
    """Array dimensions do not match what a network or buffer expects."""


class CoverageInvariantError(SimulationError):
    """Coverage shrank between two snapshots."""


# ── Planning ─────────────────────────────────────────────────────────────────


class PlanningError(GridcoverError):
    """Error in the classical coverage planner."""


class NoPathError(PlanningError):
    """No Free-cell path connects the requested cells."""


class PartitionError(PlanningError):
    """Voronoi seeds are invalid (duplicated or off the Free set)."""


# ── Training ─────────────────────────────────────────────────────────────────


class TrainingError(GridcoverError):
    """Error during policy training."""


class DivergenceError(TrainingError):
    """A loss or gradient became non-finite."""

    def __init__(self, message: str = "", *, checkpoint_path: str | None = None) -> None:
        self.checkpoint_path = checkpoint_path
        detail = f"Diagnostic checkpoint at {checkpoint_path}" if checkpoint_path else ""
        super().__init__(message, detail=detail)


# ── Evaluation ───────────────────────────────────────────────────────────────


class TrialError(GridcoverError):
    """An evaluation trial raised; the whole evaluation is void."""

    def __init__(self, message: str = "", *, seed: int, failed: int = 1) -> None:
        self.seed = seed
        self.failed = failed
        super().__init__(message, detail=f"{failed} failed trial(s), first at seed {seed}")


# ── Persistence ──────────────────────────────────────────────────────────────


class PersistenceError(GridcoverError):
    """Error reading or writing an artifact."""


class CheckpointError(PersistenceError):
    """Checkpoint file is malformed, truncated, or from another format version."""


class CheckpointArchitectureError(CheckpointError):
    """Checkpoint networks do not match the expected architecture."""


class EpisodeLogError(PersistenceError):
    """Episode log is malformed."""
