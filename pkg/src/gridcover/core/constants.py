"""Constants and mappings used across the application."""

from __future__ import annotations

# ── Actions (row, col) displacement; row grows southward ─────────────────────

NUM_ACTIONS: int = 9

ACTION_DELTAS: tuple[tuple[int, int], ...] = (
    (-1, 0),   # N
    (-1, 1),   # NE
    (0, 1),    # E
    (1, 1),    # SE
    (1, 0),    # S
    (1, -1),   # SW
    (0, -1),   # W
    (-1, -1),  # NW
    (0, 0),    # NoMove
)

# Compass order of the eight movement actions; ring neighbours are wind targets.
COMPASS_RING_SIZE: int = 8

# ── Observation encoding ─────────────────────────────────────────────────────

OFF_MAP_TERRAIN: float = 1.0  # reads as obstacle
OFF_MAP_VISITED: float = 1.0  # reads as already covered

# ── Formats ──────────────────────────────────────────────────────────────────

CONFIG_VERSION: int = 1
CHECKPOINT_VERSION: int = 1
EPISODE_LOG_VERSION: int = 1
TABLE_DELIMITER: str = "\t"

CHECKPOINT_MAGIC: dict[str, bytes] = {
    "emac": b"EMAC",
    "iql": b"IQL_",
    "iac": b"IAC_",
}

# Fixed path palette, one colour per agent slot (wraps past eight agents)
PATH_PALETTE: tuple[str, ...] = (
    "#e6194b",
    "#3cb44b",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#42d4f4",
    "#f032e6",
    "#9a6324",
)

# ── Seeds ────────────────────────────────────────────────────────────────────

# Training worlds draw seeds below this bound; evaluation seeds start at EVAL_SEED_BASE.
TRAIN_SEED_LIMIT: int = 2**30
EVAL_SEED_BASE: int = 2**31

# ── Finite-difference verification ───────────────────────────────────────────

GRADCHECK_EPSILON: float = 1e-3
GRADCHECK_TOLERANCE: float = 1e-4
GRADCHECK_DENOM_FLOOR: float = 1e-6
