"""Per-agent reward computation (team terminal/progress + individual terms)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gridcover.core.config import RewardConfig
from gridcover.core.exceptions import CoverageInvariantError


@dataclass
class RewardVector:
    """Per-agent rewards, each of the five components kept separately."""

    terminal: np.ndarray
    progress: np.ndarray
    discovery: np.ndarray
    visitation: np.ndarray
    collision: np.ndarray

    @classmethod
    def zeros(cls, n_agents: int) -> RewardVector:
        return cls(*(np.zeros(n_agents) for _ in range(5)))

    @property
    def total(self) -> np.ndarray:
        return self.terminal + self.progress + self.discovery + self.visitation + self.collision

    def components(self, agent: int) -> dict[str, float]:
        return {
            "terminal": float(self.terminal[agent]),
            "progress": float(self.progress[agent]),
            "discovery": float(self.discovery[agent]),
            "visitation": float(self.visitation[agent]),
            "collision": float(self.collision[agent]),
        }

    def mask(self, keep: Sequence[bool]) -> None:
        """Zero every component of agents whose ``keep`` flag is False."""
        drop = ~np.asarray(keep, dtype=bool)
        for part in (self.terminal, self.progress, self.discovery, self.visitation, self.collision):
            part[drop] = 0.0


def compute_rewards(
    coverage_before: np.ndarray,
    coverage_after: np.ndarray,
    per_agent_new_cells: Sequence[int],
    collisions: Sequence[bool],
    done_by_coverage: bool,
    config: RewardConfig | None = None,
) -> RewardVector:
    """Five-term reward for every agent.

    r^i = [done]·R_term + β·(newly covered / M²) + [new_i > 0]·R_disc
          − [new_i == 0]·R_visit − [collided_i]·R_coll

    Raises:
        CoverageInvariantError: ``coverage_after`` lost a cell present before.
    """
    cfg = config or RewardConfig()
    if np.any(coverage_before & ~coverage_after):
        raise CoverageInvariantError("Coverage decreased between snapshots")

    n = len(per_agent_new_cells)
    new = np.asarray(per_agent_new_cells, dtype=np.int64)
    hit = np.asarray(collisions, dtype=bool)
    newly_covered = int(coverage_after.sum()) - int(coverage_before.sum())
    progress = cfg.progress_scale * newly_covered / coverage_after.size

    return RewardVector(
        terminal=np.full(n, cfg.terminal if done_by_coverage else 0.0),
        progress=np.full(n, progress),
        discovery=np.where(new > 0, cfg.discovery, 0.0),
        visitation=np.where(new == 0, -cfg.visitation_penalty, 0.0),
        collision=np.where(hit, -cfg.collision_penalty, 0.0),
    )
