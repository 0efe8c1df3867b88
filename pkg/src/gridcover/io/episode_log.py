"""Line-delimited episode logs: one header record, then one record per step."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from gridcover.core.config import DisturbanceConfig, RewardConfig, WorldConfig
from gridcover.core.constants import EPISODE_LOG_VERSION
from gridcover.core.exceptions import EpisodeLogError
from gridcover.core.logging import get_logger
from gridcover.core.models import Action
from gridcover.sim.rewards import RewardVector
from gridcover.sim.world import StepInfo, World, generate_world, step

logger = get_logger(__name__)


class EpisodeHeader(BaseModel):
    """World summary needed to regenerate and draw the episode."""

    version: int = EPISODE_LOG_VERSION
    kind: Literal["header"] = "header"
    seed: int
    algorithm: str
    world: WorldConfig
    disturbances: DisturbanceConfig = Field(default_factory=DisturbanceConfig)
    rewards: RewardConfig = Field(default_factory=RewardConfig)
    obstacles: list[tuple[int, int]] = Field(default_factory=list)
    start_positions: list[tuple[int, int]]
    start_coverage: float = Field(ge=0.0, le=1.0)
    regions: list[list[int]] | None = None  # Voronoi underlay, NRL only


class AgentStep(BaseModel):
    position: tuple[int, int]
    action: int  # as chosen by the policy, before wind
    executed: int
    active: bool
    rewards: dict[str, float] = Field(default_factory=dict)


class StepRecord(BaseModel):
    kind: Literal["step"] = "step"
    t: int
    agents: list[AgentStep]
    coverage: float = Field(ge=0.0, le=1.0)


class EpisodeLog(BaseModel):
    header: EpisodeHeader
    steps: list[StepRecord] = Field(default_factory=list)

    @property
    def n_agents(self) -> int:
        return len(self.header.start_positions)

    @property
    def final_coverage(self) -> float:
        return self.steps[-1].coverage if self.steps else self.header.start_coverage

    def paths(self) -> list[list[tuple[int, int]]]:
        """Per agent: start cell followed by its position after every step."""
        paths = [[tuple(p)] for p in self.header.start_positions]
        for record in self.steps:
            for i, agent in enumerate(record.agents):
                paths[i].append(tuple(agent.position))
        return paths


class EpisodeRecorder:
    """Accumulates an EpisodeLog while an episode runs."""

    def __init__(
        self, world: World, algorithm: str, regions: np.ndarray | None = None
    ) -> None:
        obstacles = np.argwhere(world.terrain.obstacles)
        self.log = EpisodeLog(
            header=EpisodeHeader(
                seed=world.seed,
                algorithm=algorithm,
                world=world.config,
                disturbances=world.factors,
                rewards=world.rewards,
                obstacles=[(int(r), int(c)) for r, c in obstacles],
                start_positions=[a.position for a in world.agents],
                start_coverage=world.coverage_fraction,
                regions=None if regions is None else regions.tolist(),
            )
        )

    def record(
        self,
        world: World,
        actions: Sequence[Action],
        rewards: RewardVector,
        info: StepInfo,
    ) -> None:
        self.log.steps.append(
            StepRecord(
                t=world.t,
                agents=[
                    AgentStep(
                        position=agent.position,
                        action=int(actions[i]),
                        executed=int(info.executed_actions[i]),
                        active=agent.active,
                        rewards=rewards.components(i),
                    )
                    for i, agent in enumerate(world.agents)
                ],
                coverage=world.coverage_fraction,
            )
        )


# ── Files ────────────────────────────────────────────────────────────────────


def dump_episode_log(log: EpisodeLog) -> str:
    lines = [log.header.model_dump_json()]
    lines.extend(record.model_dump_json() for record in log.steps)
    return "\n".join(lines) + "\n"


def write_episode_log(log: EpisodeLog, path: str | Path) -> Path:
    """One file per episode."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_episode_log(log), encoding="utf-8")
    return out


def append_episode_log(log: EpisodeLog, path: str | Path) -> Path:
    """Append to a rolling multi-episode file."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("a", encoding="utf-8") as fh:
        fh.write(dump_episode_log(log))
    return out


def parse_episode_logs(text: str) -> list[EpisodeLog]:
    """Parse every episode in a (possibly rolling) log file.

    Raises:
        EpisodeLogError: malformed line, unsupported version, or steps before a header.
    """
    logs: list[EpisodeLog] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            if isinstance(data, dict) and data.get("kind") == "header":
                header = EpisodeHeader.model_validate(data)
                if header.version != EPISODE_LOG_VERSION:
                    raise EpisodeLogError(
                        f"Unsupported episode log version {header.version} (line {lineno})"
                    )
                logs.append(EpisodeLog(header=header))
            else:
                if not logs:
                    raise EpisodeLogError(f"Step record before any header (line {lineno})")
                logs[-1].steps.append(StepRecord.model_validate(data))
        except (json.JSONDecodeError, PydanticValidationError) as e:
            raise EpisodeLogError(f"Malformed episode log line {lineno}", detail=str(e)) from e
    return logs


def read_episode_log(path: str | Path) -> EpisodeLog:
    """Read a single-episode log file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise EpisodeLogError(f"Cannot read episode log {path}: {e}") from e
    logs = parse_episode_logs(text)
    if not logs:
        raise EpisodeLogError(f"Episode log {path} holds no episode")
    return logs[0]


# ── Replay ───────────────────────────────────────────────────────────────────


class ReplayReport(BaseModel):
    steps_checked: int
    first_divergence: int | None = None
    coverage: list[float] = Field(default_factory=list)

    @property
    def matches(self) -> bool:
        return self.first_divergence is None


def replay_episode(log: EpisodeLog) -> ReplayReport:
    """Re-run the logged actions through the simulator from the logged seed.

    Reports the first step index whose positions, active flags or coverage
    fraction differ from the log (``None`` when the replay is exact).
    """
    header = log.header
    world = generate_world(header.seed, header.world, header.disturbances, header.rewards)
    report = ReplayReport(steps_checked=0)
    if [a.position for a in world.agents] != [tuple(p) for p in header.start_positions]:
        report.first_divergence = 0
        return report
    for idx, record in enumerate(log.steps):
        world, _, _, _ = step(world, [Action(agent.action) for agent in record.agents])
        report.steps_checked = idx + 1
        report.coverage.append(world.coverage_fraction)
        same = (
            world.coverage_fraction == record.coverage
            and world.t == record.t
            and all(
                a.position == tuple(r.position) and a.active == r.active
                for a, r in zip(world.agents, record.agents, strict=True)
            )
        )
        if not same:
            report.first_divergence = idx
            logger.warning("replay_diverged", seed=header.seed, step=idx)
            break
    return report
