"""Experiment sweeps: baseline comparison, scalability, robustness, heterogeneous teams.

Every sweep is a grid of named conditions, each a complete ``RunConfig``;
all conditions of one sweep are evaluated on the same evaluation seeds.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from gridcover.agents.base import TrainedModel
from gridcover.agents.nrl import NrlPolicy
from gridcover.agents.registry import build_model, create_policy
from gridcover.core.config import RunConfig
from gridcover.core.logging import get_logger
from gridcover.core.models import Algorithm, CurvePoint, ResultTable, TrialStats
from gridcover.evaluation.aggregator import curve_table, stats_table
from gridcover.evaluation.harness import eval_seeds, run_trials_sync
from gridcover.io.results import write_table, write_trial_records
from gridcover.training.common import EvalHook, TrainingResult, default_eval_hook
from gridcover.training.registry import train_algorithm

logger = get_logger(__name__)

Trainer = Callable[..., TrainingResult]
SweepKind = Literal["agents", "environment"]

BASELINE_ORDER = (Algorithm.EMAC, Algorithm.IAC, Algorithm.NRL, Algorithm.IQL)
UNTRAINED_CONDITION = "emac_untrained"


@dataclass(frozen=True)
class Condition:
    name: str
    config: RunConfig


@dataclass
class ExperimentGrid:
    """Named conditions of one sweep, in reporting order."""

    title: str
    conditions: list[Condition] = field(default_factory=list)

    def add(self, name: str, config: RunConfig) -> None:
        self.conditions.append(Condition(name, config))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.conditions]


@dataclass
class ExperimentResult:
    table: ResultTable
    stats: list[TrialStats]
    curves: ResultTable | None = None
    models: dict[str, TrainedModel] = field(default_factory=dict)

    def stat(self, condition: str) -> TrialStats:
        for s in self.stats:
            if s.condition == condition:
                return s
        raise KeyError(condition)


# ── Condition grids ──────────────────────────────────────────────────────────


def scaled_timeout(config: RunConfig, grid_size: int) -> int:
    """Timeout grown with area for grids larger than the configured one."""
    base = config.world.grid_size
    if grid_size <= base:
        return config.world.timeout
    return math.ceil(config.world.timeout * grid_size**2 / base**2)


def _resized(config: RunConfig, grid_size: int, sensor_k: Sequence[int]) -> RunConfig:
    return config.with_overrides(
        world={
            "grid_size": grid_size,
            "n_agents": len(sensor_k),
            "sensor_k": list(sensor_k),
            "timeout": scaled_timeout(config, grid_size),
        },
        disturbances={
            "dropout_min_agents": min(config.disturbances.dropout_min_agents, len(sensor_k))
        },
    )


def scalability_grid(config: RunConfig, kind: SweepKind) -> ExperimentGrid:
    ev = config.evaluation
    k = config.world.sensor_k[0]
    if kind == "agents":
        grid = ExperimentGrid("scalability_agents")
        for n in ev.scalability_agent_counts:
            grid.add(f"n={n}", _resized(config, ev.scalability_agent_grid, [k] * n))
    else:
        grid = ExperimentGrid("scalability_environment")
        for size in ev.scalability_grid_sizes:
            grid.add(f"M={size}", _resized(config, size, [k] * ev.scalability_grid_agents))
    return grid


def robustness_grid(config: RunConfig) -> ExperimentGrid:
    """Baseline plus one row per disturbance setting; every other knob unchanged."""
    ev = config.evaluation
    n = config.world.n_agents
    grid = ExperimentGrid("robustness")
    grid.add("baseline", config)
    for d in ev.robustness_dropout_counts:
        if n - d < 1:
            logger.warning("dropout_condition_skipped", dropped=d, agents=n)
            continue
        grid.add(
            f"dropout={d}",
            config.with_overrides(
                disturbances={
                    "dropout_prob": ev.robustness_dropout_prob,
                    "dropout_min_agents": n - d,
                }
            ),
        )
    for delay in ev.robustness_comm_delays:
        grid.add(f"delay={delay}", config.with_overrides(disturbances={"comm_delay_steps": delay}))
    for prob in ev.robustness_wind_probs:
        grid.add(f"wind={prob}", config.with_overrides(disturbances={"wind_prob": prob}))
    for size in ev.robustness_area_sizes:
        grid.add(f"area={size}", _resized(config, size, config.world.sensor_k))
    return grid


def composition_label(n_small: int, n_large: int) -> str:
    return "S" * n_small + "L" * n_large


def heterogeneous_grid(config: RunConfig) -> ExperimentGrid:
    """Every small/large mix for the team size, from all-small to all-large."""
    ev = config.evaluation
    size = ev.heterogeneous_team_size
    grid = ExperimentGrid("heterogeneous")
    for n_large in range(size + 1):
        ks = [ev.heterogeneous_small_k] * (size - n_large) + [ev.heterogeneous_large_k] * n_large
        label = composition_label(size - n_large, n_large)
        grid.add(label, _resized(config, ev.heterogeneous_grid, ks))
    return grid


# ── Sweeps ───────────────────────────────────────────────────────────────────


def _train(
    trainer: Trainer,
    algorithm: Algorithm,
    config: RunConfig,
    condition: str,
    *,
    eval_hook: EvalHook | None = None,
    checkpoint_dir: Path | None = None,
) -> TrainingResult:
    logger.info("condition_training", algorithm=algorithm.value, condition=condition)
    result = trainer(algorithm, config, eval_hook=eval_hook, checkpoint_dir=checkpoint_dir)
    if checkpoint_dir is not None:
        from gridcover.io.checkpoint import save_checkpoint

        save_checkpoint(result.model, checkpoint_dir / f"{condition}.ckpt", config)
    return result


def baseline_comparison(
    config: RunConfig,
    *,
    trainer: Trainer = train_algorithm,
    models: dict[Algorithm, TrainedModel] | None = None,
    n_trials: int | None = None,
    checkpoint_dir: Path | None = None,
) -> ExperimentResult:
    """EMAC, IAC, NRL and IQL on identical seeds, plus an untrained EMAC reference row.

    Learned algorithms missing from ``models`` are trained first; their
    training curves become the second result table.
    """
    models = dict(models or {})
    curves: dict[str, list[CurvePoint]] = {}
    for algo in BASELINE_ORDER:
        if algo is Algorithm.NRL or algo in models:
            continue
        result = _train(
            trainer,
            algo,
            config,
            algo.value,
            eval_hook=default_eval_hook(config),
            checkpoint_dir=checkpoint_dir,
        )
        models[algo] = result.model
        curves[algo.value] = result.curve

    seeds = eval_seeds(n_trials or config.evaluation.n_trials)
    stats: list[TrialStats] = []
    for algo in BASELINE_ORDER:
        policy = NrlPolicy() if algo is Algorithm.NRL else create_policy(algo, models[algo])
        stats.append(run_trials_sync(policy, config, seeds=seeds, condition=algo.value))
    untrained = build_model(Algorithm.EMAC, config, np.random.default_rng(config.seed))
    policy = create_policy(Algorithm.EMAC, untrained)
    stats.append(run_trials_sync(policy, config, seeds=seeds, condition=UNTRAINED_CONDITION))
    return ExperimentResult(
        table=stats_table("baseline_comparison", stats),
        stats=stats,
        curves=curve_table(curves) if curves else None,
        models={algo.value: model for algo, model in models.items()},
    )


def _train_and_evaluate(
    grid: ExperimentGrid,
    trainer: Trainer,
    n_trials: int | None,
    checkpoint_dir: Path | None,
) -> ExperimentResult:
    stats: list[TrialStats] = []
    models: dict[str, TrainedModel] = {}
    for cond in grid.conditions:
        model = _train(
            trainer, Algorithm.EMAC, cond.config, cond.name, checkpoint_dir=checkpoint_dir
        ).model
        models[cond.name] = model
        seeds = eval_seeds(n_trials or cond.config.evaluation.n_trials)
        policy = create_policy(Algorithm.EMAC, model)
        stats.append(run_trials_sync(policy, cond.config, seeds=seeds, condition=cond.name))
    return ExperimentResult(table=stats_table(grid.title, stats), stats=stats, models=models)


def scalability_sweep(
    config: RunConfig,
    kind: SweepKind,
    *,
    trainer: Trainer = train_algorithm,
    n_trials: int | None = None,
    checkpoint_dir: Path | None = None,
) -> ExperimentResult:
    """Train and evaluate EMAC per team size (``agents``) or grid size (``environment``)."""
    return _train_and_evaluate(scalability_grid(config, kind), trainer, n_trials, checkpoint_dir)


def robustness_sweep(
    model: TrainedModel,
    config: RunConfig,
    *,
    n_trials: int | None = None,
) -> ExperimentResult:
    """Evaluate one undisturbed-trained model under every disturbance condition.

    The same parameters and evaluation seeds serve every row, so a zero-valued
    disturbance reproduces the baseline row exactly.
    """
    grid = robustness_grid(config)
    seeds = eval_seeds(n_trials or config.evaluation.n_trials)
    policy = create_policy(model.algorithm, model)
    stats = [
        run_trials_sync(policy, cond.config, seeds=seeds, condition=cond.name)
        for cond in grid.conditions
    ]
    return ExperimentResult(table=stats_table(grid.title, stats), stats=stats)


def heterogeneous_experiment(
    config: RunConfig,
    *,
    trainer: Trainer = train_algorithm,
    n_trials: int | None = None,
    checkpoint_dir: Path | None = None,
) -> ExperimentResult:
    """Train EMAC once per small/large composition and evaluate each team."""
    return _train_and_evaluate(heterogeneous_grid(config), trainer, n_trials, checkpoint_dir)


def save_experiment(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    """Result table, per-trial records and (when present) the curve table."""
    out = Path(out_dir)
    title = result.table.title
    paths = [
        write_table(result.table, out / f"{title}.tsv"),
        write_trial_records(result.stats, out / f"{title}_trials.jsonl"),
    ]
    if result.curves is not None:
        paths.append(write_table(result.curves, out / f"{result.curves.title}.tsv"))
    logger.info("experiment_saved", title=title, files=[str(p) for p in paths])
    return paths
