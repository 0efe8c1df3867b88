"""Command-line entry points: train, eval, bench, render, replay, gradcheck."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from gridcover.agents.base import TrainedModel
from gridcover.agents.registry import create_policy, get_algorithm_names
from gridcover.core.config import (
    PRESETS,
    RunConfig,
    Settings,
    get_settings,
    parse_config,
    save_config,
)
from gridcover.core.exceptions import ConfigError, EpisodeLogError, GridcoverError
from gridcover.core.logging import bind_run, clear_run, get_logger, setup_logging
from gridcover.core.models import Algorithm
from gridcover.evaluation.aggregator import format_table, stats_table
from gridcover.evaluation.bench import benchmark_simulator
from gridcover.evaluation.experiments import (
    ExperimentResult,
    baseline_comparison,
    heterogeneous_experiment,
    robustness_sweep,
    save_experiment,
    scalability_sweep,
)
from gridcover.evaluation.harness import run_trials_sync
from gridcover.io.checkpoint import load_checkpoint, save_checkpoint
from gridcover.io.episode_log import EpisodeLog, parse_episode_logs, replay_episode
from gridcover.io.render import render_paths
from gridcover.io.results import write_curve
from gridcover.training.common import default_eval_hook
from gridcover.training.gradcheck import SUITES, run_gradcheck
from gridcover.training.registry import get_trainable_names, train_algorithm

logger = get_logger(__name__)

Handler = Callable[[argparse.Namespace, Settings], int]

SWEEPS = ("trials", "baseline", "robustness", "agents", "environment", "heterogeneous")


# ── Shared helpers ───────────────────────────────────────────────────────────


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML run configuration")
    parser.add_argument(
        "--preset", choices=sorted(PRESETS), help="Built-in configuration (ignored with --config)"
    )
    parser.add_argument("--seed", type=int, help="Override the master seed")


def has_explicit_config(args: argparse.Namespace) -> bool:
    return args.config is not None or args.preset is not None


def resolve_config(args: argparse.Namespace, fallback: RunConfig | None = None) -> RunConfig:
    """Config from --config, else --preset, else ``fallback`` (defaults); --seed applied on top."""
    if args.config is not None:
        config = parse_config(args.config)
    elif args.preset is not None:
        config = PRESETS[args.preset](0)
    else:
        config = fallback or RunConfig()
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    return config


def _output_dir(args: argparse.Namespace, settings: Settings) -> Path:
    out = Path(args.out) if args.out else settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_logs(path: Path) -> list[EpisodeLog]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise EpisodeLogError(f"Cannot read episode log {path}: {e}") from e
    return parse_episode_logs(text)


def _select_episode(logs: list[EpisodeLog], index: int) -> EpisodeLog:
    try:
        return logs[index]
    except IndexError as e:
        message = f"Episode {index} not in log ({len(logs)} episodes)"
        raise ConfigError(message, key="episode") from e


# ── Commands ─────────────────────────────────────────────────────────────────


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    config = resolve_config(args)
    if args.episodes is not None:
        config = config.with_overrides(training={"max_episodes": args.episodes})
    out = _output_dir(args, settings)
    algo = Algorithm(args.algo)
    bind_run(algorithm=algo.value, seed=config.seed)

    episode_log = out / f"{algo.value}_episodes.jsonl"
    hook = None if args.no_eval else default_eval_hook(config, episode_log)
    result = train_algorithm(algo, config, eval_hook=hook, checkpoint_dir=out)

    checkpoint = save_checkpoint(result.model, out / f"{algo.value}.ckpt", config)
    curve = write_curve(result.curve, out / f"{algo.value}_curve.tsv")
    save_config(config, out / f"{algo.value}_config.yaml")
    print(f"checkpoint: {checkpoint}")
    print(f"curve: {curve}")
    if result.final_eval is not None:
        print(f"final eval mean completion: {result.final_eval:.2f}")
    return 0


def _config_and_model(args: argparse.Namespace) -> tuple[RunConfig, TrainedModel | None]:
    if args.checkpoint is None:
        return resolve_config(args), None
    explicit = resolve_config(args) if has_explicit_config(args) else None
    checkpoint = load_checkpoint(args.checkpoint, explicit)
    if checkpoint.algorithm.value != args.algo:
        raise ConfigError(
            f"Checkpoint holds '{checkpoint.algorithm.value}', not '{args.algo}'", key="algo"
        )
    return explicit or resolve_config(args, checkpoint.config), checkpoint.model


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    config, model = _config_and_model(args)
    out = _output_dir(args, settings)
    algo = Algorithm(args.algo)
    bind_run(algorithm=algo.value, sweep=args.sweep)
    needs_model = args.sweep in ("trials", "robustness") and algo is not Algorithm.NRL
    if needs_model and model is None:
        raise ConfigError(f"--checkpoint is required to evaluate '{algo.value}'", key="checkpoint")

    result: ExperimentResult
    if args.sweep == "trials":
        log_dir = out / "episodes" if args.log_episodes else None
        policy = create_policy(algo, model)
        stats = run_trials_sync(
            policy, config, n_trials=args.trials, condition=algo.value, log_dir=log_dir
        )
        result = ExperimentResult(table=stats_table(f"eval_{algo.value}", [stats]), stats=[stats])
    elif args.sweep == "robustness":
        if model is None:
            raise ConfigError("Robustness sweeps need a learned checkpoint", key="checkpoint")
        result = robustness_sweep(model, config, n_trials=args.trials)
    elif args.sweep == "baseline":
        models = {algo: model} if model is not None else None
        result = baseline_comparison(
            config, models=models, n_trials=args.trials, checkpoint_dir=out / "checkpoints"
        )
    elif args.sweep == "heterogeneous":
        result = heterogeneous_experiment(
            config, n_trials=args.trials, checkpoint_dir=out / "checkpoints"
        )
    else:
        result = scalability_sweep(
            config, args.sweep, n_trials=args.trials, checkpoint_dir=out / "checkpoints"
        )

    save_experiment(result, out)
    print(format_table(result.table), end="")
    return 0


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    config = resolve_config(args)
    result = benchmark_simulator(config, n_steps=args.steps, seed=config.seed)
    print(f"{result.steps} steps, {result.episodes} episodes, {result.seconds:.3f} s")
    print(f"steps/sec: {result.steps_per_second:.1f}")
    return 0


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    log = _select_episode(_read_logs(args.log), args.episode)
    render_paths(log, args.out, cell_px=args.cell_px)
    print(f"svg: {args.out}")
    return 0


def cmd_replay(args: argparse.Namespace, settings: Settings) -> int:
    log = _select_episode(_read_logs(args.log), args.episode)
    report = replay_episode(log)
    if report.matches:
        print(f"replay matches: {report.steps_checked} steps")
        return 0
    print(f"replay diverged at step {report.first_divergence}")
    return 1


def cmd_gradcheck(args: argparse.Namespace, settings: Settings) -> int:
    results = run_gradcheck(instances=args.instances, seed=args.seed, suites=args.suite)
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.name:<14} {r.instances:>3} instances  max rel error {r.max_error:.3e}  {status}")
    worst = max(r.max_error for r in results)
    print(f"max relative error: {worst:.3e}")
    return 0 if all(r.passed for r in results) else 1


# ── Parser ───────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcover", description="Multi-agent coverage path planning workbench"
    )
    parser.add_argument("--log-level", help="Overrides GRIDCOVER_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train a learned policy")
    train.add_argument("--algo", choices=get_trainable_names(), required=True)
    _add_config_args(train)
    train.add_argument("--episodes", type=int, help="Override training.max_episodes")
    train.add_argument("--out", help="Output directory (default: GRIDCOVER_OUTPUT_DIR)")
    train.add_argument(
        "--no-eval", action="store_true", help="Skip periodic greedy evaluation during training"
    )
    train.set_defaults(handler=cmd_train)

    ev = sub.add_parser("eval", help="Run evaluation trials or an experiment sweep")
    ev.add_argument("--algo", choices=get_algorithm_names(), default=Algorithm.EMAC.value)
    ev.add_argument("--checkpoint", type=Path, help="Trained model to evaluate")
    _add_config_args(ev)
    ev.add_argument("--sweep", choices=SWEEPS, default="trials")
    ev.add_argument("--trials", type=int, help="Override evaluation.n_trials")
    ev.add_argument("--out", help="Output directory (default: GRIDCOVER_OUTPUT_DIR)")
    ev.add_argument("--log-episodes", action="store_true", help="Write one log per trial")
    ev.set_defaults(handler=cmd_eval)

    bench = sub.add_parser("bench", help="Measure simulator steps per second")
    _add_config_args(bench)
    bench.add_argument("--steps", type=int, default=10_000)
    bench.set_defaults(handler=cmd_bench)

    render = sub.add_parser("render", help="Render an episode log as SVG flight paths")
    render.add_argument("--log", type=Path, required=True)
    render.add_argument("--out", type=Path, required=True)
    render.add_argument("--episode", type=int, default=-1, help="Episode index in a rolling log")
    render.add_argument("--cell-px", type=int, default=24)
    render.set_defaults(handler=cmd_render)

    replay = sub.add_parser("replay", help="Re-simulate an episode log and compare states")
    replay.add_argument("--log", type=Path, required=True)
    replay.add_argument("--episode", type=int, default=-1)
    replay.set_defaults(handler=cmd_replay)

    grad = sub.add_parser("gradcheck", help="Finite-difference checks of every analytic gradient")
    grad.add_argument("--instances", type=int, default=20)
    grad.add_argument("--seed", type=int, default=0)
    grad.add_argument("--suite", action="append", choices=sorted(SUITES))
    grad.set_defaults(handler=cmd_gradcheck)
    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Run one command; 0 on success, 1 on a domain error, 2 on a usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    settings = get_settings()
    handler: Handler = args.handler
    try:
        setup_logging(args.log_level or ("DEBUG" if settings.debug else settings.log_level))
        bind_run(command=args.command)
        return handler(args, settings)
    except GridcoverError as e:
        logger.error("command_failed", error=str(e), detail=e.detail)
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        clear_run()


def main() -> None:
    sys.exit(cli_main())
