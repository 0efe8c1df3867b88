"""Trainer registry — one training entry point per learned algorithm."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

from gridcover.core.config import RunConfig
from gridcover.core.exceptions import ConfigError
from gridcover.core.models import Algorithm
from gridcover.training import emac_trainer, iac_trainer, iql_trainer
from gridcover.training.common import EvalHook, TrainingResult

Trainer = Callable[..., TrainingResult]

# All available trainers
TRAINERS: dict[Algorithm, Trainer] = {
    Algorithm.EMAC: emac_trainer.train,
    Algorithm.IQL: iql_trainer.train,
    Algorithm.IAC: iac_trainer.train,
}


def get_trainable_names() -> list[str]:
    return [algo.value for algo in TRAINERS]


def train_algorithm(
    algorithm: Algorithm | str,
    config: RunConfig,
    *,
    eval_hook: EvalHook | None = None,
    checkpoint_dir: Path | None = None,
) -> TrainingResult:
    """Train ``algorithm`` under ``config``.

    Raises:
        ConfigError: Unknown or non-trainable algorithm.
        DivergenceError: A loss or gradient became non-finite.
    """
    try:
        algo = Algorithm(algorithm)
    except ValueError as e:
        raise ConfigError(f"Unknown algorithm: {algorithm}", key="algo") from e
    if algo not in TRAINERS:
        raise ConfigError(f"'{algo.value}' is not trainable", key="algo")
    return TRAINERS[algo](config, eval_hook=eval_hook, checkpoint_dir=checkpoint_dir)
