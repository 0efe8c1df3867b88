"""Policy registry — discovery and instantiation of coverage policies."""

from __future__ import annotations

import numpy as np

from gridcover.agents.base import CoveragePolicy, TrainedModel
from gridcover.agents.emac import EmacModel, EmacPolicy, build_emac_model
from gridcover.agents.iac import IacPolicy, IacTeam, build_iac_team
from gridcover.agents.iql import IqlPolicy, IqlTeam, build_iql_team
from gridcover.agents.nrl import NrlPolicy
from gridcover.core.config import RunConfig
from gridcover.core.exceptions import ConfigError
from gridcover.core.models import Algorithm
from gridcover.nn.dense import DenseNet

# All available policy classes
POLICY_CLASSES: dict[Algorithm, type[CoveragePolicy]] = {
    Algorithm.EMAC: EmacPolicy,
    Algorithm.IQL: IqlPolicy,
    Algorithm.IAC: IacPolicy,
    Algorithm.NRL: NrlPolicy,
}

MODEL_CLASSES: dict[Algorithm, type] = {
    Algorithm.EMAC: EmacModel,
    Algorithm.IQL: IqlTeam,
    Algorithm.IAC: IacTeam,
}


def create_policy(algorithm: Algorithm | str, model: TrainedModel | None = None) -> CoveragePolicy:
    """Instantiate the policy for ``algorithm``.

    Args:
        algorithm: Registered algorithm name.
        model: Trained parameters; required for every learned policy.

    Raises:
        ConfigError: Unknown algorithm, or a learned policy without a model.
    """
    try:
        algo = Algorithm(algorithm)
    except ValueError as e:
        raise ConfigError(f"Unknown algorithm: {algorithm}", key="algo") from e
    if algo is Algorithm.NRL:
        return NrlPolicy()
    if model is None:
        raise ConfigError(f"Policy '{algo.value}' needs a trained model", key="algo")
    if not isinstance(model, MODEL_CLASSES[algo]):
        raise ConfigError(
            f"Model of type {type(model).__name__} does not drive '{algo.value}'", key="algo"
        )
    return POLICY_CLASSES[algo](model)


def get_algorithm_names() -> list[str]:
    """Get the names of all registered algorithms."""
    return [algo.value for algo in POLICY_CLASSES]


def build_model(
    algorithm: Algorithm | str, config: RunConfig, rng: np.random.Generator
) -> TrainedModel:
    """Freshly initialised parameters for a learned algorithm."""
    algo = Algorithm(algorithm)
    if algo is Algorithm.EMAC:
        return build_emac_model(config, rng)
    if algo is Algorithm.IQL:
        return build_iql_team(config, rng)
    if algo is Algorithm.IAC:
        return build_iac_team(config, rng)
    raise ConfigError(f"'{algo.value}' has no trainable parameters", key="algo")


def model_from_networks(
    algorithm: Algorithm | str, nets: dict[str, DenseNet], config: RunConfig
) -> TrainedModel:
    """Reassemble a model from named networks (as stored in a checkpoint)."""
    algo = Algorithm(algorithm)
    if algo is Algorithm.EMAC:
        return EmacModel.from_networks(nets)
    if algo is Algorithm.IQL:
        return IqlTeam.from_networks(nets, config)
    if algo is Algorithm.IAC:
        return IacTeam.from_networks(nets, config)
    raise ConfigError(f"'{algo.value}' has no trainable parameters", key="algo")
