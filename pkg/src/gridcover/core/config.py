"""Run configuration (YAML on disk, Pydantic in memory) and process settings.

``RunConfig`` holds every experiment knob with the documented defaults.
``Settings`` holds process-level options read from ``GRIDCOVER_*`` env vars.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from gridcover.core.constants import CONFIG_VERSION
from gridcover.core.exceptions import ConfigError
from gridcover.core.models import Activation, CollisionMode, EntropyMode, TripletForm


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


# ── Sections ─────────────────────────────────────────────────────────────────


class WorldConfig(_Section):
    grid_size: int = Field(default=16, ge=2)
    n_agents: int = Field(default=3, ge=1)
    sensor_k: list[int] = Field(default_factory=lambda: [7, 7, 7])
    obstacle_density: float = Field(default=0.10, ge=0.0, lt=1.0)
    timeout: int = Field(default=100, ge=1)
    collision_mode: CollisionMode = CollisionMode.NO_MOVE
    max_generation_attempts: int = Field(default=1000, ge=1)

    @field_validator("sensor_k")
    @classmethod
    def _odd_sensor(cls, value: list[int]) -> list[int]:
        for k in value:
            if k < 3 or k % 2 == 0:
                raise ValueError(f"sensor_k must be odd and >= 3, got {k}")
        return value

    @model_validator(mode="after")
    def _one_sensor_per_agent(self) -> WorldConfig:
        if len(self.sensor_k) != self.n_agents:
            raise ValueError(
                f"sensor_k lists {len(self.sensor_k)} agents but n_agents is {self.n_agents}"
            )
        return self


class RewardConfig(_Section):
    terminal: float = 10.0
    progress_scale: float = 1.0
    discovery: float = 0.1
    visitation_penalty: float = 0.05
    collision_penalty: float = 0.5


class DisturbanceConfig(_Section):
    """Environmental factors; a zero value disables the factor."""

    comm_delay_steps: int = Field(default=0, ge=0)
    dropout_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    dropout_min_agents: int = Field(default=1, ge=1)
    wind_prob: float = Field(default=0.0, ge=0.0, le=1.0)


class ObservationConfig(_Section):
    near_size: int = Field(default=5, ge=1)
    far_size: int = Field(default=8, ge=1)

    @field_validator("near_size")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"near_size must be odd, got {value}")
        return value


class NetworkConfig(_Section):
    embed_dim: int = Field(default=64, ge=1)
    actor_hidden: list[int] = Field(default_factory=lambda: [64, 64])
    critic_hidden: list[int] = Field(default_factory=lambda: [128, 128])
    q_hidden: list[int] = Field(default_factory=lambda: [64, 64])
    hidden_activation: Activation = Activation.TANH


class OptimizerConfig(_Section):
    lr: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    grad_clip: float = Field(default=5.0, gt=0.0)


class TrainingConfig(_Section):
    """Knobs shared by the three learners."""

    n_envs: int = Field(default=8, ge=1)
    gamma: float = Field(default=0.99, ge=0.0, lt=1.0)
    max_episodes: int = Field(default=15_000, ge=1)
    eval_interval: int = Field(default=100, ge=1)
    eval_trials: int = Field(default=40, ge=1)
    entropy_coeff: float = Field(default=0.01, ge=0.0)
    entropy_mode: EntropyMode = EntropyMode.FULL
    normalize_advantages: bool = False


class EmacConfig(_Section):
    triplet_margin: float = Field(default=0.2, ge=0.0)
    triplet_time_buffer: int = Field(default=5, ge=0)
    triplet_weight: float = Field(default=0.1, ge=0.0)
    triplet_form: TripletForm = TripletForm.HINGE
    actor_grad_to_encoder: bool = True


class IqlConfig(_Section):
    use_replay: bool = True
    replay_capacity: int = Field(default=50_000, ge=1)
    batch_size: int = Field(default=64, ge=1)
    epsilon_start: float = Field(default=1.0, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.05, ge=0.0, le=1.0)
    epsilon_anneal_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    target_sync_interval: int = Field(default=500, ge=1)


class EvaluationConfig(_Section):
    n_trials: int = Field(default=100, ge=1)
    collision_mode: CollisionMode = CollisionMode.DEACTIVATE
    # Robustness protocol
    robustness_dropout_counts: list[int] = Field(default_factory=lambda: [1, 2])
    robustness_dropout_prob: float = Field(default=0.05, ge=0.0, le=1.0)
    robustness_comm_delays: list[int] = Field(default_factory=lambda: [1, 2, 4])
    robustness_wind_probs: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.4])
    robustness_area_sizes: list[int] = Field(default_factory=lambda: [20, 24, 28, 32])
    # Scalability protocol
    scalability_agent_counts: list[int] = Field(default_factory=lambda: [2, 4, 8])
    scalability_agent_grid: int = Field(default=22, ge=2)
    scalability_grid_sizes: list[int] = Field(default_factory=lambda: [16, 20, 24, 28, 32])
    scalability_grid_agents: int = Field(default=3, ge=1)
    # Heterogeneous protocol
    heterogeneous_grid: int = Field(default=20, ge=2)
    heterogeneous_small_k: int = Field(default=7, ge=3)
    heterogeneous_large_k: int = Field(default=9, ge=3)
    heterogeneous_team_size: int = Field(default=3, ge=1)


# ── Root ─────────────────────────────────────────────────────────────────────


class RunConfig(_Section):
    version: int = CONFIG_VERSION
    seed: int = 0
    world: WorldConfig = Field(default_factory=WorldConfig)
    rewards: RewardConfig = Field(default_factory=RewardConfig)
    disturbances: DisturbanceConfig = Field(default_factory=DisturbanceConfig)
    observation: ObservationConfig = Field(default_factory=ObservationConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    emac: EmacConfig = Field(default_factory=EmacConfig)
    iql: IqlConfig = Field(default_factory=IqlConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)

    @model_validator(mode="after")
    def _cross_section(self) -> RunConfig:
        if self.version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {self.version}")
        if self.observation.far_size > 2 * self.world.grid_size:
            raise ValueError("observation.far_size must be <= 2 * world.grid_size")
        if self.disturbances.dropout_min_agents > self.world.n_agents:
            raise ValueError("disturbances.dropout_min_agents exceeds world.n_agents")
        return self

    def with_overrides(self, **sections: dict[str, Any]) -> RunConfig:
        """Return a validated copy with per-section field overrides.

        ``cfg.with_overrides(world={"grid_size": 12}, training={"n_envs": 2})``
        """
        data = self.model_dump(mode="json")
        for section, values in sections.items():
            if section not in data:
                raise ConfigError(f"Unknown config section: {section}", key=section)
            if isinstance(data[section], dict):
                data[section].update(values)
            else:
                data[section] = values
        return validate_config(data)


# ── Parsing / serialisation ──────────────────────────────────────────────────


def _error_key(exc: PydanticValidationError) -> str:
    first = exc.errors()[0]
    loc = [str(part) for part in first.get("loc", ()) if not isinstance(part, int)]
    if loc:
        return ".".join(loc)
    # model-level validators carry no loc; recover the key from the message
    message = str(first.get("msg", ""))
    for token in message.replace(",", " ").split():
        if "_" in token or "." in token:
            return token.strip("'\"")
    return ""


def validate_config(data: dict[str, Any]) -> RunConfig:
    """Validate a raw mapping into a RunConfig, raising ConfigError on failure."""
    try:
        return RunConfig.model_validate(data)
    except PydanticValidationError as e:
        key = _error_key(e)
        first = e.errors()[0]
        raise ConfigError(
            f"Invalid config value for '{key}': {first.get('msg', '')}",
            key=key,
            detail=str(e),
        ) from e


def parse_config(path: str | Path) -> RunConfig:
    """Load a YAML run configuration; missing keys take their defaults.

    Raises:
        ConfigError: Unknown key, type mismatch, or invariant violation.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Malformed config file {path}: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config root must be a mapping, got {type(data).__name__}")
    return validate_config(data)


def dump_config(config: RunConfig) -> str:
    """Serialise every field (defaults included) so that parsing it back is lossless."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config), encoding="utf-8")


def config_hash(config: RunConfig) -> bytes:
    """SHA-256 digest of the canonical JSON form."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).digest()


# ── Presets ──────────────────────────────────────────────────────────────────


def full_preset(seed: int = 0) -> RunConfig:
    """Full-scale protocol: 16×16 grid, 3 agents, k=7, 15,000 episodes."""
    return RunConfig(seed=seed)


def desk_preset(seed: int = 0) -> RunConfig:
    """Laptop-sized protocol used for acceptance runs."""
    return validate_config(
        {
            "seed": seed,
            "world": {"grid_size": 8, "n_agents": 2, "sensor_k": [5, 5], "timeout": 50},
            "training": {"n_envs": 4, "max_episodes": 3000},
            "evaluation": {
                "robustness_dropout_counts": [1],
                "robustness_area_sizes": [10, 12, 14, 16],
                "scalability_agent_counts": [2, 4],
                "scalability_agent_grid": 12,
                "scalability_grid_sizes": [8, 10, 12],
                "scalability_grid_agents": 2,
                "heterogeneous_grid": 12,
                "heterogeneous_small_k": 5,
                "heterogeneous_large_k": 7,
                "heterogeneous_team_size": 2,
            },
        }
    )


PRESETS = {"full": full_preset, "desk": desk_preset}


# ── Process settings ─────────────────────────────────────────────────────────


class Settings(BaseSettings):
    """Process settings loaded from environment variables.

    All env vars are prefixed with ``GRIDCOVER_`` and can be set via a ``.env`` file.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="GRIDCOVER_",
        case_sensitive=False,
    )

    log_level: str = "INFO"
    output_dir: Path = Path("runs")
    max_concurrent_trials: int = 4
    debug: bool = False


def get_settings() -> Settings:
    """Factory that creates a Settings instance."""
    return Settings()
