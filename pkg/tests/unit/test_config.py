"""Comprehensive tests for gridcover.core.config — run configuration and settings."""

from __future__ import annotations

import os
from unittest.mock import patch

import pytest

from gridcover.core.config import (
    PRESETS,
    RunConfig,
    Settings,
    config_hash,
    desk_preset,
    dump_config,
    get_settings,
    full_preset,
    parse_config,
    save_config,
    validate_config,
)
from gridcover.core.exceptions import ConfigError
from gridcover.core.models import CollisionMode, EntropyMode, TripletForm


class TestRunConfigDefaults:
    """Documented defaults of every section."""

    def test_world_defaults(self):
        cfg = RunConfig()
        assert cfg.world.grid_size == 16
        assert cfg.world.n_agents == 3
        assert cfg.world.sensor_k == [7, 7, 7]
        assert cfg.world.obstacle_density == 0.10
        assert cfg.world.timeout == 100
        assert cfg.world.collision_mode is CollisionMode.NO_MOVE

    def test_reward_defaults(self):
        r = RunConfig().rewards
        assert (r.terminal, r.progress_scale, r.discovery) == (10.0, 1.0, 0.1)
        assert (r.visitation_penalty, r.collision_penalty) == (0.05, 0.5)

    def test_disturbances_disabled_by_default(self):
        d = RunConfig().disturbances
        assert d.comm_delay_steps == 0
        assert d.dropout_prob == 0.0
        assert d.wind_prob == 0.0

    def test_learning_defaults(self):
        cfg = RunConfig()
        assert cfg.training.gamma == 0.99
        assert cfg.training.n_envs == 8
        assert cfg.training.max_episodes == 15_000
        assert cfg.training.entropy_mode is EntropyMode.FULL
        assert cfg.optimizer.lr == 1e-3
        assert cfg.emac.triplet_margin == 0.2
        assert cfg.emac.triplet_form is TripletForm.HINGE
        assert cfg.network.embed_dim == 64

    def test_evaluation_defaults(self):
        ev = RunConfig().evaluation
        assert ev.n_trials == 100
        assert ev.collision_mode is CollisionMode.DEACTIVATE
        assert ev.robustness_wind_probs == [0.1, 0.2, 0.4]


class TestValidation:
    """Invariants enforced on load."""

    def test_even_sensor_rejected(self):
        with pytest.raises(ConfigError) as exc_info:
            validate_config({"world": {"n_agents": 1, "sensor_k": [4]}})
        assert exc_info.value.key == "world.sensor_k"

    def test_small_sensor_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"world": {"n_agents": 1, "sensor_k": [1]}})

    def test_sensor_count_must_match_agents(self):
        with pytest.raises(ConfigError):
            validate_config({"world": {"n_agents": 2, "sensor_k": [7, 7, 7]}})

    @pytest.mark.parametrize("size", [2, 4])
    def test_even_near_window_rejected(self, size):
        with pytest.raises(ConfigError) as exc_info:
            validate_config({"observation": {"near_size": size}})
        assert exc_info.value.key == "observation.near_size"

    def test_odd_near_window_accepted(self):
        assert validate_config({"observation": {"near_size": 1}}).observation.near_size == 1

    def test_density_upper_bound(self):
        with pytest.raises(ConfigError) as exc_info:
            validate_config({"world": {"obstacle_density": 1.0}})
        assert exc_info.value.key == "world.obstacle_density"

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as exc_info:
            validate_config({"world": {"grid_sise": 10}})
        assert "grid_sise" in exc_info.value.key

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"network_x": {}})

    def test_far_size_bound(self):
        world = {"grid_size": 4, "n_agents": 1, "sensor_k": [3]}
        with pytest.raises(ConfigError):
            validate_config({"world": world, "observation": {"far_size": 9}})

    def test_far_size_at_bound_allowed(self):
        world = {"grid_size": 4, "n_agents": 1, "sensor_k": [3]}
        cfg = validate_config({"world": world, "observation": {"far_size": 8}})
        assert cfg.observation.far_size == 8

    def test_dropout_floor_cannot_exceed_team(self):
        with pytest.raises(ConfigError):
            validate_config({"disturbances": {"dropout_min_agents": 4}})

    def test_wrong_version_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"version": 99})

    def test_type_mismatch(self):
        with pytest.raises(ConfigError):
            validate_config({"training": {"n_envs": "many"}})

    def test_assignment_is_validated(self):
        cfg = RunConfig()
        with pytest.raises(ValueError):
            cfg.training.gamma = 1.5


class TestOverrides:
    """with_overrides() returns validated copies."""

    def test_override_one_field(self):
        cfg = RunConfig().with_overrides(world={"timeout": 50})
        assert cfg.world.timeout == 50
        assert cfg.world.grid_size == 16

    def test_original_untouched(self):
        base = RunConfig()
        base.with_overrides(training={"n_envs": 2})
        assert base.training.n_envs == 8

    def test_override_top_level_scalar(self):
        assert RunConfig().with_overrides(seed=5).seed == 5

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as exc_info:
            RunConfig().with_overrides(bogus={"x": 1})
        assert exc_info.value.key == "bogus"

    def test_invalid_override_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig().with_overrides(world={"n_agents": 2})


class TestFiles:
    """YAML load and save."""

    def test_missing_keys_take_defaults(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("seed: 3\nworld:\n  grid_size: 12\n")
        cfg = parse_config(path)
        assert cfg.seed == 3
        assert cfg.world.grid_size == 12
        assert cfg.world.timeout == 100

    def test_empty_file_is_all_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert parse_config(path) == RunConfig()

    def test_round_trip_is_lossless(self, tmp_path):
        cfg = desk_preset(9)
        path = tmp_path / "desk.yaml"
        save_config(cfg, path)
        assert parse_config(path) == cfg

    def test_dump_includes_defaults(self):
        text = dump_config(RunConfig())
        assert "collision_penalty" in text
        assert "triplet_margin" in text

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("world: [unclosed\n")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_non_mapping_root(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            parse_config(path)


class TestConfigHash:
    def test_stable(self):
        assert config_hash(RunConfig()) == config_hash(RunConfig())

    def test_length(self):
        assert len(config_hash(RunConfig())) == 32

    def test_sensitive_to_values(self):
        assert config_hash(RunConfig()) != config_hash(RunConfig(seed=1))


class TestPresets:
    def test_registry(self):
        assert set(PRESETS) == {"full", "desk"}

    def test_full_is_defaults(self):
        assert full_preset(4) == RunConfig(seed=4)

    def test_desk_is_smaller(self):
        desk = desk_preset()
        assert desk.world.grid_size == 8
        assert desk.world.n_agents == 2
        assert desk.training.max_episodes < full_preset().training.max_episodes

    def test_desk_heterogeneous_sizes_are_odd(self):
        ev = desk_preset().evaluation
        assert ev.heterogeneous_small_k % 2 == 1
        assert ev.heterogeneous_large_k % 2 == 1


class TestSettings:
    """Tests for the process Settings model."""

    def test_defaults(self):
        s = Settings()
        assert s.log_level == "INFO"
        assert s.max_concurrent_trials == 4
        assert s.debug is False
        assert str(s.output_dir) == "runs"

    def test_env_prefix(self):
        env = {"GRIDCOVER_LOG_LEVEL": "DEBUG", "GRIDCOVER_MAX_CONCURRENT_TRIALS": "2"}
        with patch.dict(os.environ, env, clear=False):
            s = get_settings()
        assert s.log_level == "DEBUG"
        assert s.max_concurrent_trials == 2

    def test_output_dir_from_env(self, tmp_path):
        with patch.dict(os.environ, {"GRIDCOVER_OUTPUT_DIR": str(tmp_path)}, clear=False):
            s = Settings()
        assert s.output_dir == tmp_path

    def test_get_settings_returns_fresh_instance(self):
        assert get_settings() is not get_settings()
