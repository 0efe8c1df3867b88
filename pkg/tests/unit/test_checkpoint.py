"""Comprehensive tests for gridcover.io.checkpoint — binary model checkpoints."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from gridcover.agents.registry import build_model, create_policy
from gridcover.core.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from gridcover.core.exceptions import CheckpointArchitectureError, CheckpointError
from gridcover.core.models import Algorithm
from gridcover.io.checkpoint import encode_checkpoint, load_checkpoint, save_checkpoint
from tests.conftest import tiny_config


def _saved(tmp_path, algo="emac", config=None):
    config = config or tiny_config()
    model = build_model(algo, config, np.random.default_rng(3))
    path = save_checkpoint(model, tmp_path / f"{algo}.ckpt", config)
    return model, path, config


class TestRoundTrip:
    @pytest.mark.parametrize("algo", ["emac", "iql", "iac"])
    def test_parameters_exact(self, tmp_path, algo):
        model, path, config = _saved(tmp_path, algo)
        loaded = load_checkpoint(path, config)
        assert loaded.algorithm == Algorithm(algo)
        assert loaded.config_hash_matches
        original = dict(model.networks())
        for name, net in loaded.model.networks():
            for a, b in zip(net.parameters(), original[name].parameters(), strict=True):
                np.testing.assert_array_equal(a, b)

    def test_config_restored_without_given_config(self, tmp_path):
        _, path, config = _saved(tmp_path)
        loaded = load_checkpoint(path)
        assert loaded.config == config

    def test_magic_per_algorithm(self, tmp_path):
        _, path, _ = _saved(tmp_path, "iql")
        data = path.read_bytes()
        assert data[:4] == CHECKPOINT_MAGIC["iql"]
        assert struct.unpack_from("<H", data, 4)[0] == CHECKPOINT_VERSION

    def test_loaded_model_drives_policy(self, tmp_path, tiny_world):
        model, path, config = _saved(tmp_path)
        loaded = load_checkpoint(path, config)
        policy = create_policy(loaded.algorithm, loaded.model)
        assert policy.name == "emac"

    def test_encoding_deterministic(self):
        config = tiny_config()
        model = build_model("iac", config, np.random.default_rng(1))
        assert encode_checkpoint(model, config) == encode_checkpoint(model, config)

    def test_hash_mismatch_only_flagged(self, tmp_path):
        _, path, _ = _saved(tmp_path)
        other = tiny_config(training={"max_episodes": 99})
        loaded = load_checkpoint(path, other)
        assert not loaded.config_hash_matches


class TestErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "nope.ckpt")

    def test_bad_magic(self, tmp_path):
        _, path, _ = _saved(tmp_path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_unsupported_version(self, tmp_path):
        _, path, _ = _saved(tmp_path)
        data = bytearray(path.read_bytes())
        struct.pack_into("<H", data, 4, CHECKPOINT_VERSION + 1)
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    @pytest.mark.parametrize("keep", [10, 60, -4])
    def test_truncated(self, tmp_path, keep):
        _, path, _ = _saved(tmp_path)
        path.write_bytes(path.read_bytes()[:keep])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_trailing_bytes(self, tmp_path):
        _, path, _ = _saved(tmp_path)
        path.write_bytes(path.read_bytes() + b"\x00" * 4)
        with pytest.raises(CheckpointError, match="trailing"):
            load_checkpoint(path)

    def test_architecture_mismatch(self, tmp_path):
        _, path, _ = _saved(tmp_path)
        wider = tiny_config(network={"embed_dim": 16})
        with pytest.raises(CheckpointArchitectureError):
            load_checkpoint(path, wider)

    def test_architecture_error_is_checkpoint_error(self):
        assert issubclass(CheckpointArchitectureError, CheckpointError)
