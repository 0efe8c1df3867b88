"""Binary checkpoints.

Layout (little-endian)::

    magic        4 bytes   b"EMAC" | b"IQL_" | b"IAC_"
    version      uint16
    config hash  32 bytes  SHA-256 of the canonical config JSON
    desc length  uint32
    descriptor   UTF-8 JSON: algorithm, config, per-network layer shapes
    parameters   float32 arrays W0, b0, W1, b1, ... per network, in declaration order
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from gridcover.agents.base import TrainedModel
from gridcover.agents.registry import build_model, model_from_networks
from gridcover.core.config import RunConfig, config_hash, validate_config
from gridcover.core.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from gridcover.core.exceptions import CheckpointArchitectureError, CheckpointError, ConfigError
from gridcover.core.logging import get_logger
from gridcover.core.models import Activation, Algorithm
from gridcover.nn.dense import DenseLayer, DenseNet

logger = get_logger(__name__)

_HEADER = struct.Struct("<4sH32sI")
_FLOAT = np.dtype("<f4")


@dataclass
class Checkpoint:
    algorithm: Algorithm
    model: TrainedModel
    config: RunConfig
    config_hash_matches: bool = True


def _architecture(model: TrainedModel) -> list[dict[str, Any]]:
    return [
        {"name": name, "layers": [list(layer) for layer in net.architecture()]}
        for name, net in model.networks()
    ]


def encode_checkpoint(model: TrainedModel, config: RunConfig) -> bytes:
    algorithm = Algorithm(model.algorithm)
    descriptor = json.dumps(
        {
            "algorithm": algorithm.value,
            "config": config.model_dump(mode="json"),
            "networks": _architecture(model),
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    header = _HEADER.pack(
        CHECKPOINT_MAGIC[algorithm.value], CHECKPOINT_VERSION, config_hash(config), len(descriptor)
    )
    chunks = [header, descriptor]
    for _, net in model.networks():
        chunks.extend(np.ascontiguousarray(p, dtype=_FLOAT).tobytes() for p in net.parameters())
    return b"".join(chunks)


def save_checkpoint(model: TrainedModel, path: str | Path, config: RunConfig) -> Path:
    """Write ``model`` with the config it was trained under."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(encode_checkpoint(model, config))
    logger.info("checkpoint_saved", path=str(out), algorithm=str(model.algorithm))
    return out


def _read_networks(
    descriptor: dict[str, Any], payload: bytes, path: str
) -> dict[str, DenseNet]:
    nets: dict[str, DenseNet] = {}
    offset = 0
    for spec in descriptor["networks"]:
        layers: list[DenseLayer] = []
        for fan_in, fan_out, activation in spec["layers"]:
            arrays = []
            for shape in ((fan_out, fan_in), (fan_out,)):
                count = int(np.prod(shape))
                end = offset + count * _FLOAT.itemsize
                if end > len(payload):
                    raise CheckpointError(f"Checkpoint {path} is truncated")
                arrays.append(
                    np.frombuffer(payload, dtype=_FLOAT, count=count, offset=offset)
                    .astype(np.float32)
                    .reshape(shape)
                )
                offset = end
            layers.append(DenseLayer(arrays[0], arrays[1], Activation(activation)))
        nets[spec["name"]] = DenseNet(layers)
    if offset != len(payload):
        raise CheckpointError(f"Checkpoint {path} has {len(payload) - offset} trailing bytes")
    return nets


def load_checkpoint(path: str | Path, config: RunConfig | None = None) -> Checkpoint:
    """Load a checkpoint, optionally checking it against ``config``.

    A config-hash mismatch is only logged; a network shape mismatch with the
    architecture ``config`` implies is an error.

    Raises:
        CheckpointError: bad magic, unsupported version, truncation.
        CheckpointArchitectureError: stored shapes differ from ``config``'s.
    """
    source = str(path)
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {source}: {e}") from e
    if len(data) < _HEADER.size:
        raise CheckpointError(f"Checkpoint {source} is truncated")
    magic, version, stored_hash, desc_len = _HEADER.unpack_from(data)
    by_magic = {v: k for k, v in CHECKPOINT_MAGIC.items()}
    if magic not in by_magic:
        raise CheckpointError(f"Bad checkpoint magic {magic!r} in {source}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} in {source}")
    desc_end = _HEADER.size + desc_len
    if desc_end > len(data):
        raise CheckpointError(f"Checkpoint {source} is truncated")
    try:
        descriptor = json.loads(data[_HEADER.size : desc_end].decode("utf-8"))
        stored_config = validate_config(descriptor["config"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, ConfigError) as e:
        raise CheckpointError(f"Corrupt checkpoint descriptor in {source}") from e

    algorithm = Algorithm(by_magic[magic])
    nets = _read_networks(descriptor, data[desc_end:], source)

    matches = True
    if config is not None:
        matches = config_hash(config) == stored_hash
        if not matches:
            logger.warning("config_hash_mismatch", path=source)
        expected = _architecture(build_model(algorithm, config, np.random.default_rng(0)))
        if expected != descriptor["networks"]:
            raise CheckpointArchitectureError(
                f"Checkpoint {source} architecture does not match the given config"
            )

    model = model_from_networks(algorithm, nets, config or stored_config)
    return Checkpoint(
        algorithm=algorithm,
        model=model,
        config=stored_config,
        config_hash_matches=matches,
    )
