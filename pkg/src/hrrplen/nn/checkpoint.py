"""Model checkpointing: config plus flat buffers in declaration order."""

from __future__ import annotations

import json

import numpy as np

from .model import Model, ModelConfig

FORMAT_VERSION = 1


def save_checkpoint(model: Model, path, extra: dict | None = None) -> None:
    """Write a .npz holding the model config, parameters, and running stats.

    ``extra`` is an optional JSON-safe dict for caller metadata (e.g. input
    preprocessing settings); it round-trips through :func:`load_checkpoint`.
    """
    arrays = {
        "version": np.int64(FORMAT_VERSION),
        "config_json": np.frombuffer(
            json.dumps(model.config.to_dict()).encode(), dtype=np.uint8
        ),
        "extra_json": np.frombuffer(json.dumps(extra or {}).encode(), dtype=np.uint8),
    }
    for i, tensor in enumerate(model.parameters()):
        arrays[f"param_{i:04d}"] = tensor.data
    for i, arr in enumerate(model.state_arrays()):
        arrays[f"state_{i:04d}"] = arr
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[Model, dict]:
    """Rebuild a model from a checkpoint; evaluation output is bit-identical
    to the saved model's."""
    with np.load(path) as data:
        version = int(data["version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        config = ModelConfig.from_dict(json.loads(bytes(data["config_json"]).decode()))
        extra = json.loads(bytes(data["extra_json"]).decode())
        model = Model(config)
        for i, tensor in enumerate(model.parameters()):
            saved = data[f"param_{i:04d}"]
            if saved.shape != tensor.data.shape:
                raise ValueError(f"checkpoint param {i} shape mismatch")
            tensor.data = saved.copy()
        states = []
        i = 0
        while f"state_{i:04d}" in data:
            states.append(data[f"state_{i:04d}"].copy())
            i += 1
        model.load_state_arrays(states)
    return model, extra
