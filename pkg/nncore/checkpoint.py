"""JSON checkpoints: topology, parameter tensors and freeze flags (format_version 1).

Floats are written with ``repr`` precision, so a save/load cycle is bit-exact.
"""
from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from nncore.layers import DenseLayer, LSTMLayer, Parameter
from nncore.network import EncoderDecoder
from utils.errors import ArtifactError, ConfigError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def _param_dict(p: Parameter) -> dict:
    return {"name": p.name, "shape": list(p.shape), "frozen": p.frozen, "values": p.value.ravel().tolist()}


def _param_from(d: dict) -> Parameter:
    values = np.asarray(d["values"], dtype=np.float64).reshape(d["shape"])
    return Parameter(values, name=d.get("name", ""), frozen=bool(d["frozen"]))


def _dense_dict(layer: DenseLayer) -> dict:
    return {"kind": "dense", "activation": layer.activation,
            "weights": _param_dict(layer.weights), "bias": _param_dict(layer.bias)}


def _dense_from(d: dict) -> DenseLayer:
    return DenseLayer(weights=_param_from(d["weights"]), bias=_param_from(d["bias"]), activation=d["activation"])


def _lstm_dict(layer: LSTMLayer) -> dict:
    return {"kind": "lstm", "cells": layer.cells, "n_in": layer.n_in,
            "W": _param_dict(layer.W), "U": _param_dict(layer.U), "b": _param_dict(layer.b)}


def _lstm_from(d: dict) -> LSTMLayer:
    return LSTMLayer(W=_param_from(d["W"]), U=_param_from(d["U"]), b=_param_from(d["b"]))


def network_to_dict(net: EncoderDecoder) -> dict:
    return {
        "timesteps": net.timesteps,
        "n_features": net.n_features,
        "encoder": [_lstm_dict(layer) for layer in net.encoder],
        "entry": _dense_dict(net.entry) if net.entry is not None else None,
        "head": [_dense_dict(layer) for layer in net.head],
    }


def network_from_dict(d: dict) -> EncoderDecoder:
    return EncoderDecoder(
        encoder=[_lstm_from(x) for x in d["encoder"]],
        head=[_dense_from(x) for x in d["head"]],
        timesteps=int(d["timesteps"]),
        n_features=int(d["n_features"]),
        entry=_dense_from(d["entry"]) if d.get("entry") else None,
    )


def save_checkpoint(net: EncoderDecoder, path, extra: dict | None = None) -> Path:
    path = Path(path)
    payload = {"format_version": FORMAT_VERSION, "network": network_to_dict(net), "extra": extra or {}}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True))
    except OSError as exc:
        raise ArtifactError(f"could not write checkpoint ({exc})", path) from exc
    logger.info("checkpoint written to %s", path)
    return path


def load_checkpoint(path) -> tuple[EncoderDecoder, dict]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ArtifactError("checkpoint not found", path) from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"unreadable checkpoint ({exc})", path) from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint format_version {version!r} in {path}")
    return network_from_dict(payload["network"]), payload.get("extra", {})


def parameter_checksum(params) -> str:
    """sha256 over the raw bytes of the given parameters, in order."""
    digest = hashlib.sha256()
    for p in params:
        digest.update(p.name.encode())
        digest.update(np.ascontiguousarray(p.value).tobytes())
    return digest.hexdigest()
