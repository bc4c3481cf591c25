"""Synthetic throughput traces with a known information structure.

A latent AR(1) state drives the observed features through a fixed random
linear map plus noise. The throughput at step t is a fixed readout of the
latent state averaged over the last ``label_window`` steps, so label
information accumulates over time inside a window. Every window is written
as its own run, in the same CSV layout as real traces.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from estimators.discrete import plugin_discrete_mi
from utils.errors import ArtifactError, ConfigError
from utils.load_data import DatasetSchema, fit_edges, quantize_throughput

logger = logging.getLogger(__name__)

LUMOS_FEATURES = (
    "latitude", "longitude", "movingSpeed", "compassDirection", "nrStatus", "lte_rssi",
    "lte_rsrp", "lte_rsrq", "lte_rssnr", "nr_ssRsrp", "nr_ssRsrq",
)


@dataclass
class SynthConfig:
    seed: int = 0
    n_windows: int = 5000
    timesteps: int = 20
    n_features: int = 11
    latent_dim: int = 4
    ar: float = 0.9
    noise: float = 0.1
    label_window: int = 5
    n_classes: int = 8
    shuffle_labels: bool = False

    def __post_init__(self):
        if self.noise < 0:
            raise ConfigError("noise must be >= 0")
        if not 0 <= self.ar < 1:
            raise ConfigError("ar must be in [0, 1)")
        if min(self.n_windows, self.timesteps, self.n_features, self.latent_dim, self.label_window) < 1:
            raise ConfigError("n_windows, timesteps, n_features, latent_dim and label_window must be >= 1")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def feature_names(self) -> tuple[str, ...]:
        if self.n_features == len(LUMOS_FEATURES):
            return LUMOS_FEATURES
        return tuple(f"f{k:02d}" for k in range(1, self.n_features + 1))

    def schema(self) -> DatasetSchema:
        return DatasetSchema(feature_columns=self.feature_names, timesteps=self.timesteps, n_classes=self.n_classes)


@dataclass
class SyntheticDataset:
    frame: pd.DataFrame
    config: SynthConfig
    readout: np.ndarray        # (n_windows, T) noiseless windowed latent readout
    mixing: np.ndarray         # (n_features, latent_dim)
    oracle_mi_bits: float

    def sidecar(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "schema": self.config.schema().to_dict(),
            "oracle": {
                "plugin_mi_bits": self.oracle_mi_bits,
                "description": "plug-in MI between the binned windowed latent readout and the label",
            },
        }

    def write(self, out_dir, stem: str = "dataset") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            self.frame.to_csv(csv_path, index=False)
            json_path.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True))
        except OSError as exc:
            raise ArtifactError(f"could not write dataset ({exc})", out_dir) from exc
        logger.info("wrote %d rows to %s", len(self.frame), csv_path)
        return csv_path, json_path


def _latent_paths(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """(n_windows, W - 1 + T, latent_dim) stationary AR(1) paths."""
    steps = cfg.label_window - 1 + cfg.timesteps
    state = rng.standard_normal((cfg.n_windows, cfg.latent_dim)) / np.sqrt(1.0 - cfg.ar ** 2)
    paths = np.empty((cfg.n_windows, steps, cfg.latent_dim))
    for t in range(steps):
        if t:
            state = cfg.ar * state + rng.standard_normal(state.shape)
        paths[:, t] = state
    return paths


def synth_generate(cfg: SynthConfig) -> SyntheticDataset:
    rng = np.random.default_rng(cfg.seed)
    mixing = rng.standard_normal((cfg.n_features, cfg.latent_dim)) / np.sqrt(cfg.latent_dim)
    weights = rng.standard_normal(cfg.latent_dim)
    weights /= np.linalg.norm(weights)

    paths = _latent_paths(cfg, rng)
    W, T = cfg.label_window, cfg.timesteps
    window_mean = np.stack([paths[:, t : t + W].mean(axis=1) for t in range(T)], axis=1)
    readout = window_mean @ weights                                   # (n, T)
    latent = paths[:, W - 1 :]                                        # (n, T, latent)
    features = latent @ mixing.T + cfg.noise * rng.standard_normal((cfg.n_windows, T, cfg.n_features))

    throughput = 100.0 + 25.0 * readout
    if cfg.shuffle_labels:
        throughput = throughput[rng.permutation(cfg.n_windows)]

    labels = quantize_throughput(throughput, cfg.n_classes, edges=fit_edges(throughput, cfg.n_classes))
    bins = np.digitize(readout, np.linspace(readout.min(), readout.max(), 2 * cfg.n_classes + 1)[1:-1])
    oracle = plugin_discrete_mi(bins.reshape(-1), labels.reshape(-1)).bits

    frame = pd.DataFrame(features.reshape(-1, cfg.n_features), columns=list(cfg.feature_names))
    frame.insert(0, "seq_num", np.tile(np.arange(T), cfg.n_windows))
    frame.insert(0, "run_num", np.repeat(np.arange(cfg.n_windows), T))
    frame["Throughput"] = throughput.reshape(-1)
    logger.info("generated %d windows, oracle plug-in MI %.3f bits", cfg.n_windows, oracle)
    return SyntheticDataset(frame=frame, config=cfg, readout=readout, mixing=mixing, oracle_mi_bits=oracle)
