"""Information plane: I(X;H) against I(H;Y) per layer and recorded epoch."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from estimators.base import BinningConfig, EstimatorConfig
from estimators.discrete import binning_mi
from estimators.gcmi import gcmi
from estimators.kde import kde_mi_label
from estimators.projection import guard_pair
from nncore.records import LayerActivations
from utils.errors import ConfigError, InsufficientSamplesError, ShapeError

logger = logging.getLogger(__name__)

MIN_PROBE_SAMPLES = 20


@dataclass
class AnalysisConfig:
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    tau: int = 5
    # label timestep used on the plane; None means the last timestep
    plane_tau: int | None = None
    plane_estimator: str = "gcmi"
    threshold_bits: float = 3.0
    k_max: int = 6
    # per-state width for the redundancy sequence; None sizes it from the probe budget
    redundancy_dims: int | None = None
    truncate_first_layer: bool = True
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.estimator, dict):
            self.estimator = EstimatorConfig(**self.estimator)
        if self.plane_estimator not in ("gcmi", "binning"):
            raise ConfigError("plane_estimator must be 'gcmi' or 'binning'")
        if self.tau < 1 or (self.plane_tau is not None and self.plane_tau < 1):
            raise ConfigError("tau must be >= 1")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.redundancy_dims is not None and self.redundancy_dims < 1:
            raise ConfigError("redundancy_dims must be >= 1")

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator.to_dict(),
            "tau": self.tau,
            "plane_tau": self.plane_tau,
            "plane_estimator": self.plane_estimator,
            "threshold_bits": self.threshold_bits,
            "k_max": self.k_max,
            "redundancy_dims": self.redundancy_dims,
            "truncate_first_layer": self.truncate_first_layer,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InfoPlanePoint:
    phase: int
    epoch: int
    layer: int
    i_xh_bits: float
    i_yh_bits: float


def check_probe(x: np.ndarray, y: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError("probe inputs", ("N", "T", "D"), x.shape)
    if x.shape[0] < MIN_PROBE_SAMPLES:
        raise InsufficientSamplesError(MIN_PROBE_SAMPLES, x.shape[0], what="information-plane analysis")
    if y is not None:
        y = np.asarray(y)
        if y.shape != x.shape[:2]:
            raise ShapeError("probe labels", x.shape[:2], y.shape)
    return x, y


def layer_representation(record: LayerActivations, history: int | None = None) -> np.ndarray:
    """What the plane measures for a layer.

    Encoder layers are represented by their final state, except the first
    layer, whose last ``history`` states are concatenated (all of them when
    None). Decoder layers use every timestep.
    """
    states = record.states
    n = states.shape[0]
    if record.name.startswith("decoder"):
        return states.reshape(n, -1)
    if record.layer == 1:
        keep = states.shape[1] if history is None else min(history, states.shape[1])
        return states[:, -keep:].reshape(n, -1)
    return record.final


def compute_plane(
    records: list[LayerActivations],
    x: np.ndarray,
    y: np.ndarray,
    cfg: AnalysisConfig | None = None,
    first_layer_history: int | None = None,
) -> list[InfoPlanePoint]:
    """One point per (phase, layer, epoch) record, sorted by layer series then epoch."""
    cfg = cfg or AnalysisConfig()
    est = cfg.estimator
    x, y = check_probe(x, y)
    n = x.shape[0]
    tau = x.shape[1] if cfg.plane_tau is None else cfg.plane_tau
    if tau > x.shape[1]:
        raise ConfigError(f"plane_tau {tau} exceeds window length {x.shape[1]}")
    y_tau = y[:, tau - 1]
    x_flat = x.reshape(n, -1)

    points = []
    for rec in sorted(records, key=lambda r: (r.phase, r.layer, r.epoch)):
        if rec.states.shape[0] != n:
            raise ShapeError(f"record {rec.name} epoch {rec.epoch}", (n,), (rec.states.shape[0],))
        h = layer_representation(rec, first_layer_history if cfg.truncate_first_layer else None)
        if cfg.plane_estimator == "binning":
            i_xh = binning_mi(x_flat, h, BinningConfig(bins_per_dim=est.bins)).bits
        else:
            xs, hs, flags = guard_pair(x_flat, h, est.max_dim_ratio)
            if flags:
                logger.debug("plane %s epoch %d projected: %s", rec.name, rec.epoch, flags)
            i_xh = gcmi(xs, hs, bias_correct=est.bias_correct).bits
        i_yh = kde_mi_label(
            y_tau, h, noise_variance=est.kde_noise_variance, relative_variance=est.kde_relative_variance,
            bound=est.kde_bound, max_samples=est.kde_max_samples, seed=cfg.seed,
        ).bits
        points.append(InfoPlanePoint(rec.phase, rec.epoch, rec.layer, i_xh, i_yh))
    logger.info("computed %d information-plane points", len(points))
    return points
