"""Surfaces over (epoch, timestep) for the first encoder layer's hidden states."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from estimators.gcmi import gcmi
from estimators.kde import kde_mi_label
from estimators.projection import guard_pair
from infoplane.plane import AnalysisConfig, check_probe
from nncore.records import LayerActivations
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

KINDS = ("i_ht_y", "i_x_h_prefix")


@dataclass(frozen=True)
class TemporalCurvePoint:
    kind: str
    epoch: int
    t: int
    value_bits: float
    phase: int = 1
    layer: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.t < 1:
            raise ValueError("t must be >= 1")


def _select(records, layer: int, epochs) -> list[LayerActivations]:
    chosen = [r for r in records if r.layer == layer and r.name.startswith("encoder")]
    if epochs is not None:
        wanted = set(epochs)
        chosen = [r for r in chosen if r.epoch in wanted]
    return sorted(chosen, key=lambda r: (r.phase, r.epoch))


def temporal_info_curve(
    records: list[LayerActivations],
    y: np.ndarray,
    tau: int = 5,
    epochs=None,
    cfg: AnalysisConfig | None = None,
    layer: int = 1,
) -> list[TemporalCurvePoint]:
    """I(H_t; y_tau) for every t and selected epoch."""
    cfg = cfg or AnalysisConfig()
    est = cfg.estimator
    y = np.asarray(y)
    if not 1 <= tau <= y.shape[1]:
        raise ConfigError(f"tau must be in 1..{y.shape[1]}, got {tau}")
    target = y[:, tau - 1]
    points = []
    for rec in _select(records, layer, epochs):
        for t in range(1, rec.timesteps + 1):
            value = kde_mi_label(
                target, rec.at(t), noise_variance=est.kde_noise_variance,
                relative_variance=est.kde_relative_variance, bound=est.kde_bound,
                max_samples=est.kde_max_samples, seed=cfg.seed,
            ).bits
            points.append(TemporalCurvePoint("i_ht_y", rec.epoch, t, value, rec.phase, rec.layer))
    return points


def temporal_compression_curve(
    records: list[LayerActivations],
    x: np.ndarray,
    epochs=None,
    cfg: AnalysisConfig | None = None,
    layer: int = 1,
) -> list[TemporalCurvePoint]:
    """I(X_1..X_t; H_1..H_t) for every prefix length t and selected epoch."""
    cfg = cfg or AnalysisConfig()
    est = cfg.estimator
    x, _ = check_probe(x)
    n = x.shape[0]
    points = []
    projected = 0
    for rec in _select(records, layer, epochs):
        for t in range(1, rec.timesteps + 1):
            xs, hs, flags = guard_pair(x[:, :t].reshape(n, -1), rec.states[:, :t].reshape(n, -1), est.max_dim_ratio)
            projected += bool(flags)
            value = gcmi(xs, hs, bias_correct=est.bias_correct).bits
            points.append(TemporalCurvePoint("i_x_h_prefix", rec.epoch, t, value, rec.phase, rec.layer))
    if projected:
        logger.info("dimensionality guard projected %d of %d prefix estimates", projected, len(points))
    return points
