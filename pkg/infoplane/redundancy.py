"""How much of I(X; H_T) is already carried by the preceding hidden states.

Computes I(X; H_T | H_{T-1}, ..., H_{T-k}) for growing k and picks the
shortest history after which the final state adds less than a threshold.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from estimators.gcmi import conditional_gcmi
from estimators.projection import max_dimension, principal_projection
from infoplane.plane import AnalysisConfig, check_probe
from nncore.records import LayerActivations
from utils.errors import ArtifactError, ContractError

logger = logging.getLogger(__name__)


@dataclass
class RedundancyReport:
    values: list[float]
    k_star: int
    threshold_bits: float
    k_max: int
    epoch: int
    layer: int
    flags: dict = field(default_factory=dict)

    @property
    def history(self) -> int:
        """Number of final states kept for the first-layer representation."""
        return self.k_star + 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RedundancyReport":
        return cls(**d)

    def write(self, path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        except OSError as exc:
            raise ArtifactError(f"could not write redundancy report ({exc})", path) from exc
        return path


def select_truncation(values, threshold_bits: float) -> int:
    """Smallest k (1-based) whose value is below the threshold, else the last k."""
    for k, value in enumerate(values, start=1):
        if value < threshold_bits:
            return k
    return len(values)


def _project_states(states: np.ndarray, dims: int) -> np.ndarray:
    """Project every timestep on one principal basis fitted to all timesteps."""
    n, steps, units = states.shape
    if units <= dims:
        return states
    stacked = states.reshape(n * steps, units)
    return principal_projection(stacked, dims).reshape(n, steps, dims)


def redundancy_truncation(
    records: list[LayerActivations],
    x: np.ndarray,
    threshold_bits: float = 3.0,
    k_max: int = 6,
    cfg: AnalysisConfig | None = None,
    epoch: int | None = None,
    layer: int = 1,
) -> RedundancyReport:
    """Conditional-MI sequence for k = 1..k_max on one layer's record (latest epoch by default)."""
    cfg = cfg or AnalysisConfig()
    est = cfg.estimator
    x, _ = check_probe(x)
    n = x.shape[0]
    candidates = [r for r in records if r.layer == layer and r.name.startswith("encoder")]
    if epoch is not None:
        candidates = [r for r in candidates if r.epoch == epoch]
    if not candidates:
        raise ContractError(f"no activation record for layer {layer}" + (f" at epoch {epoch}" if epoch is not None else ""))
    rec = max(candidates, key=lambda r: (r.epoch, r.phase))
    steps = rec.timesteps
    k_max = min(k_max, steps - 1)
    if k_max < 1:
        raise ContractError("redundancy analysis needs at least 2 timesteps")

    # X, H_T and up to k_max conditioning states share the sample budget
    budget = max_dimension(n, est.max_dim_ratio)
    dims = cfg.redundancy_dims or max(1, budget // (k_max + 2))
    if dims * (k_max + 2) > budget:
        logger.warning("redundancy joint width %d exceeds the %d-dim budget of %d samples",
                       dims * (k_max + 2), budget, n)
    states = _project_states(rec.states, dims)
    x_flat = x.reshape(n, -1)
    flags = {"projected_dims": dims, "samples": n}
    if x_flat.shape[1] > dims:
        x_flat = principal_projection(x_flat, dims)
        flags["x_projected_to"] = dims
    if rec.states.shape[2] > dims:
        flags["h_projected_to"] = dims

    h_final = states[:, -1]
    values = []
    for k in range(1, k_max + 1):
        history = states[:, steps - 1 - k : steps - 1].reshape(n, -1)
        values.append(conditional_gcmi(x_flat, h_final, history, bias_correct=est.bias_correct).bits)
    k_star = select_truncation(values, threshold_bits)
    logger.info("redundancy at epoch %d (%d dims per state): %s bits, k*=%d",
                rec.epoch, dims, [round(v, 3) for v in values], k_star)
    return RedundancyReport(
        values=values, k_star=k_star, threshold_bits=threshold_bits, k_max=k_max,
        epoch=rec.epoch, layer=layer, flags=flags,
    )
