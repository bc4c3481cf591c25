from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from utils.errors import ConfigError, InsufficientSamplesError, ShapeError

LN2 = math.log(2.0)
ESTIMATORS = ("binning", "plugin", "kde", "gcmi", "conditional_gcmi")


@dataclass(frozen=True)
class MIEstimate:
    bits: float
    estimator: str
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if not math.isfinite(self.bits):
            raise ValueError(f"{self.estimator} produced a non-finite estimate")

    @property
    def clamped(self) -> float:
        """Non-negative value for plotting; ``bits`` itself is never clamped."""
        return max(0.0, self.bits)

    def to_dict(self) -> dict:
        return {"estimator": self.estimator, "bits": self.bits, "config": self.config}


@dataclass
class BinningConfig:
    bins_per_dim: int = 30
    range_rule: str = "min-max"
    value_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.bins_per_dim < 2:
            raise ConfigError("bins_per_dim must be >= 2")
        if self.range_rule not in ("min-max", "fixed"):
            raise ConfigError(f"range_rule must be 'min-max' or 'fixed', got {self.range_rule!r}")
        if self.range_rule == "fixed":
            if self.value_range is None or not self.value_range[0] < self.value_range[1]:
                raise ConfigError("fixed range rule needs value_range=(low, high) with low < high")
            self.value_range = tuple(float(v) for v in self.value_range)


@dataclass
class EstimatorConfig:
    """Estimator settings shared by the cascade verifier and the information-plane analysis."""

    bins: int = 30
    kde_relative_variance: float = 0.1
    kde_noise_variance: float | None = None
    kde_bound: str = "upper"
    kde_max_samples: int = 2000
    bias_correct: bool = True
    # dimensionality guard: representations wider than ratio * n are projected
    max_dim_ratio: float = 0.1

    def __post_init__(self):
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if self.kde_bound not in ("upper", "lower"):
            raise ConfigError("kde_bound must be 'upper' or 'lower'")
        if not 0 < self.max_dim_ratio <= 1:
            raise ConfigError("max_dim_ratio must be in (0, 1]")
        if self.kde_relative_variance <= 0:
            raise ConfigError("kde_relative_variance must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def as_samples(x, name: str = "x", min_samples: int = 2) -> np.ndarray:
    """Coerce to an (n_samples, n_dims) float matrix and check the SampleMatrix invariants."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"sample matrix {name}", ("n", "d"), arr.shape)
    if arr.shape[0] < min_samples:
        raise InsufficientSamplesError(min_samples, arr.shape[0], what=f"sample matrix {name}")
    if np.isnan(arr).any():
        raise ValueError(f"sample matrix {name} contains NaN")
    return arr


def same_length(*arrays):
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        raise ShapeError("sample matrices", (arrays[0].shape[0],), tuple(a.shape[0] for a in arrays))
