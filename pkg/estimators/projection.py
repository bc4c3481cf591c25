"""Dimensionality guard for representations too wide for the available samples."""
from __future__ import annotations

import logging
import math

import numpy as np

from estimators.base import as_samples

logger = logging.getLogger(__name__)


def max_dimension(n_samples: int, ratio: float = 0.1) -> int:
    return max(1, math.floor(ratio * n_samples))


def principal_projection(x: np.ndarray, k: int) -> np.ndarray:
    """Scores on the top-``k`` principal directions, signs fixed by the largest loading."""
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    vt = vt[:k]
    pivot = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), pivot])
    signs[signs == 0] = 1.0
    return centered @ (vt * signs[:, None]).T


def guard_dimension(x, ratio: float = 0.1) -> tuple[np.ndarray, dict]:
    """Project ``x`` onto its leading principal directions when dim > ratio * n.

    Returns the (possibly unchanged) matrix and a flag dict, empty when the
    guard did not activate.
    """
    arr = as_samples(x)
    n, d = arr.shape
    limit = max_dimension(n, ratio)
    if d <= limit:
        return arr, {}
    logger.debug("projecting %d dims to %d for %d samples", d, limit, n)
    return principal_projection(arr, limit), {"projected_from": d, "projected_to": limit}


def guard_pair(x, y, ratio: float = 0.1) -> tuple[np.ndarray, np.ndarray, dict]:
    """Guard both sides of a pairwise estimate so their joint width stays within ratio * n."""
    xs, fx = guard_dimension(x, ratio / 2)
    ys, fy = guard_dimension(y, ratio / 2)
    flags = {}
    if fx:
        flags["x"] = fx
    if fy:
        flags["y"] = fy
    return xs, ys, flags
