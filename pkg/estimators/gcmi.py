"""Gaussian-copula mutual information.

Marginals are rank-transformed to standard normal, then the MI of the
resulting Gaussian model is read off the covariance through Cholesky factors.
Entropies are kept in nats without the additive constants, which cancel in
every MI combination, and converted to bits at the end.
"""
from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy import linalg, special, stats

from estimators.base import LN2, MIEstimate, as_samples, same_length
from utils.errors import InsufficientSamplesError

logger = logging.getLogger(__name__)

RIDGE = 1e-10
SAMPLES_PER_DIM = 10


def copula_transform(x) -> np.ndarray:
    """Per-column average ranks mapped through the standard normal quantile function."""
    arr = as_samples(x)
    n = arr.shape[0]
    if n < 3:
        raise InsufficientSamplesError(3, n, what="copula transform")
    ranks = stats.rankdata(arr, method="average", axis=0)
    return special.ndtri(ranks / (n + 1.0))


def _varying(arr: np.ndarray) -> np.ndarray:
    return arr[:, np.ptp(arr, axis=0) > 0]


def _entropy(cols: np.ndarray, bias_correct: bool, flags: dict) -> float:
    """Gaussian entropy of the given copula columns, up to the cancelling constant."""
    n, d = cols.shape
    if d == 0:
        return 0.0
    centered = cols - cols.mean(axis=0)
    cov = centered.T @ centered / (n - 1.0)
    try:
        chol = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        flags["ridge"] = RIDGE
        chol = linalg.cholesky(cov + RIDGE * np.eye(d), lower=True)
    h = float(np.sum(np.log(np.diagonal(chol))))
    if bias_correct:
        psiterms = special.psi((n - np.arange(1, d + 1)) / 2.0) / 2.0
        dterm = (LN2 - np.log(n - 1.0)) / 2.0
        h = h - d * dterm - float(psiterms.sum())
    return h


def _sample_guard(n: int, dims: int, flags: dict, what: str):
    if n < SAMPLES_PER_DIM * dims:
        msg = f"{what}: {n} samples for {dims} dimensions (recommended >= {SAMPLES_PER_DIM * dims})"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        logger.warning(msg)
        flags["undersampled"] = True


def gcmi(x, y, bias_correct: bool = True) -> MIEstimate:
    """I(X;Y) in bits under the Gaussian-copula model; a lower bound on the true MI."""
    xs, ys = as_samples(x, "x"), as_samples(y, "y")
    same_length(xs, ys)
    n = xs.shape[0]
    cx, cy = _varying(copula_transform(xs)), _varying(copula_transform(ys))
    flags: dict = {"n_samples": n, "dims_x": cx.shape[1], "dims_y": cy.shape[1], "bias_correct": bias_correct}
    if cx.shape[1] == 0 or cy.shape[1] == 0:
        flags["degenerate"] = True
        return MIEstimate(bits=0.0, estimator="gcmi", config=flags)
    _sample_guard(n, cx.shape[1] + cy.shape[1], flags, "gcmi")
    hx = _entropy(cx, bias_correct, flags)
    hy = _entropy(cy, bias_correct, flags)
    hxy = _entropy(np.hstack([cx, cy]), bias_correct, flags)
    return MIEstimate(bits=(hx + hy - hxy) / LN2, estimator="gcmi", config=flags)


def conditional_gcmi(x, y, z, bias_correct: bool = True) -> MIEstimate:
    """I(X;Y|Z) = H(XZ) + H(YZ) - H(XYZ) - H(Z), equal to I(X;Y,Z) - I(X;Z)."""
    xs, ys, zs = as_samples(x, "x"), as_samples(y, "y"), as_samples(z, "z")
    same_length(xs, ys, zs)
    n = xs.shape[0]
    cx, cy, cz = (_varying(copula_transform(a)) for a in (xs, ys, zs))
    flags: dict = {
        "n_samples": n, "dims_x": cx.shape[1], "dims_y": cy.shape[1], "dims_z": cz.shape[1],
        "bias_correct": bias_correct,
    }
    if cx.shape[1] == 0 or cy.shape[1] == 0:
        flags["degenerate"] = True
        return MIEstimate(bits=0.0, estimator="conditional_gcmi", config=flags)
    _sample_guard(n, cx.shape[1] + cy.shape[1] + cz.shape[1], flags, "conditional_gcmi")
    hz = _entropy(cz, bias_correct, flags)
    hxz = _entropy(np.hstack([cx, cz]), bias_correct, flags)
    hyz = _entropy(np.hstack([cy, cz]), bias_correct, flags)
    hxyz = _entropy(np.hstack([cx, cy, cz]), bias_correct, flags)
    return MIEstimate(bits=(hxz + hyz - hxyz - hz) / LN2, estimator="conditional_gcmi", config=flags)
