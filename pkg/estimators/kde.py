"""Label MI through pairwise-distance bounds on the entropy of a Gaussian mixture.

Each sample of T is the centre of an isotropic Gaussian with variance ``var``.
The mixture entropy is bounded with the KL divergence between components
(upper bound) or the Bhattacharyya distance (lower bound). The per-component
entropy is the same for H(T) and every H(T|y), so only the pairwise terms
survive in I(Y;T) = H(T) - sum_y p(y) H(T|y).
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from estimators.base import LN2, MIEstimate, as_samples
from utils.errors import ShapeError

logger = logging.getLogger(__name__)

_SCALE = {"upper": 2.0, "lower": 8.0}


def _pairwise_term(dist: np.ndarray, var: float, bound: str) -> float:
    """Mixture entropy minus the component entropy, in nats."""
    n = dist.shape[0]
    lprobs = logsumexp(-dist / (_SCALE[bound] * var), axis=1) - math.log(n)
    return -float(np.mean(lprobs))


def kde_mi_label(
    y,
    t,
    noise_variance: float | None = None,
    relative_variance: float = 0.1,
    bound: str = "upper",
    max_samples: int | None = None,
    seed: int = 0,
) -> MIEstimate:
    """I(Y;T) in bits for discrete labels ``y`` and continuous activations ``t``."""
    if bound not in _SCALE:
        raise ValueError(f"bound must be 'upper' or 'lower', got {bound!r}")
    labels = np.asarray(y).reshape(-1)
    ts = as_samples(t, "t")
    if labels.size != ts.shape[0]:
        raise ShapeError("labels vs samples", (ts.shape[0],), (labels.size,))
    config: dict = {"bound": bound, "relative_variance": relative_variance}
    if max_samples is not None and ts.shape[0] > max_samples:
        keep = np.sort(np.random.default_rng(seed).choice(ts.shape[0], size=max_samples, replace=False))
        labels, ts = labels[keep], ts[keep]
        config["subsampled"] = int(max_samples)

    classes, counts = np.unique(labels, return_counts=True)
    dropped = classes[counts < 2]
    if dropped.size:
        config["excluded_labels"] = dropped.tolist()
        logger.warning("kde_mi_label: labels %s have fewer than 2 samples and are excluded", dropped.tolist())
        mask = np.isin(labels, dropped, invert=True)
        labels, ts = labels[mask], ts[mask]
        classes = classes[counts >= 2]
    config["n_samples"] = int(ts.shape[0])
    config["n_labels"] = int(classes.size)
    if classes.size <= 1:
        return MIEstimate(bits=0.0, estimator="kde", config=config)

    dist = cdist(ts, ts, "sqeuclidean")
    n = ts.shape[0]
    var = noise_variance
    if var is None:
        var = relative_variance * float(dist.sum()) / (n * (n - 1))
    config["noise_variance"] = float(var)
    if var <= 0:
        # every sample identical: T carries nothing about Y
        config["degenerate"] = True
        return MIEstimate(bits=0.0, estimator="kde", config=config)

    h_t = _pairwise_term(dist, var, bound)
    h_t_given_y = math.fsum(
        (np.count_nonzero(labels == c) / n) * _pairwise_term(dist[np.ix_(labels == c, labels == c)], var, bound)
        for c in classes
    )
    return MIEstimate(bits=(h_t - h_t_given_y) / LN2, estimator="kde", config=config)
