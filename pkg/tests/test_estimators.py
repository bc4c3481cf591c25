import math
import warnings

import numpy as np
import pytest

from estimators import (
    BinningConfig,
    EstimatorConfig,
    MIEstimate,
    binning_mi,
    conditional_gcmi,
    copula_transform,
    entropy_bits,
    gcmi,
    guard_dimension,
    guard_pair,
    ib_lagrangian,
    kde_mi_label,
    plugin_discrete_mi,
)
from estimators.discrete import quantize_columns
from utils.errors import ConfigError, InsufficientSamplesError, ShapeError


def gaussian_pair(rho, n, rng):
    """Samples whose empirical covariance is exactly [[1, rho], [rho, 1]]."""
    raw = rng.standard_normal((n, 2))
    raw -= raw.mean(axis=0)
    white = raw @ np.linalg.inv(np.linalg.cholesky(np.cov(raw, rowvar=False))).T
    target = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    xy = white @ target.T
    return xy[:, :1], xy[:, 1:]


def gaussian_mi_bits(rho):
    return -0.5 * math.log2(1.0 - rho * rho)


# ---- plug-in and binning ----

def test_plugin_identical_uniform_symbols():
    x = np.repeat([0, 1, 2, 3], 25)
    assert plugin_discrete_mi(x, x).bits == 2.0


def test_plugin_independent_product_table():
    x, y = np.meshgrid(np.arange(4), np.arange(3), indexing="ij")
    assert plugin_discrete_mi(x.ravel(), y.ravel()).bits == 0.0


def test_plugin_small_table():
    # joint counts [[2, 1], [1, 2]]
    x = np.array([0, 0, 0, 1, 1, 1])
    y = np.array([0, 0, 1, 0, 1, 1])
    assert plugin_discrete_mi(x, y).bits == pytest.approx(0.0817, abs=1e-4)


def test_plugin_symmetry_and_bounds(rng):
    for _ in range(20):
        x = rng.integers(0, 5, size=200)
        y = (x + rng.integers(0, 3, size=200)) % 6
        a, b = plugin_discrete_mi(x, y), plugin_discrete_mi(y, x)
        assert a.bits == b.bits
        assert 0.0 <= a.bits <= min(entropy_bits(x), entropy_bits(y))


def test_plugin_data_processing_inequality(rng):
    for _ in range(50):
        x = rng.integers(0, 6, size=300)
        y = (x + rng.integers(0, 2, size=300)) % 6
        z = y // 2
        assert plugin_discrete_mi(x, z).bits <= plugin_discrete_mi(x, y).bits


def test_plugin_multicolumn_rows_are_symbols():
    x = np.array([[0, 1], [0, 1], [1, 0], [1, 0]])
    y = np.array([5, 5, 7, 7])
    assert plugin_discrete_mi(x, y).bits == 1.0


def test_entropy_of_constant_is_zero():
    assert entropy_bits(np.zeros(10)) == 0.0


def test_quantize_constant_column_single_bin():
    x = np.column_stack([np.linspace(0, 1, 11), np.full(11, 3.0)])
    idx = quantize_columns(x, BinningConfig(bins_per_dim=5))
    assert idx[:, 1].tolist() == [0] * 11
    assert idx[0, 0] == 0 and idx[-1, 0] == 4


def test_binning_fixed_range_validation():
    with pytest.raises(ConfigError):
        BinningConfig(range_rule="fixed")
    with pytest.raises(ConfigError):
        BinningConfig(bins_per_dim=1)


def test_binning_gaussian(rng):
    x, y = gaussian_pair(0.9, 100_000, rng)
    est = binning_mi(x, y, BinningConfig(bins_per_dim=30))
    assert est.estimator == "binning"
    assert est.bits == pytest.approx(gaussian_mi_bits(0.9), abs=0.1)


# ---- Gaussian copula ----

def test_copula_transform_ranks():
    out = copula_transform(np.array([1.0, 5.0, 9.0]))
    expected = [-0.6744897501960817, 0.0, 0.6744897501960817]
    np.testing.assert_allclose(out[:, 0], expected, atol=1e-12)


def test_copula_transform_needs_three_samples():
    with pytest.raises(InsufficientSamplesError):
        copula_transform(np.array([1.0, 2.0]))


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.9])
def test_gcmi_gaussian(rho):
    # seed-averaged so the 0.02-bit tolerance tests the estimator, not one draw
    cov = [[1.0, rho], [rho, 1.0]]
    estimates = []
    for seed in range(10):
        xy = np.random.default_rng(seed).multivariate_normal([0.0, 0.0], cov, size=10_000)
        estimates.append(gcmi(xy[:, :1], xy[:, 1:]).bits)
    assert np.mean(estimates) == pytest.approx(gaussian_mi_bits(rho), abs=0.02)


def test_gcmi_exact_covariance_fixture(rng):
    x, y = gaussian_pair(0.5, 10_000, rng)
    assert gcmi(x, y).bits == pytest.approx(gaussian_mi_bits(0.5), abs=0.02)


@pytest.mark.parametrize("seed", range(20))
def test_gcmi_invariant_under_monotone_maps(seed):
    rng = np.random.default_rng(seed)
    n, dx = 300 + 50 * (seed % 4), 1 + seed % 2
    x = rng.standard_normal((n, dx))
    y = np.tanh(x[:, :1]) + (0.2 + 0.1 * (seed % 3)) * rng.standard_normal((n, 1))
    base = gcmi(x, y).bits
    assert gcmi(np.exp(x), y).bits == pytest.approx(base, abs=1e-12)
    assert gcmi(x, np.log(y - y.min() + 1.0)).bits == pytest.approx(base, abs=1e-12)
    assert gcmi(x ** 3, y ** 3).bits == pytest.approx(base, abs=1e-12)


def test_gcmi_independent_near_zero(rng):
    x = rng.standard_normal((5000, 2))
    y = rng.standard_normal((5000, 1))
    assert abs(gcmi(x, y).bits) < 0.01


def test_gcmi_constant_side_is_degenerate(rng):
    est = gcmi(rng.standard_normal((100, 2)), np.ones((100, 1)))
    assert est.bits == 0.0
    assert est.config["degenerate"]


def test_gcmi_warns_when_undersampled(rng):
    x = rng.standard_normal((30, 3))
    y = rng.standard_normal((30, 3))
    with pytest.warns(RuntimeWarning):
        est = gcmi(x, y)
    assert est.config["undersampled"]


def test_gcmi_length_mismatch(rng):
    with pytest.raises(ShapeError):
        gcmi(rng.standard_normal(10), rng.standard_normal(11))


def test_conditional_gcmi_chain(rng):
    # X -> Z -> Y: X and Y are independent given Z
    n = 20_000
    x = rng.standard_normal((n, 1))
    z = x + 0.5 * rng.standard_normal((n, 1))
    y = z + 0.5 * rng.standard_normal((n, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cond = conditional_gcmi(x, y, z)
    assert abs(cond.bits) < 0.01
    assert gcmi(x, y).bits > 0.3


def test_conditional_gcmi_equals_mi_difference(rng):
    n = 3000
    z = rng.standard_normal((n, 1))
    x = z + rng.standard_normal((n, 1))
    y = x + z + rng.standard_normal((n, 1))
    cond = conditional_gcmi(x, y, z).bits
    diff = gcmi(x, np.hstack([y, z])).bits - gcmi(x, z).bits
    assert cond == pytest.approx(diff, abs=1e-9)


# ---- KDE label MI ----

def test_kde_separated_clusters_one_bit(rng):
    n = 400
    labels = np.repeat([0, 1], n // 2)
    centres = np.where(labels[:, None] == 0, 0.0, 10.0)
    t = centres + 0.1 * rng.standard_normal((n, 2))
    est = kde_mi_label(labels, t)
    assert est.bits == pytest.approx(1.0, abs=0.01)


def test_kde_shared_cluster_near_zero(rng):
    n = 2000
    labels = rng.integers(0, 2, size=n)
    t = rng.standard_normal((n, 2))
    assert abs(kde_mi_label(labels, t).bits) < 0.05


def test_kde_lower_bound_not_above_upper(rng):
    labels = rng.integers(0, 3, size=300)
    t = labels[:, None] + rng.standard_normal((300, 2))
    upper = kde_mi_label(labels, t, bound="upper").bits
    lower = kde_mi_label(labels, t, bound="lower").bits
    assert lower <= upper + 1e-9


def test_kde_single_label_is_zero(rng):
    est = kde_mi_label(np.zeros(50), rng.standard_normal((50, 3)))
    assert est.bits == 0.0


def test_kde_drops_singleton_labels(rng):
    labels = np.array([0] * 20 + [1] * 20 + [2])
    t = rng.standard_normal((41, 2))
    est = kde_mi_label(labels, t)
    assert est.config["excluded_labels"] == [2]
    assert est.config["n_samples"] == 40


def test_kde_identical_samples_degenerate():
    est = kde_mi_label(np.array([0, 0, 1, 1]), np.ones((4, 2)))
    assert est.bits == 0.0
    assert est.config["degenerate"]


def test_kde_subsample_is_seeded(rng):
    labels = rng.integers(0, 2, size=500)
    t = labels[:, None] + rng.standard_normal((500, 2))
    a = kde_mi_label(labels, t, max_samples=100, seed=7)
    b = kde_mi_label(labels, t, max_samples=100, seed=7)
    assert a.bits == b.bits
    assert a.config["subsampled"] == 100


# ---- guard, Lagrangian, result type ----

def test_guard_dimension(rng):
    x = rng.standard_normal((50, 12))
    out, flags = guard_dimension(x, ratio=0.1)
    assert out.shape == (50, 5)
    assert flags == {"projected_from": 12, "projected_to": 5}
    same, none = guard_dimension(x[:, :3], ratio=0.1)
    assert same.shape == (50, 3) and none == {}


def test_guard_pair_keeps_joint_width(rng):
    xs, ys, flags = guard_pair(rng.standard_normal((100, 20)), rng.standard_normal((100, 3)), ratio=0.1)
    assert xs.shape[1] + ys.shape[1] <= 10
    assert "x" in flags


def test_ib_lagrangian():
    assert ib_lagrangian(3.0, 1.5, 2.0) == 0.0
    with pytest.raises(ValueError):
        ib_lagrangian(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        ib_lagrangian(float("nan"), 1.0, 1.0)


def test_estimate_rejects_nonfinite():
    with pytest.raises(ValueError):
        MIEstimate(bits=float("inf"), estimator="gcmi")
    assert MIEstimate(bits=-0.2, estimator="gcmi").clamped == 0.0


def test_estimator_config_validation():
    with pytest.raises(ConfigError):
        EstimatorConfig(kde_bound="middle")
    with pytest.raises(ConfigError):
        EstimatorConfig(max_dim_ratio=0.0)
