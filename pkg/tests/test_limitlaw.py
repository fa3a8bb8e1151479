"""Tests for the one-dimensional limit law of the Sum and Product statistics."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

import oracles
from deepeast.errors import InputError, InvalidAlpha, QuadratureNonConvergence
from deepeast.limitlaw import (
    CRAIG,
    Quadrature,
    finite_sample_quantiles,
    limit_density,
    limit_quantile,
    limit_quantile_table,
    sample_limit,
)


@pytest.fixture(scope="module")
def sum_draws():
    return sample_limit("sum", 1_000_000, seed=0)


@pytest.fixture(scope="module")
def product_draws():
    return sample_limit("product", 1_000_000, seed=0)


def test_limit_constants():
    assert CRAIG.var_z2 == pytest.approx(2 / (math.sqrt(3) * math.pi))
    assert CRAIG.cov_z1z2 == pytest.approx(-1 / math.pi)
    assert CRAIG.var_z3 == pytest.approx(1 / 12)
    assert CRAIG.det > 0


def test_sum_moments(sum_draws):
    # E(-Z1 Z2) = -cov and Var(Z1 Z2) = var1 var2 + cov^2 for centred normals
    assert sum_draws.mean() == pytest.approx(1 / math.pi, abs=0.005)
    assert sum_draws.var() == pytest.approx(CRAIG.var_z2 + CRAIG.cov_z1z2**2, rel=0.01)


def test_product_mean(product_draws):
    assert product_draws.mean() == pytest.approx(1 / 12 + 1 / (2 * math.pi), abs=0.005)


def test_draws_are_seeded():
    np.testing.assert_array_equal(sample_limit("sum", 1000, 3), sample_limit("sum", 1000, 3))
    assert not np.array_equal(sample_limit("sum", 1000, 3), sample_limit("sum", 1000, 4))
    # batches are keyed by index, so a shorter run is a prefix of a longer one
    np.testing.assert_array_equal(sample_limit("product", 10, 3), sample_limit("product", 1000, 3)[:10])


def test_quantile_definition():
    draws = sample_limit("sum", 200_000, 1)
    c = limit_quantile("sum", 0.1, 200_000, 1)
    assert np.mean(draws > c) == pytest.approx(0.1, abs=1e-4)


def test_quantile_table_is_monotone():
    assert limit_quantile_table(n_draws=200_000).check_monotone()


@pytest.mark.parametrize("x", [-2.0, -0.7, -0.05, 0.02, 0.3, 1.0, 2.5, 6.0])
def test_sum_density_matches_bessel_form(x):
    assert limit_density("sum", x) == pytest.approx(oracles.sum_density(x), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("x", [-0.8, -0.2, 0.0, 0.05, 0.3, 0.9, 2.0])
def test_product_density_matches_convolution(x):
    assert limit_density("product", x) == pytest.approx(oracles.product_density(x), rel=1e-6, abs=1e-9)


def test_sum_density_is_infinite_at_zero():
    assert limit_density("sum", 0.0) == math.inf


@pytest.mark.parametrize("statistic", ["sum", "product"])
def test_density_integrates_to_one(statistic, sum_draws, product_draws):
    draws = sum_draws if statistic == "sum" else product_draws
    lo, hi = np.quantile(draws, [0.0005, 0.9995])

    def f(t):
        return limit_density(statistic, t, Quadrature(n_points=48))

    pieces = [(lo, 0.0), (0.0, hi)] if lo < 0 < hi else [(lo, hi)]
    mass = sum(integrate.quad(f, a, b, limit=100)[0] for a, b in pieces)
    assert mass == pytest.approx(0.999, abs=0.01)


@pytest.mark.parametrize("statistic", ["sum", "product"])
def test_density_agrees_with_kde(statistic, sum_draws, product_draws):
    draws = sum_draws if statistic == "sum" else product_draws
    kde = stats.gaussian_kde(draws[:200_000], bw_method=0.02)
    # stay clear of the peak (log singularity of the Sum density at 0)
    grid = np.r_[np.linspace(-2.0, -0.4, 6), np.linspace(0.4, 3.0, 8)]
    if statistic == "product":
        grid = np.r_[np.linspace(-1.0, -0.2, 4), np.linspace(0.3, 2.0, 8)]
    diff = np.abs(limit_density(statistic, grid) - kde(grid))
    assert diff.max() <= 0.05


def test_product_density_nonnegative():
    assert np.all(limit_density("product", np.linspace(-3, 5, 41)) >= 0)


def test_quadrature_errors():
    with pytest.raises(InputError):
        Quadrature(n_points=16)
    with pytest.raises(QuadratureNonConvergence):
        limit_density("sum", 1e-3, Quadrature(n_points=32, tol=1e-16))
    with pytest.raises(InputError):
        limit_density("max", 1.0)


def test_alpha_validation():
    with pytest.raises(InvalidAlpha):
        limit_quantile("sum", 1.0)
    with pytest.raises(InvalidAlpha):
        finite_sample_quantiles(10, 10, [0.0], reps=100)
    with pytest.raises(InputError):
        finite_sample_quantiles(10, 10, reps=50)
    with pytest.raises(InputError):
        finite_sample_quantiles(1, 10, reps=100)


def test_finite_sample_is_reproducible_and_near_limit():
    a = finite_sample_quantiles(60, 60, [0.1], reps=2000, seed=5)
    b = finite_sample_quantiles(60, 60, [0.1], reps=2000, seed=5)
    np.testing.assert_array_equal(a.quantile_sum, b.quantile_sum)
    assert a.quantile_sum[0] == pytest.approx(1.1312, abs=0.15)
    assert a.quantile_product[0] == pytest.approx(0.6818, abs=0.1)


def test_unequal_sizes():
    t = finite_sample_quantiles(40, 20, [0.2, 0.05], reps=500, seed=1)
    assert (t.m, t.n, t.reps) == (40, 20, 500)
    assert t.check_monotone()
