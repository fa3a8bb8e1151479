"""Tests for the statistics combining the two Q values."""

import doctest
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import deepeast.stats
from deepeast.errors import InputError, InvalidQPlus
from deepeast.qstat import QPair
from deepeast.stats import (
    Max,
    Min,
    Product,
    Sum,
    WeightedAvg,
    condition_cs_holds,
    evaluate_statistic,
    statistic_from_name,
    statistic_values,
)

KINDS = [Max(), Min(), WeightedAvg(0.3), Sum(), Product()]
unit = st.floats(0.0, 1.0)
sizes = st.integers(1, 500)


def test_doctests():
    assert doctest.testmod(deepeast.stats).failed == 0


def test_hand_fixture():
    q = QPair(0.0, 0.0, 2, 1)
    values = {k.name: evaluate_statistic(q, k).value for k in (Sum(), Product(), Max(), Min())}
    assert values["sum"] == pytest.approx(2 / 3, abs=1e-15)
    assert values["product"] == pytest.approx(1 / 6, abs=1e-15)
    assert values["max"] == pytest.approx(2.0, abs=1e-15)
    assert values["min"] == pytest.approx(math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
def test_vanish_at_half(kind):
    assert evaluate_statistic(QPair(0.5, 0.5, 7, 9), kind).value == pytest.approx(0.0, abs=1e-15)


@given(q1=unit, q2=unit, m=sizes, n=sizes)
def test_max_dominates_weighted(q1, q2, m, n):
    assert statistic_values(q1, q2, m, n, Max()) >= statistic_values(q1, q2, m, n, WeightedAvg(0.7)) - 1e-12


@given(q1=st.floats(0.0, 0.5), q2=st.floats(0.0, 0.5), m=sizes, n=sizes)
def test_min_squared_is_max_below_half(q1, q2, m, n):
    mn = statistic_values(q1, q2, m, n, Min())
    assert mn**2 == pytest.approx(float(statistic_values(q1, q2, m, n, Max())), rel=1e-9, abs=1e-12)


@given(q=unit, m=sizes, n=sizes)
def test_product_sum_identity_on_diagonal(q, m, n):
    s = statistic_values(q, q, m, n, Sum())
    p = statistic_values(q, q, m, n, Product())
    assert p == pytest.approx(float(s) * (q + 0.5) / 2, rel=1e-9, abs=1e-12)


@given(q1=st.floats(0.0, 0.49), q2=st.floats(0.0, 0.5), m=sizes, n=sizes, h=st.floats(1e-4, 1e-2))
def test_same_attraction_signs(q1, q2, m, n, h):
    # lowering either Q below 1/2 never lowers Sum or Product, and strictly raises Sum
    lo = max(q1 - h, 0.0)
    for kind in (Sum(), Product()):
        base = statistic_values(q1, q2, m, n, kind)
        assert statistic_values(lo, q2, m, n, kind) >= base - 1e-12
        assert statistic_values(q2, lo, m, n, kind) >= statistic_values(q2, q1, m, n, kind) - 1e-12
    if q1 - lo > 1e-9:
        assert statistic_values(lo, q2, m, n, Sum()) > statistic_values(q1, q2, m, n, Sum())


@given(q1=unit, q2=unit, m=sizes, n=sizes)
def test_symmetric_in_the_pair_when_sizes_swap(q1, q2, m, n):
    for kind in (Sum(), Product(), Max(), Min()):
        assert statistic_values(q1, q2, m, n, kind) == pytest.approx(
            float(statistic_values(q2, q1, n, m, kind)), rel=1e-12, abs=1e-12
        )


def test_vectorised_matches_scalar():
    rng = np.random.default_rng(0)
    q1, q2 = rng.random(20), rng.random(20)
    for kind in KINDS:
        vec = statistic_values(q1, q2, 30, 40, kind)
        one = [evaluate_statistic(QPair(a, b, 30, 40), kind).value for a, b in zip(q1, q2)]
        np.testing.assert_allclose(vec, one, rtol=1e-14)


def test_condition_cs():
    assert condition_cs_holds(QPair(0.2, 0.3, 5, 5), 0.6)
    assert not condition_cs_holds(QPair(0.4, 0.3, 5, 5), 0.6)
    with pytest.raises(InvalidQPlus):
        condition_cs_holds(QPair(0.2, 0.3, 5, 5), 1.0)


def test_errors():
    with pytest.raises(InputError):
        evaluate_statistic(QPair(1.2, 0.3, 5, 5), Sum())
    with pytest.raises(InputError):
        evaluate_statistic(QPair(0.2, 0.3, 0, 5), Sum())
    with pytest.raises(InputError):
        WeightedAvg(1.0)
    with pytest.raises(InputError):
        statistic_from_name("median")
    assert statistic_from_name("Weighted", 0.2) == WeightedAvg(0.2)
