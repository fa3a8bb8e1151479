"""Tests for the Q statistics and the pair-counting kernel."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from deepeast.depth import Euclidean, Mahalanobis, Projection, Spatial, projection_directions
from deepeast.errors import DimensionMismatch, EmptyReference
from deepeast.qstat import (
    count_leq,
    count_leq_bruteforce,
    q_pair,
    q_statistic,
    q_statistic_bruteforce,
)

# small integer grids force plenty of ties
tied = arrays(np.float64, st.integers(1, 15), elements=st.integers(0, 4).map(float))


@given(a=tied, b=tied)
def test_count_leq_matches_double_loop(a, b):
    assert count_leq(a, b) == count_leq_bruteforce(a, b)


@given(seed=st.integers(0, 2**32 - 1))
def test_count_leq_batched(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, size=(4, 7)).astype(float)
    b = rng.integers(0, 5, size=(4, 3)).astype(float)
    np.testing.assert_array_equal(count_leq(a, b), [count_leq_bruteforce(x, y) for x, y in zip(a, b)])


def test_hand_fixture():
    q = q_pair([0.0, 1.0], [2.0], Euclidean())
    assert (q.q_fg, q.q_gf, q.m, q.n) == (0.0, 0.0, 2, 1)


def test_sample_against_itself():
    # distinct depths: pair (i, j) counts when rank_i <= rank_j, n(n + 1) / 2 pairs
    x = np.random.default_rng(0).standard_normal((10, 2))
    assert q_statistic(x, x, Mahalanobis()) == pytest.approx(11 / 20)


@pytest.mark.parametrize("kind", [Euclidean(), Mahalanobis(), Spatial(), Projection(n_directions=25)], ids=lambda k: k.name)
def test_q_matches_independent_oracle(kind):
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.standard_normal((int(rng.integers(4, 10)), 2))
        y = rng.standard_normal((int(rng.integers(1, 10)), 2)) + 0.5
        dirs = projection_directions(2, kind.n_directions, kind.seed) if isinstance(kind, Projection) else None
        assert q_statistic(x, y, kind) == oracles.q_double_loop(x, y, kind.name, dirs)
        assert q_statistic(x, y, kind) == q_statistic_bruteforce(x, y, kind)


@given(seed=st.integers(0, 2**32 - 1))
def test_q_range(seed):
    rng = np.random.default_rng(seed)
    q = q_pair(rng.standard_normal((6, 2)), rng.standard_normal((4, 2)) * 3, Spatial())
    assert 0.0 <= q.q_fg <= 1.0 and 0.0 <= q.q_gf <= 1.0


def test_errors():
    with pytest.raises(DimensionMismatch):
        q_statistic(np.zeros((3, 2)), np.zeros((3, 1)), Euclidean())
    with pytest.raises(EmptyReference):
        q_statistic(np.zeros((3, 1)), np.zeros((0, 1)), Euclidean())
