"""Tests for the depth functions."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from deepeast.depth import (
    Euclidean,
    Mahalanobis,
    Projection,
    Spatial,
    compute_depths,
    depth_from_name,
    pooled_subset_depths,
    projection_directions,
)
from deepeast.errors import DimensionMismatch, EmptyReference, InvalidSample, SingularCovariance

ALL_KINDS = [Euclidean(), Mahalanobis(), Spatial(), Projection(n_directions=64, seed=3)]


def _oracle(ref, pts, kind):
    dirs = None
    if isinstance(kind, Projection):
        dirs = projection_directions(ref.shape[1], kind.n_directions, kind.seed)
    return oracles.depths(ref, pts, kind.name, dirs)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_matches_loop_oracle(kind, d):
    rng = np.random.default_rng(d)
    ref = rng.standard_normal((15, d))
    pts = rng.standard_normal((9, d)) * 2.0
    np.testing.assert_allclose(compute_depths(ref, pts, kind), _oracle(ref, pts, kind), rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
def test_pooled_subsets_match_direct(kind):
    rng = np.random.default_rng(11)
    pooled = rng.standard_normal((20, 2))
    members = np.array([rng.permutation(20)[:8] for _ in range(5)])
    batch = pooled_subset_depths(pooled, members, kind)
    for c, rows in enumerate(members):
        np.testing.assert_allclose(batch[c], compute_depths(pooled[rows], pooled, kind), rtol=1e-12)


def test_euclidean_fixture():
    # reference {0, 1}: mean 1/2, so every point sits 1/2 away except 2
    np.testing.assert_allclose(compute_depths([0.0, 1.0], [0.0, 1.0, 2.0], Euclidean()), [0.8, 0.8, 1 / 3.25])


def test_mahalanobis_at_mean_is_one():
    rng = np.random.default_rng(0)
    ref = rng.standard_normal((30, 3))
    assert compute_depths(ref, ref.mean(axis=0)[None], Mahalanobis())[0] == pytest.approx(1.0)


def test_spatial_coincident_point_contributes_zero():
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    # at the middle reference point the two remaining unit vectors cancel
    assert compute_depths(ref, ref[:1], Spatial())[0] == pytest.approx(1.0)


def test_projection_zero_scale():
    ref = np.zeros((5, 1))
    depth = compute_depths(ref, [[0.0], [1.0]], Projection(n_directions=4))
    np.testing.assert_array_equal(depth, [1.0, 0.0])


def test_errors():
    with pytest.raises(DimensionMismatch):
        compute_depths(np.zeros((3, 2)), np.zeros((1, 3)), Euclidean())
    with pytest.raises(EmptyReference):
        compute_depths(np.zeros((0, 2)), np.zeros((1, 2)), Euclidean())
    with pytest.raises(SingularCovariance):
        compute_depths(np.ones((4, 2)), np.zeros((1, 2)), Mahalanobis())
    with pytest.raises(InvalidSample):
        compute_depths([[np.nan]], [[0.0]], Euclidean())
    with pytest.raises(InvalidSample):
        depth_from_name("halfspace")
    with pytest.raises(InvalidSample):
        Projection(n_directions=0)


def test_projection_directions_are_nested_and_unit():
    small = projection_directions(4, 10, seed=5)
    big = projection_directions(4, 50, seed=5)
    np.testing.assert_array_equal(small, big[:10])
    np.testing.assert_allclose(np.linalg.norm(big, axis=1), 1.0)


def test_projection_refinement_is_monotone():
    # more directions can only raise the outlyingness sup
    rng = np.random.default_rng(2)
    ref, pts = rng.standard_normal((25, 3)), rng.standard_normal((10, 3))
    coarse = compute_depths(ref, pts, Projection(n_directions=20, seed=9))
    fine = compute_depths(ref, pts, Projection(n_directions=200, seed=9))
    assert np.all(fine <= coarse)


def test_projection_deterministic():
    rng = np.random.default_rng(4)
    ref, pts = rng.standard_normal((12, 2)), rng.standard_normal((6, 2))
    kind = Projection(n_directions=30, seed=17)
    np.testing.assert_array_equal(compute_depths(ref, pts, kind), compute_depths(ref, pts, kind))


finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@given(
    ref=arrays(np.float64, st.tuples(st.integers(4, 12), st.just(2)), elements=finite),
    pts=arrays(np.float64, st.tuples(st.integers(1, 6), st.just(2)), elements=finite),
    kind=st.sampled_from([Euclidean(), Spatial(), Projection(n_directions=16)]),
)
def test_depth_range(ref, pts, kind):
    depth = compute_depths(ref, pts, kind)
    assert depth.shape == (pts.shape[0],)
    assert np.all((depth >= 0.0) & (depth <= 1.0))


def _random_affine(rng, d):
    while True:
        a = rng.standard_normal((d, d))
        if abs(np.linalg.det(a)) > 0.2:
            return a, rng.standard_normal(d)


@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 4))
def test_mahalanobis_affine_invariance(seed, d):
    rng = np.random.default_rng(seed)
    ref, pts = rng.standard_normal((3 * d + 5, d)), rng.standard_normal((7, d))
    a, b = _random_affine(rng, d)
    before = compute_depths(ref, pts, Mahalanobis())
    after = compute_depths(ref @ a.T + b, pts @ a.T + b, Mahalanobis())
    np.testing.assert_allclose(after, before, rtol=1e-9, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 10.0))
def test_spatial_similarity_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    ref, pts = rng.standard_normal((10, 2)), rng.standard_normal((5, 2))
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    b = rng.standard_normal(2)
    before = compute_depths(ref, pts, Spatial())
    after = compute_depths(scale * ref @ q.T + b, scale * pts @ q.T + b, Spatial())
    np.testing.assert_allclose(after, before, rtol=1e-9, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-100, 100))
def test_euclidean_translation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    ref, pts = rng.standard_normal((8, 3)), rng.standard_normal((4, 3))
    np.testing.assert_allclose(
        compute_depths(ref + shift, pts + shift, Euclidean()), compute_depths(ref, pts, Euclidean()), rtol=1e-9
    )
