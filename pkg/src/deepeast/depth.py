"""
Point-to-sample data depth.

Four depth functions are provided, each mapping a point ``x`` and a reference
sample ``X_1..X_m`` to a value in ``(0, 1]`` (larger means more central):

- Euclidean:    ``1 / (1 + ||x - mean||^2)``
- Mahalanobis:  ``1 / (1 + (x - mean)' S^-1 (x - mean))`` with ``S`` the
  unbiased sample covariance
- Spatial:      ``1 - || mean_i (x - X_i) / ||x - X_i|| ||``
- Projection:   ``1 / (1 + sup_u |u'x - loc(u'X)| / scale(u'X))`` where the
  supremum is taken over a fixed, seeded set of random unit directions

Samples are 2-D arrays with one observation per row. A 1-D array is read as
``n`` observations of a single coordinate.

Two entry points are exposed. :func:`compute_depths` evaluates depths of
arbitrary points against one reference sample. :func:`pooled_subset_depths`
evaluates, for a pooled sample ``Z`` and a batch of row subsets, the depth of
every row of ``Z`` with respect to each subset; this is the kernel behind the
permutation tests, where the same pooled rows are re-split many times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import projection_depth_subsets
from .errors import DimensionMismatch, EmptyReference, InvalidSample, SingularCovariance

__all__ = [
    "Euclidean",
    "Mahalanobis",
    "Spatial",
    "Projection",
    "DepthKind",
    "as_sample",
    "compute_depths",
    "pooled_subset_depths",
    "projection_directions",
    "depth_from_name",
]

# elements per temporary block in the batched kernels (~160 MB of float64)
_CHUNK_ELEMENTS = 20_000_000


@dataclass(frozen=True)
class Euclidean:
    name = "euclidean"


@dataclass(frozen=True)
class Mahalanobis:
    name = "mahalanobis"


@dataclass(frozen=True)
class Spatial:
    name = "spatial"


@dataclass(frozen=True)
class Projection:
    """Projection depth approximated over ``n_directions`` random directions.

    ``location`` / ``scale`` select the univariate location and scale used on
    each projection: ``"median"`` / ``"mad"`` (unscaled median absolute
    deviation, the default) or ``"mean"`` / ``"std"``.
    """

    n_directions: int = 500
    seed: int = 0
    location: str = "median"
    scale: str = "mad"
    name = "projection"

    def __post_init__(self):
        if int(self.n_directions) < 1:
            raise InvalidSample(f"n_directions must be >= 1, got {self.n_directions}")
        if self.location not in ("median", "mean"):
            raise InvalidSample(f"unknown projection location {self.location!r}")
        if self.scale not in ("mad", "std"):
            raise InvalidSample(f"unknown projection scale {self.scale!r}")


DepthKind = Union[Euclidean, Mahalanobis, Spatial, Projection]


def depth_from_name(name: str, *, n_directions: int = 500, seed: int = 0) -> DepthKind:
    """Build a depth configuration from its lowercase name."""
    key = name.strip().lower()
    if key == "euclidean":
        return Euclidean()
    if key == "mahalanobis":
        return Mahalanobis()
    if key == "spatial":
        return Spatial()
    if key == "projection":
        return Projection(n_directions=n_directions, seed=seed)
    raise InvalidSample(f"unknown depth {name!r}; choose euclidean, mahalanobis, spatial or projection")


def as_sample(data, name: str = "sample") -> np.ndarray:
    """Validate and return ``data`` as a float array of shape (n, d)."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidSample(f"{name} must be a 1-D or 2-D array, got {arr.ndim} dimensions")
    if arr.shape[1] < 1:
        raise InvalidSample(f"{name} has no coordinates")
    if not np.all(np.isfinite(arr)):
        raise InvalidSample(f"{name} contains NaN or infinite values")
    return arr


def projection_directions(d: int, n_directions: int, seed: int) -> np.ndarray:
    """Unit directions, uniform on the sphere, shape (n_directions, d).

    Requests with the same seed are nested: the first ``k`` rows never depend
    on how many rows were asked for.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n_directions, d))
    norms = np.sqrt(np.einsum("kd,kd->k", u, u))
    # a zero draw has probability zero; guard anyway
    u[norms == 0] = 1.0
    norms[norms == 0] = np.sqrt(d)
    return u / norms[:, None]


def compute_depths(reference, points, kind: DepthKind) -> np.ndarray:
    """Depth of each row of ``points`` with respect to the sample ``reference``.

    Parameters
    ----------
    reference : array_like, shape (m, d)
        Sample defining the empirical distribution.
    points : array_like, shape (k, d)
        Points to evaluate.
    kind : DepthKind
        Depth function and its configuration.

    Returns
    -------
    ndarray, shape (k,)
        Depth values in ``(0, 1]``.

    Raises
    ------
    DimensionMismatch
        If the two samples have different numbers of columns.
    EmptyReference
        If ``reference`` has no rows.
    SingularCovariance
        Mahalanobis depth only, when the reference covariance is not invertible.
    """
    ref = as_sample(reference, "reference")
    pts = as_sample(points, "points")
    _check_pair(ref, pts)
    return _group_depths(ref[None], pts, kind)[0]


def pooled_subset_depths(pooled, members, kind: DepthKind, cache: dict | None = None) -> np.ndarray:
    """Depths of every pooled row with respect to each of several row subsets.

    Parameters
    ----------
    pooled : ndarray, shape (N, d)
        Pooled observations.
    members : int ndarray, shape (C, k)
        Row indices into ``pooled``; row ``c`` lists the reference subset for
        batch entry ``c``.
    kind : DepthKind
    cache : dict, optional
        Scratch space reused across calls on the same ``pooled`` array
        (pairwise unit vectors for Spatial, projections for Projection).

    Returns
    -------
    ndarray, shape (C, N)
    """
    pooled = np.asarray(pooled, dtype=float)
    members = np.atleast_2d(np.asarray(members, dtype=np.intp))
    if members.shape[1] == 0:
        raise EmptyReference("reference subset is empty")
    cache = {} if cache is None else cache
    if isinstance(kind, Spatial):
        return _spatial_pooled(pooled, members, cache)
    if isinstance(kind, Projection):
        proj_t = cache.get("projections")
        if proj_t is None:
            dirs = projection_directions(pooled.shape[1], int(kind.n_directions), int(kind.seed))
            proj_t = np.ascontiguousarray(np.einsum("kd,nd->kn", dirs, pooled))
            cache["projections"] = proj_t
        return projection_depth_subsets(proj_t, members, proj_t, _robust(kind))
    out = np.empty((members.shape[0], pooled.shape[0]))
    step = _chunk_rows(members.shape[1] * pooled.shape[1] * pooled.shape[1], members.shape[0])
    for lo in range(0, members.shape[0], step):
        hi = min(lo + step, members.shape[0])
        try:
            out[lo:hi] = _group_depths(pooled[members[lo:hi]], pooled, kind)
        except SingularCovariance as exc:
            exc.index = lo + getattr(exc, "index", 0)
            raise
    return out


def _check_pair(ref, pts):
    if ref.shape[0] == 0:
        raise EmptyReference("reference sample has no observations")
    if ref.shape[1] != pts.shape[1]:
        raise DimensionMismatch(
            f"reference has {ref.shape[1]} columns but points have {pts.shape[1]}"
        )


def _chunk_rows(per_row: int, total: int) -> int:
    return int(max(1, min(total, _CHUNK_ELEMENTS // max(per_row, 1))))


def _group_depths(groups: np.ndarray, pts: np.ndarray, kind) -> np.ndarray:
    """Depths of ``pts`` (N, d) against each reference in ``groups`` (C, k, d)."""
    if groups.shape[1] == 0:
        raise EmptyReference("reference sample has no observations")
    if isinstance(kind, Euclidean):
        diff = pts[None, :, :] - groups.mean(axis=1)[:, None, :]
        return 1.0 / (1.0 + np.einsum("cnd,cnd->cn", diff, diff))
    if isinstance(kind, Mahalanobis):
        return _mahalanobis(groups, pts)
    if isinstance(kind, Spatial):
        return _spatial(groups, pts)
    if isinstance(kind, Projection):
        c, k, d = groups.shape
        dirs = projection_directions(d, int(kind.n_directions), int(kind.seed))
        ref_t = np.ascontiguousarray(np.einsum("jd,nd->jn", dirs, groups.reshape(c * k, d)))
        pts_t = np.ascontiguousarray(np.einsum("jd,nd->jn", dirs, pts))
        members = np.arange(c * k, dtype=np.intp).reshape(c, k)
        return projection_depth_subsets(ref_t, members, pts_t, _robust(kind))
    raise TypeError(f"unsupported depth kind {kind!r}")


def _mahalanobis(groups, pts):
    c, k, d = groups.shape
    if k < 2:
        raise InvalidSample("Mahalanobis depth needs at least 2 reference observations")
    mu = groups.mean(axis=1)
    centered = groups - mu[:, None, :]
    cov = np.einsum("ckd,cke->cde", centered, centered) / (k - 1)
    rank = np.linalg.matrix_rank(cov)
    bad = np.flatnonzero(np.atleast_1d(rank) < d)
    if bad.size:
        exc = SingularCovariance(
            f"sample covariance is singular (rank {int(np.atleast_1d(rank)[bad[0]])} < d={d}, "
            f"{k} reference observations)"
        )
        exc.index = int(bad[0])
        raise exc
    prec = np.linalg.inv(cov)
    diff = pts[None, :, :] - mu[:, None, :]
    q = np.einsum("cnd,cde,cne->cn", diff, prec, diff)
    return 1.0 / (1.0 + np.maximum(q, 0.0))


def _spatial(groups, pts):
    c, k, d = groups.shape
    n = pts.shape[0]
    out = np.empty((c, n))
    step = _chunk_rows(k * d, n)
    for ci in range(c):
        for lo in range(0, n, step):
            hi = min(lo + step, n)
            diff = pts[lo:hi, None, :] - groups[ci][None, :, :]
            norm = np.sqrt(np.einsum("nkd,nkd->nk", diff, diff))
            # coincident points contribute the zero vector
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(norm[..., None] > 0, diff / norm[..., None], 0.0)
            avg = unit.sum(axis=1) / k
            out[ci, lo:hi] = 1.0 - np.sqrt(np.einsum("nd,nd->n", avg, avg))
    return out


def _spatial_pooled(pooled, members, cache):
    n, d = pooled.shape
    units = cache.get("unit_vectors")
    if units is None and n * n * d <= _CHUNK_ELEMENTS:
        diff = pooled[:, None, :] - pooled[None, :, :]
        norm = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
        with np.errstate(invalid="ignore", divide="ignore"):
            units = np.where(norm[..., None] > 0, diff / norm[..., None], 0.0)
        # layout (N_ref, N_pts * d) so one GEMM covers a batch of subsets
        units = np.ascontiguousarray(units.transpose(1, 0, 2)).reshape(n, n * d)
        cache["unit_vectors"] = units
    if units is None:
        return _spatial(pooled[members], pooled)
    c, k = members.shape
    weights = np.zeros((c, n))
    np.put_along_axis(weights, members, 1.0 / k, axis=1)
    avg = (weights @ units).reshape(c, n, d)
    return 1.0 - np.sqrt(np.einsum("cnd,cnd->cn", avg, avg))


def _robust(kind):
    return kind.location == "median" and kind.scale == "mad"
