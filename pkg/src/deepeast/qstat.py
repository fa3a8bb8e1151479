"""
Empirical quality index Q.

``Q(F_m, G_n)`` is the fraction of cross pairs ``(x_i, y_j)`` in which the
``G``-point is at least as deep as the ``F``-point, both depths being taken
with respect to the ``F`` sample::

    Q(F_m, G_n) = (1 / mn) * #{(i, j) : D(x_i; F_m) <= D(y_j; F_m)}

Ties count toward the indicator. Under ``F = G`` the index is attracted to
1/2; a ``G`` sample that is more dispersed than ``F`` pulls it below 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth import DepthKind, as_sample, compute_depths
from .errors import DimensionMismatch, EmptyReference

__all__ = [
    "QPair",
    "count_leq",
    "count_leq_bruteforce",
    "q_statistic",
    "q_statistic_bruteforce",
    "q_pair",
]


@dataclass(frozen=True)
class QPair:
    """The two directed Q statistics of a pair of samples.

    ``q_fg`` is Q(F_m, G_n) (depths relative to the first sample) and ``q_gf``
    is Q(G_n, F_m). ``m`` and ``n`` are the two sample sizes.
    """

    q_fg: float
    q_gf: float
    m: int
    n: int


def count_leq(ref_depths, other_depths) -> np.ndarray:
    """Count pairs with ``ref_depths[..., i] <= other_depths[..., j]``.

    Works on a single pair of 1-D arrays or on batches stacked along leading
    axes (all batch entries must share the two lengths). Counting is done by a
    joint sort in which reference values precede equal other values, so ties
    are counted, and each other-value collects the number of reference values
    sorted before it.
    """
    a = np.asarray(ref_depths, dtype=float)
    b = np.asarray(other_depths, dtype=float)
    m = a.shape[-1]
    joint = np.concatenate([a, b], axis=-1)
    # stable sort keeps reference entries (placed first) ahead of equal values
    order = np.argsort(joint, axis=-1, kind="stable")
    is_ref = order < m
    ref_before = np.cumsum(is_ref, axis=-1)
    return np.where(is_ref, 0, ref_before).sum(axis=-1)


def count_leq_bruteforce(ref_depths, other_depths) -> int:
    """O(mn) double loop; reference oracle for :func:`count_leq`."""
    total = 0
    for dx in np.asarray(ref_depths, dtype=float):
        for dy in np.asarray(other_depths, dtype=float):
            if dx <= dy:
                total += 1
    return total


def _depths_for_q(reference, other, kind):
    ref = as_sample(reference, "reference")
    oth = as_sample(other, "other")
    if ref.shape[0] == 0 or oth.shape[0] == 0:
        raise EmptyReference("both samples must be non-empty")
    if ref.shape[1] != oth.shape[1]:
        raise DimensionMismatch(f"samples have {ref.shape[1]} and {oth.shape[1]} columns")
    return compute_depths(ref, ref, kind), compute_depths(ref, oth, kind)


def q_statistic(reference, other, kind: DepthKind) -> float:
    """Q(reference, other), with all depths taken relative to ``reference``."""
    d_ref, d_oth = _depths_for_q(reference, other, kind)
    return float(count_leq(d_ref, d_oth)) / (d_ref.size * d_oth.size)


def q_statistic_bruteforce(reference, other, kind: DepthKind) -> float:
    d_ref, d_oth = _depths_for_q(reference, other, kind)
    return count_leq_bruteforce(d_ref, d_oth) / (d_ref.size * d_oth.size)


def q_pair(x, y, kind: DepthKind) -> QPair:
    """Both directed Q statistics for samples ``x`` (size m) and ``y`` (size n)."""
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    return QPair(
        q_fg=q_statistic(x, y, kind),
        q_gf=q_statistic(y, x, kind),
        m=x.shape[0],
        n=y.shape[0],
    )
