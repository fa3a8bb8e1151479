"""
Strategic block permutation test.

The pooled rows ``x_1..x_m, y_1..y_n`` are cut into consecutive blocks of
``block_size`` rows (``m / s`` blocks from ``x``, ``n / s`` from ``y``). Each
replicate shuffles the block order uniformly, takes the first ``m / s``
blocks as the permuted ``x`` and the rest as the permuted ``y``, and
recomputes the statistic. The p-value is the fraction of permuted statistics
that strictly exceed the observed one (``"strict_greater"``), or the
add-one version ``(1 + #{T* >= T}) / (C + 1)`` (``"add_one"``).

Replicate ``r`` draws its shuffle from a substream keyed by ``(seed, r)``,
so results are reproducible and independent of scheduling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from ._rng import derive_seed, substream
from .depth import DepthKind, Mahalanobis, as_sample, pooled_subset_depths
from .errors import (
    BlockSizeMismatch,
    DegenerateBlockWarning,
    DimensionMismatch,
    InputError,
    InvalidAlpha,
    PermutedDepthFailure,
    SingularCovariance,
)
from .qstat import QPair, count_leq
from .stats import StatisticKind, StatisticValue, statistic_values

__all__ = [
    "STRICT_GREATER",
    "ADD_ONE",
    "PermutationConfig",
    "PermutationQPairs",
    "TestResult",
    "NullScenario",
    "permutation_qpairs",
    "permutation_p_value",
    "block_permutation_test",
    "empirical_threshold",
    "calibrate_null_threshold",
]

STRICT_GREATER = "strict_greater"
ADD_ONE = "add_one"

# draws (x, y) under the null hypothesis from a generator
NullScenario = Callable[[np.random.Generator], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class PermutationConfig:
    block_size: int = 1
    repetitions: int = 200
    seed: int = 0
    pvalue_mode: str = STRICT_GREATER

    def __post_init__(self):
        if int(self.block_size) < 1:
            raise InputError(f"block_size must be >= 1, got {self.block_size}")
        if int(self.repetitions) < 1:
            raise InputError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.pvalue_mode not in (STRICT_GREATER, ADD_ONE):
            raise InputError(f"pvalue_mode must be {STRICT_GREATER!r} or {ADD_ONE!r}")


@dataclass(frozen=True)
class TestResult:
    statistic: StatisticValue
    p_value: float
    repetitions: int
    block_size: int
    seed: int
    depth: DepthKind
    pvalue_mode: str = STRICT_GREATER

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class PermutationQPairs:
    """Observed and permuted Q pairs from one block permutation run.

    Any statistic (and its p-value) can be derived from these without
    re-running the permutations.
    """

    q_fg: float
    q_gf: float
    perm_q_fg: np.ndarray
    perm_q_gf: np.ndarray
    m: int
    n: int

    @property
    def observed(self) -> QPair:
        return QPair(self.q_fg, self.q_gf, self.m, self.n)

    def statistic(self, kind: StatisticKind):
        """Observed statistic and the array of permuted statistics."""
        t_obs = float(statistic_values(self.q_fg, self.q_gf, self.m, self.n, kind))
        t_perm = statistic_values(self.perm_q_fg, self.perm_q_gf, self.m, self.n, kind)
        return t_obs, t_perm

    def p_value(self, kind: StatisticKind, mode: str = STRICT_GREATER) -> float:
        t_obs, t_perm = self.statistic(kind)
        return permutation_p_value(t_obs, t_perm, mode)


def permutation_p_value(observed: float, permuted, mode: str = STRICT_GREATER) -> float:
    permuted = np.asarray(permuted, dtype=float)
    c = permuted.size
    if mode == STRICT_GREATER:
        return int(np.count_nonzero(permuted > observed)) / c
    if mode == ADD_ONE:
        return (1 + int(np.count_nonzero(permuted >= observed))) / (c + 1)
    raise InputError(f"unknown pvalue_mode {mode!r}")


def _check_blocks(m, n, s):
    if m % s or n % s:
        divisors = [k for k in range(1, min(m, n) + 1) if m % k == 0 and n % k == 0]
        raise BlockSizeMismatch(
            f"block size {s} does not divide both sample sizes (m={m}, n={n}); "
            f"valid block sizes: {divisors}"
        )
    if (m + n) // s < 4:
        warnings.warn(
            f"only {(m + n) // s} blocks; the block permutation test is degenerate and cannot reject",
            DegenerateBlockWarning,
            stacklevel=3,
        )


def _block_members(m, n, s, repetitions, seed):
    """Row indices of the permuted x and y for each replicate.

    Row 0 is the identity split (the observed samples); rows 1..C follow.
    """
    b1 = m // s
    n_blocks = (m + n) // s
    orders = np.empty((repetitions + 1, n_blocks), dtype=np.intp)
    orders[0] = np.arange(n_blocks)
    for r in range(repetitions):
        orders[r + 1] = substream(seed, r).permutation(n_blocks)
    offsets = np.arange(s, dtype=np.intp)
    rows = (orders[:, :, None] * s + offsets).reshape(repetitions + 1, n_blocks * s)
    return rows[:, :m], rows[:, m:]


def permutation_qpairs(x, y, kind: DepthKind, cfg: PermutationConfig) -> PermutationQPairs:
    """Run the block permutation and return observed and permuted Q pairs.

    Raises
    ------
    BlockSizeMismatch
        If ``cfg.block_size`` does not divide both sample sizes.
    SingularCovariance
        If a depth cannot be evaluated on the observed samples.
    PermutedDepthFailure
        If a depth cannot be evaluated on a permuted reassembly.
    """
    x = as_sample(x, "x")
    y = as_sample(y, "y")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"x has {x.shape[1]} columns but y has {y.shape[1]}")
    m, n = x.shape[0], y.shape[0]
    s = int(cfg.block_size)
    _check_blocks(m, n, s)
    pooled = np.vstack([x, y])
    mem_x, mem_y = _block_members(m, n, s, int(cfg.repetitions), int(cfg.seed))

    cache: dict = {}
    if isinstance(kind, Mahalanobis):
        # a singular observed sample is an input problem, report it before any replicate
        for rows in (mem_x[:1], mem_y[:1]):
            pooled_subset_depths(pooled, rows, kind, cache)
    counts = []
    for ref, oth in ((mem_x, mem_y), (mem_y, mem_x)):
        try:
            depths = pooled_subset_depths(pooled, ref, kind, cache)
        except SingularCovariance as exc:
            index = getattr(exc, "index", 0)
            if index == 0:
                raise
            raise PermutedDepthFailure(index - 1, exc) from exc
        counts.append(
            count_leq(np.take_along_axis(depths, ref, axis=1), np.take_along_axis(depths, oth, axis=1))
        )
    q_fg = counts[0] / (m * n)
    q_gf = counts[1] / (m * n)
    return PermutationQPairs(
        q_fg=float(q_fg[0]),
        q_gf=float(q_gf[0]),
        perm_q_fg=q_fg[1:],
        perm_q_gf=q_gf[1:],
        m=m,
        n=n,
    )


def block_permutation_test(
    x, y, kind: DepthKind, stat: StatisticKind, cfg: PermutationConfig = PermutationConfig()
) -> TestResult:
    """Two-sample block permutation test of ``F = G``.

    Parameters
    ----------
    x, y : array_like, shapes (m, d) and (n, d)
        The two samples. Rows are observations.
    kind : DepthKind
        Depth used for the Q statistics.
    stat : StatisticKind
        Statistic whose large values reject.
    cfg : PermutationConfig
        Block size, number of replicates, seed and p-value convention.

    Returns
    -------
    TestResult
    """
    pq = permutation_qpairs(x, y, kind, cfg)
    t_obs, t_perm = pq.statistic(stat)
    return TestResult(
        statistic=StatisticValue(kind=stat, value=t_obs, m=pq.m, n=pq.n),
        p_value=permutation_p_value(t_obs, t_perm, cfg.pvalue_mode),
        repetitions=int(cfg.repetitions),
        block_size=int(cfg.block_size),
        seed=int(cfg.seed),
        depth=kind,
        pvalue_mode=cfg.pvalue_mode,
    )


def empirical_threshold(p_values, alpha: float) -> float:
    """Empirical lower ``alpha`` quantile of null p-values."""
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    return float(np.quantile(np.asarray(p_values, dtype=float), alpha))


def _null_p_value(generator, kind, stat, cfg, r):
    x, y = generator(substream(cfg.seed, 0, r))
    run_cfg = replace(cfg, seed=derive_seed(cfg.seed, 1, r))
    return block_permutation_test(x, y, kind, stat, run_cfg).p_value


def calibrate_null_threshold(
    generator: NullScenario,
    kind: DepthKind,
    stat: StatisticKind,
    cfg: PermutationConfig,
    outer_reps: int,
    alpha: float,
    n_jobs: int = 1,
) -> float:
    """Rejection threshold for permutation p-values, calibrated by simulation.

    ``outer_reps`` null datasets are drawn from ``generator``; each is tested
    with :func:`block_permutation_test` and the lower ``alpha`` quantile of the
    resulting p-values is returned. A later test rejects when its p-value
    falls below this threshold.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    if outer_reps < 100:
        raise InputError(f"outer_reps must be >= 100, got {outer_reps}")
    if n_jobs == 1:
        pvals = [_null_p_value(generator, kind, stat, cfg, r) for r in range(outer_reps)]
    else:
        from joblib import Parallel, delayed

        pvals = Parallel(n_jobs=n_jobs)(
            delayed(_null_p_value)(generator, kind, stat, cfg, r) for r in range(outer_reps)
        )
    return empirical_threshold(pvals, alpha)
