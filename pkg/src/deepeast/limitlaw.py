"""
Null limit law of the Sum and Product statistics under univariate Euclidean depth.

Under ``F = G`` in one dimension with Euclidean depth,

    S -> -Z1 Z2,        P -> Z3^2 - Z1 Z2 / 2,

where ``(Z1, Z2)`` is bivariate normal with ``Var Z1 = 1``,
``Var Z2 = 2 / (sqrt(3) pi)``, ``Cov(Z1, Z2) = -1/pi`` and ``Z3 ~ N(0, 1/12)``
is independent of both. The product of correlated normals is a Craig-type
distribution.

Quantiles are obtained by Monte Carlo (:func:`limit_quantile`). Densities are
evaluated by fixed-node quadrature of their integral representations
(:func:`limit_density`); they serve for plotting and validation, not for
quantile inversion. :func:`finite_sample_quantiles` simulates the statistics
themselves at finite ``m, n`` for comparison with the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from ._rng import substream
from .errors import InputError, InvalidAlpha, QuadratureNonConvergence
from .qstat import count_leq

__all__ = [
    "CraigLimitSpec",
    "Quadrature",
    "QuantileTable",
    "sample_limit",
    "limit_quantile",
    "limit_quantile_table",
    "limit_density",
    "finite_sample_quantiles",
]

_BATCH = 1_000_000


@dataclass(frozen=True)
class CraigLimitSpec:
    var_z1: float = 1.0
    var_z2: float = 2.0 / (math.sqrt(3.0) * math.pi)
    var_z3: float = 1.0 / 12.0
    cov_z1z2: float = -1.0 / math.pi

    def __post_init__(self):
        if min(self.var_z1, self.var_z2, self.var_z3) <= 0:
            raise InputError("limit variances must be positive")
        if abs(self.cov_z1z2) >= math.sqrt(self.var_z1 * self.var_z2):
            raise InputError("covariance of (Z1, Z2) is not positive definite")

    @property
    def cond_slope(self) -> float:
        # regression coefficient of Z2 on Z1
        return self.cov_z1z2 / self.var_z1

    @property
    def cond_sd(self) -> float:
        return math.sqrt(self.var_z2 - self.cov_z1z2**2 / self.var_z1)

    @property
    def det(self) -> float:
        return self.var_z1 * self.var_z2 - self.cov_z1z2**2


CRAIG = CraigLimitSpec()


def _check_statistic(statistic: str) -> str:
    key = str(statistic).strip().lower()
    if key not in ("sum", "product"):
        raise InputError(f"limit law is defined for 'sum' and 'product', got {statistic!r}")
    return key


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")


def sample_limit(statistic: str, n_draws: int, seed: int = 0, spec: CraigLimitSpec = CRAIG) -> np.ndarray:
    """Draw ``n_draws`` values from the limit law of ``"sum"`` or ``"product"``.

    Draws are generated in batches of one million, batch ``b`` from the
    substream ``(seed, b)``; both statistics see the same ``(Z1, Z2)`` for
    the same seed.
    """
    key = _check_statistic(statistic)
    n_draws = int(n_draws)
    if n_draws < 1:
        raise InputError(f"n_draws must be >= 1, got {n_draws}")
    out = np.empty(n_draws)
    for b, lo in enumerate(range(0, n_draws, _BATCH)):
        size = min(_BATCH, n_draws - lo)
        z = substream(seed, b).standard_normal((size, 3)).T
        z1 = z[0] * math.sqrt(spec.var_z1)
        z2 = spec.cond_slope * z1 + spec.cond_sd * z[1]
        if key == "sum":
            out[lo : lo + size] = -z1 * z2
        else:
            z3 = math.sqrt(spec.var_z3) * z[2]
            out[lo : lo + size] = z3 * z3 - 0.5 * z1 * z2
    return out


def limit_quantile(statistic: str, alpha: float, n_draws: int = 1_000_000, seed: int = 0) -> float:
    """Upper ``alpha`` quantile: the value exceeded by a fraction ``alpha`` of draws."""
    _check_alpha(alpha)
    return float(np.quantile(sample_limit(statistic, n_draws, seed), 1.0 - alpha))


# -- densities ---------------------------------------------------------------


@dataclass(frozen=True)
class Quadrature:
    """Fixed-node quadrature settings.

    ``n_points`` Gauss nodes per panel (and per axis for the 2-D integral);
    the result is accepted when doubling ``n_points`` changes it by at most
    ``tol``. Integration variables are truncated at ``truncation`` marginal
    standard deviations.
    """

    n_points: int = 64
    truncation: float = 8.0
    tol: float = 1e-4

    def __post_init__(self):
        if self.n_points < 32:
            raise InputError(f"quadrature needs n_points >= 32, got {self.n_points}")
        if self.truncation <= 0:
            raise InputError("truncation must be positive")


def _legendre(n, a, b):
    t, w = roots_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def _density_sum(x, n, quad, spec):
    if x == 0.0:
        return math.inf
    v1, v2, cov, det = spec.var_z1, spec.var_z2, spec.cov_z1z2, spec.det
    # f_S(x) = 2 * int_0^inf bvn(z, -x/z) / z dz. With z = exp(v) the 1/z factor
    # cancels and the integrand decays doubly exponentially around its peak.
    lin = -cov * x / det
    peak = math.sqrt(v1 * v2) * abs(x) / det
    margin = 40.0
    v_lo = 0.5 * math.log(v1 * x * x / (2.0 * det * (margin + peak)))
    v_hi = math.log(quad.truncation * math.sqrt(v1))
    if v_lo >= v_hi:
        return 0.0
    v, w = _legendre(n, v_lo, v_hi)
    e2v = np.exp(2.0 * v)
    expo = lin - (v2 * e2v + v1 * x * x / e2v) / (2.0 * det)
    return float(np.dot(w, np.exp(expo))) / (math.pi * math.sqrt(det))


def _density_product(x, n, quad, spec):
    # f_P(x) = int int g(z1, z2) bvn(z1, z2) dz1 dz2 with g the density of
    # Z3^2 at x + z1 z2 / 2, i.e. (1/v3) f_chi2((x + z1 z2 / 2) / v3)
    v1, v2, v3, cov, det = spec.var_z1, spec.var_z2, spec.var_z3, spec.cov_z1z2, spec.det
    log_norm = -math.log(2.0 * math.pi * math.sqrt(det))
    a11, a12, a22 = v2 / (2.0 * det), -cov / det, v1 / (2.0 * det)
    sd2 = math.sqrt(v2)
    lo2, hi2 = -quad.truncation * sd2, quad.truncation * sd2
    r_max = math.sqrt(quad.truncation * math.sqrt(v1))
    t_leg, w_leg = roots_legendre(n)
    # Jacobi rules absorb the |z2 - z2*|^(-1/2) singularity at one endpoint
    t_left, w_left = roots_jacobi(n, 0.0, -0.5)
    t_right, w_right = roots_jacobi(n, -0.5, 0.0)
    chi_pre = 1.0 / (v3 * math.sqrt(2.0 * math.pi))

    def inner(z1):
        if z1 == 0.0:
            return 0.0
        # chi-square argument (x + z1 z2 / 2) / v3 vanishes at z2 = z_star
        z_star = -2.0 * x / z1
        slope = 0.5 * abs(z1) / v3
        if z1 > 0:
            a, b = max(z_star, lo2), hi2
        else:
            a, b = lo2, min(z_star, hi2)
        if a >= b:
            return 0.0
        half = 0.5 * (b - a)

        def weighted(z2):
            # integrand times |z2 - z_star|^(1/2)
            t = slope * np.abs(z2 - z_star)
            return chi_pre / np.sqrt(slope) * np.exp(
                -0.5 * t + log_norm - a11 * z1 * z1 - a12 * z1 * z2 - a22 * z2 * z2
            )

        if z1 > 0 and z_star >= lo2:
            return math.sqrt(half) * float(np.dot(w_left, weighted(a + half * (t_left + 1.0))))
        if z1 < 0 and z_star <= hi2:
            return math.sqrt(half) * float(np.dot(w_right, weighted(a + half * (t_right + 1.0))))
        z2 = a + half * (t_leg + 1.0)
        t = slope * np.abs(z2 - z_star)
        vals = chi_pre * np.exp(-0.5 * t + log_norm - a11 * z1 * z1 - a12 * z1 * z2 - a22 * z2 * z2) / np.sqrt(t)
        return half * float(np.dot(w_leg, vals))

    total = 0.0
    for sign in (1.0, -1.0):
        # z1 = sign * r^2 tames the 1/sqrt(|z1|) growth near z1 = 0 at x = 0;
        # panels break where z_star crosses the truncation box
        breaks = {0.0, r_max}
        if x != 0.0:
            for bound in (lo2, hi2):
                z1_cross = -2.0 * x / bound
                if z1_cross * sign > 0 and 0.0 < math.sqrt(abs(z1_cross)) < r_max:
                    breaks.add(math.sqrt(abs(z1_cross)))
            # graded breaks where |z_star| is a few z2 scales; near x = 0 the
            # inner integral changes quickly there
            for k in (0.25, 1.0, 4.0):
                r_k = math.sqrt(2.0 * abs(x) / (k * sd2))
                if r_k < r_max:
                    breaks.add(r_k)
        edges = sorted(breaks)
        for r_lo, r_hi in zip(edges[:-1], edges[1:]):
            r_nodes, r_w = _legendre(n, r_lo, r_hi)
            for r, wr in zip(r_nodes, r_w):
                total += wr * 2.0 * r * inner(sign * r * r)
    return total


def limit_density(statistic: str, x, quadrature: Quadrature = Quadrature(), spec: CraigLimitSpec = CRAIG):
    """Density of the Sum or Product limit law at ``x`` (scalar or array).

    The Sum density is the one-dimensional integral over ``z1 > 0`` of the
    joint normal density of ``(Z1, -x/Z1)`` weighted by ``2/z1``; the Product
    density integrates ``12 f_chi2(12 x + 6 z1 z2)`` against the joint normal
    density of ``(Z1, Z2)``. The Sum density is infinite at ``x = 0``.

    Raises
    ------
    QuadratureNonConvergence
        If doubling the number of nodes moves the value by more than
        ``quadrature.tol``.
    """
    key = _check_statistic(statistic)
    fn = _density_sum if key == "sum" else _density_product
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xi in enumerate(xs.flat):
        coarse = fn(float(xi), quadrature.n_points, quadrature, spec)
        fine = fn(float(xi), 2 * quadrature.n_points, quadrature, spec)
        if math.isinf(coarse) and math.isinf(fine):
            out.flat[i] = math.inf
            continue
        if abs(fine - coarse) > quadrature.tol:
            raise QuadratureNonConvergence(
                f"{key} density at x={xi}: {coarse:.6g} vs {fine:.6g} after refinement"
            )
        out.flat[i] = max(fine, 0.0)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


# -- quantile tables ---------------------------------------------------------


@dataclass(frozen=True)
class QuantileTable:
    """Upper-alpha quantiles of the Sum and Product statistics.

    ``m`` and ``n`` are ``None`` for the limit law.
    """

    alphas: np.ndarray
    quantile_sum: np.ndarray
    quantile_product: np.ndarray
    m: int | None = None
    n: int | None = None
    reps: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def rows(self):
        return [
            {"alpha": float(a), "quantile_sum": float(s), "quantile_product": float(p)}
            for a, s, p in zip(self.alphas, self.quantile_sum, self.quantile_product)
        ]

    def check_monotone(self) -> bool:
        order = np.argsort(self.alphas)
        return bool(
            np.all(np.diff(self.quantile_sum[order]) < 0) and np.all(np.diff(self.quantile_product[order]) < 0)
        )


def _quantiles(values, alphas):
    return np.quantile(values, 1.0 - np.asarray(alphas, dtype=float))


def limit_quantile_table(alphas=(0.2, 0.1, 0.05, 0.01), n_draws: int = 1_000_000, seed: int = 0) -> QuantileTable:
    alphas = np.asarray(alphas, dtype=float)
    for a in alphas:
        _check_alpha(a)
    return QuantileTable(
        alphas=alphas,
        quantile_sum=_quantiles(sample_limit("sum", n_draws, seed), alphas),
        quantile_product=_quantiles(sample_limit("product", n_draws, seed), alphas),
        reps=int(n_draws),
        seed=int(seed),
    )


def _null_statistics_1d(x, y):
    """Sum and Product for a batch of 1-d samples under Euclidean depth."""
    m, n = x.shape[1], y.shape[1]
    mx = x.mean(axis=1, keepdims=True)
    my = y.mean(axis=1, keepdims=True)
    q_fg = count_leq(1.0 / (1.0 + (x - mx) ** 2), 1.0 / (1.0 + (y - mx) ** 2)) / (m * n)
    q_gf = count_leq(1.0 / (1.0 + (y - my) ** 2), 1.0 / (1.0 + (x - my) ** 2)) / (m * n)
    k = m * n / (m + n)
    return -k * (q_fg + q_gf - 1.0), -k * (q_fg * q_gf - 0.25)


def finite_sample_quantiles(m: int, n: int, alpha_list=(0.2, 0.1, 0.05, 0.01), reps: int = 10_000, seed: int = 0) -> QuantileTable:
    """Empirical upper-alpha quantiles of Sum and Product at sizes ``m, n``.

    Both samples are standard normal in one dimension and depths are
    Euclidean. Replicate ``r`` is drawn from substream ``(seed, r)``.
    """
    if m < 2 or n < 2:
        raise InputError(f"m and n must be >= 2, got m={m}, n={n}")
    if reps < 100:
        raise InputError(f"reps must be >= 100, got {reps}")
    alphas = np.asarray(alpha_list, dtype=float)
    for a in alphas:
        _check_alpha(a)
    s_all = np.empty(reps)
    p_all = np.empty(reps)
    batch = max(1, 2_000_000 // (m + n))
    for lo in range(0, reps, batch):
        hi = min(lo + batch, reps)
        draws = np.stack([substream(seed, r).standard_normal(m + n) for r in range(lo, hi)])
        s_all[lo:hi], p_all[lo:hi] = _null_statistics_1d(draws[:, :m], draws[:, m:])
    return QuantileTable(
        alphas=alphas,
        quantile_sum=_quantiles(s_all, alphas),
        quantile_product=_quantiles(p_all, alphas),
        m=int(m),
        n=int(n),
        reps=int(reps),
        seed=int(seed),
    )
