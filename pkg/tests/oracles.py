"""Slow, independent reference implementations used as test oracles.

Nothing here shares code with the package beyond the direction generator
for projection depth (the directions are an input, not a computation).
"""

import math

import numpy as np
from scipy import integrate, optimize, special


def euclidean_depth(ref, x):
    mu = [sum(col) / len(col) for col in zip(*ref)]
    return 1.0 / (1.0 + sum((a - b) ** 2 for a, b in zip(x, mu)))


def mahalanobis_depth(ref, x):
    ref = np.asarray(ref, dtype=float)
    mu = ref.mean(axis=0)
    cov = np.cov(ref, rowvar=False, ddof=1).reshape(ref.shape[1], ref.shape[1])
    diff = np.asarray(x, dtype=float) - mu
    return 1.0 / (1.0 + float(diff @ np.linalg.solve(cov, diff)))


def spatial_depth(ref, x):
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for r in np.asarray(ref, dtype=float):
        v = x - r
        nv = math.sqrt(float(v @ v))
        if nv > 0:
            acc += v / nv
    acc /= len(ref)
    return 1.0 - math.sqrt(float(acc @ acc))


def projection_depth(ref, x, directions):
    ref = np.asarray(ref, dtype=float)
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for u in directions:
        proj = ref @ u
        med = np.median(proj)
        mad = np.median(np.abs(proj - med))
        px = float(x @ u)
        if mad > 0:
            worst = max(worst, abs(px - med) / mad)
        elif px != med:
            worst = math.inf
    return 1.0 / (1.0 + worst)


def depths(ref, pts, name, directions=None):
    fn = {
        "euclidean": euclidean_depth,
        "mahalanobis": mahalanobis_depth,
        "spatial": spatial_depth,
    }
    if name == "projection":
        return np.array([projection_depth(ref, p, directions) for p in pts])
    return np.array([fn[name](ref, p) for p in pts])


def q_double_loop(ref, other, name, directions=None):
    """Fraction of cross pairs (i, j) with D(ref_i) <= D(other_j), both depths
    taken relative to ``ref``."""
    d_ref = depths(ref, ref, name, directions)
    d_oth = depths(ref, other, name, directions)
    hits = 0
    for a in d_ref:
        for b in d_oth:
            hits += a <= b
    return hits / (len(d_ref) * len(d_oth))


# -- limit-law densities ------------------------------------------------------

VAR_Z2 = 2.0 / (math.sqrt(3.0) * math.pi)
COV12 = -1.0 / math.pi


def sum_density(x):
    """Density of -Z1 Z2 via the Bessel K0 form of a correlated normal product.

    For (Z1, Z2) centred normal with variances 1, s2 and covariance c, the
    product W = Z1 Z2 has density
    exp(c w / det) K0(sqrt(s2) |w| / det) / (pi sqrt(det)), det = s2 - c^2.
    """
    det = VAR_Z2 - COV12**2
    w = -x
    if w == 0:
        return math.inf
    return math.exp(COV12 * w / det) * special.k0(math.sqrt(VAR_Z2) * abs(w) / det) / (math.pi * math.sqrt(det))


def product_density(x):
    """Density of Z3^2 - Z1 Z2 / 2 by convolving the chi-square-type law of
    Z3^2 (variance 1/12) with the density of -Z1 Z2 / 2."""

    def integrand(u):
        # density of Z3 at u, both signs folded into the factor 2
        f3 = math.sqrt(6.0 / math.pi) * math.exp(-6.0 * u * u)
        return 2.0 * f3 * 2.0 * sum_density(2.0 * (x - u * u))

    pieces = []
    if x > 0:
        r = math.sqrt(x)
        pieces.append(integrate.quad(integrand, 0.0, r, limit=200)[0])
        pieces.append(integrate.quad(integrand, r, np.inf, limit=200)[0])
    else:
        pieces.append(integrate.quad(integrand, 0.0, np.inf, limit=200)[0])
    return sum(pieces)


# -- convex hulls --------------------------------------------------------------


def in_hull_lp(points, candidate):
    """Membership of ``candidate`` in conv(points) by LP feasibility."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    a_eq = np.vstack([points.T, np.ones((1, n))])
    b_eq = np.append(np.asarray(candidate, dtype=float), 1.0)
    res = optimize.linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    return res.status == 0


def shoelace_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def null_pair(rng):
    """Two independent 10 x 1 standard normal samples (picklable for worker processes)."""
    return rng.standard_normal((10, 1)), rng.standard_normal((10, 1))
