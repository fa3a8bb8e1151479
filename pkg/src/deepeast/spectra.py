"""
Spectral peak screening.

The pipeline works on a set of spectra sampled on a common wavenumber grid:

1. :func:`extract_window` cuts a window of grid points around a centre
   wavenumber (``27M``: 27 points centred on it, ``5L``: the 5 points to its
   left, ...).
2. :func:`classify_by_r2` regresses each windowed spectrum on a fixed
   quadratic bump shape and splits the spectra by the coefficient of
   determination: spectra with R^2 below the threshold form Group 1, the
   rest Group 2.
3. :func:`two_group_test_matrix` compares the two groups with block
   permutation tests over a grid of windows, depths, transforms and
   statistics.
4. :func:`scale_curve` summarises the dispersion of one group by the volume
   of its depth-trimmed central regions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._rng import substream
from .depth import DepthKind, Spatial, as_sample, compute_depths
from .errors import (
    AlphaOutOfRange,
    BlockSizeMismatch,
    DegenerateRegressionWarning,
    DeepeastError,
    InputError,
    NegativeIntensity,
    NegativeIntensityWarning,
    NonMonotoneWavenumbers,
    NonPositiveForLog,
    NumericError,
    ParseError,
    WindowOutOfRange,
)
from .permute import PermutationConfig, permutation_qpairs
from .stats import StatisticKind

__all__ = [
    "SpectraDataset",
    "WindowSpec",
    "GroupAssignment",
    "ScaleCurve",
    "PValueTable",
    "load_spectra",
    "write_spectra",
    "extract_window",
    "quadratic_shape",
    "classify_by_r2",
    "transform",
    "two_group_test_matrix",
    "scale_curve",
    "hull_volume",
    "make_synthetic_spectra",
]


@dataclass(frozen=True)
class SpectraDataset:
    """Spectra on a shared, strictly increasing wavenumber grid.

    ``intensities`` has one row per spectrum and one column per wavenumber.
    """

    wavenumbers: np.ndarray
    intensities: np.ndarray
    spectrum_ids: tuple

    def __post_init__(self):
        wn = np.asarray(self.wavenumbers, dtype=float)
        inten = np.atleast_2d(np.asarray(self.intensities, dtype=float))
        object.__setattr__(self, "wavenumbers", wn)
        object.__setattr__(self, "intensities", inten)
        object.__setattr__(self, "spectrum_ids", tuple(str(s) for s in self.spectrum_ids))
        if wn.ndim != 1 or np.any(np.diff(wn) <= 0):
            raise NonMonotoneWavenumbers("wavenumbers must be strictly increasing")
        if inten.shape != (len(self.spectrum_ids), wn.size):
            raise InputError(
                f"intensities shape {inten.shape} does not match "
                f"{len(self.spectrum_ids)} spectra x {wn.size} wavenumbers"
            )

    @property
    def n_spectra(self) -> int:
        return self.intensities.shape[0]

    def subset(self, rows) -> "SpectraDataset":
        rows = np.asarray(rows)
        return SpectraDataset(self.wavenumbers, self.intensities[rows], tuple(np.asarray(self.spectrum_ids)[rows]))


def load_spectra(path, strict: bool = False) -> SpectraDataset:
    """Read a wide CSV: first column wavenumber, one column per spectrum.

    The header row holds the spectrum ids (its first cell names the
    wavenumber column). Negative intensities raise :class:`NegativeIntensity`
    when ``strict`` and only warn otherwise.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ParseError(f"{path}: expected a header row and at least one data row")
    header = [cell.strip() for cell in rows[0]]
    if len(header) < 2:
        raise ParseError(f"{path}, line 1: header needs a wavenumber column and at least one spectrum")
    ids = header[1:]
    wn = np.empty(len(rows) - 1)
    inten = np.empty((len(rows) - 1, len(ids)))
    for i, row in enumerate(rows[1:]):
        line = i + 2
        if len(row) != len(header):
            raise ParseError(f"{path}, line {line}: expected {len(header)} cells, found {len(row)}")
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}, line {line}, column {j + 1} ({header[j]!r}): cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}, line {line}, column {j + 1}: non-finite value {cell!r}")
            if j == 0:
                wn[i] = value
            else:
                inten[i, j - 1] = value
    bad = np.flatnonzero(np.diff(wn) <= 0)
    if bad.size:
        raise NonMonotoneWavenumbers(
            f"{path}, line {bad[0] + 3}: wavenumber {wn[bad[0] + 1]} does not exceed {wn[bad[0]]}"
        )
    if np.any(inten < 0):
        i, j = np.argwhere(inten < 0)[0]
        msg = f"{path}, line {i + 2}, spectrum {ids[j]!r}: negative intensity {inten[i, j]}"
        if strict:
            raise NegativeIntensity(msg)
        warnings.warn(msg, NegativeIntensityWarning, stacklevel=2)
    return SpectraDataset(wn, inten.T, tuple(ids))


def write_spectra(ds: SpectraDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["wavenumber", *ds.spectrum_ids])
        for k, w in enumerate(ds.wavenumbers):
            writer.writerow([f"{w:.6f}", *(f"{v:.6f}" for v in ds.intensities[:, k])])


# -- windows -----------------------------------------------------------------


@dataclass(frozen=True)
class WindowSpec:
    """``k`` grid points around ``center_wavenumber``.

    ``shape`` is ``"mid"`` (centred, ``k`` odd), ``"left"`` (the ``k``
    points immediately below the centre) or ``"right"`` (immediately above).
    """

    shape: str = "mid"
    k: int = 27
    center_wavenumber: float = 1524.0

    def __post_init__(self):
        if self.shape not in ("mid", "left", "right"):
            raise InputError(f"window shape must be mid, left or right, got {self.shape!r}")
        if self.k < 1:
            raise InputError(f"window size must be >= 1, got {self.k}")
        if self.shape == "mid" and self.k % 2 == 0:
            raise InputError(f"a centred window needs an odd size, got {self.k}")

    @property
    def label(self) -> str:
        return f"{self.k}{dict(mid='M', left='L', right='R')[self.shape]}"

    @classmethod
    def from_label(cls, label: str, center_wavenumber: float = 1524.0) -> "WindowSpec":
        label = label.strip().upper()
        shapes = {"M": "mid", "L": "left", "R": "right"}
        if len(label) < 2 or label[-1] not in shapes or not label[:-1].isdigit():
            raise InputError(f"window label must look like 27M, 5L or 5R, got {label!r}")
        return cls(shapes[label[-1]], int(label[:-1]), center_wavenumber)

    def indices(self, wavenumbers) -> np.ndarray:
        wn = np.asarray(wavenumbers, dtype=float)
        c = int(np.argmin(np.abs(wn - self.center_wavenumber)))
        if self.shape == "mid":
            half = (self.k - 1) // 2
            lo, hi = c - half, c + half + 1
        elif self.shape == "left":
            lo, hi = c - self.k, c
        else:
            lo, hi = c + 1, c + 1 + self.k
        if lo < 0 or hi > wn.size:
            raise WindowOutOfRange(
                f"window {self.label} around index {c} needs grid indices {lo}..{hi - 1}, "
                f"grid has 0..{wn.size - 1}"
            )
        return np.arange(lo, hi)


def extract_window(ds: SpectraDataset, w: WindowSpec) -> np.ndarray:
    """Windowed intensities, one row per spectrum and ``w.k`` columns."""
    return ds.intensities[:, w.indices(ds.wavenumbers)]


# -- classification ----------------------------------------------------------


def quadratic_shape(d: int) -> np.ndarray:
    """Predictor ``(x - x0)^2 / d^2`` for ``x = 1..d`` with ``x0 = (d + 1) / 2``.

    For ``d = 27`` the centre is ``x0 = 14``.
    """
    x = np.arange(1, d + 1, dtype=float)
    return (x - (d + 1) / 2.0) ** 2 / d**2


@dataclass(frozen=True)
class GroupAssignment:
    r_squared: np.ndarray
    group: np.ndarray
    threshold: float

    @classmethod
    def from_labels(cls, labels, threshold: float = float("nan")) -> "GroupAssignment":
        """Fixed grouping (labels 1 or 2), bypassing the R^2 rule."""
        labels = np.asarray(labels, dtype=int)
        if not np.all(np.isin(labels, (1, 2))):
            raise InputError("group labels must be 1 or 2")
        return cls(np.full(labels.shape, np.nan), labels, threshold)

    def members(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.group == g)


def classify_by_r2(window, threshold: float = 0.5) -> GroupAssignment:
    """Split spectra by the R^2 of an intercept-plus-quadratic fit.

    Each row is regressed by ordinary least squares on ``1`` and
    :func:`quadratic_shape`; spectra with ``R^2 >= threshold`` go to Group 2.
    A constant spectrum gets ``R^2 = 0`` and a warning.
    """
    win = as_sample(window, "window")
    q = quadratic_shape(win.shape[1])
    qc = q - q.mean()
    yc = win - win.mean(axis=1, keepdims=True)
    syy = np.einsum("ij,ij->i", yc, yc)
    sqy = yc @ qc
    sqq = qc @ qc
    flat = syy <= 1e-24 * np.maximum(1.0, np.abs(win).max(axis=1)) ** 2
    if np.any(flat):
        warnings.warn(
            f"{int(flat.sum())} spectra are constant over the window; R^2 set to 0",
            DegenerateRegressionWarning,
            stacklevel=2,
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(flat, 0.0, sqy * sqy / (sqq * syy))
    r2 = np.clip(r2, 0.0, 1.0)
    return GroupAssignment(r_squared=r2, group=np.where(r2 >= threshold, 2, 1), threshold=float(threshold))


def transform(s, t: str = "identity") -> np.ndarray:
    """Apply ``"identity"``, ``"log"`` (natural, elementwise) or ``"normalize"``
    (each row scaled to unit Euclidean norm)."""
    arr = as_sample(s)
    key = t.strip().lower()
    if key == "identity":
        return arr.copy()
    if key == "log":
        if np.any(arr <= 0):
            raise NonPositiveForLog("log transform needs strictly positive intensities")
        return np.log(arr)
    if key == "normalize":
        norms = np.sqrt(np.einsum("ij,ij->i", arr, arr))
        if np.any(norms == 0):
            raise InputError("cannot normalise an all-zero spectrum")
        return arr / norms[:, None]
    raise InputError(f"unknown transform {t!r}; choose identity, log or normalize")


# -- two-group testing -------------------------------------------------------


@dataclass
class PValueTable:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    FIELDS = ("window", "depth", "transform", "statistic", "m", "n", "statistic_value", "p_value", "status")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (f"{row[k]:.10g}" if isinstance(row[k], float) else row[k]) for k in self.FIELDS})
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()} for r in self.rows]
        return json.dumps({"meta": self.meta, "rows": rows}, indent=2, sort_keys=True)

    def lookup(self, window: str, depth: str, transform: str, statistic: str) -> dict:
        for row in self.rows:
            if (row["window"], row["depth"], row["transform"], row["statistic"]) == (window, depth, transform, statistic):
                return row
        raise KeyError((window, depth, transform, statistic))


def two_group_test_matrix(
    ds: SpectraDataset,
    windows: Sequence[WindowSpec],
    depths: Sequence[DepthKind],
    statistics: Sequence[StatisticKind],
    transforms: Sequence[str] = ("identity",),
    permutation_cfg: PermutationConfig = PermutationConfig(block_size=2, repetitions=1000),
    threshold: float = 0.5,
    groups: GroupAssignment | None = None,
    classify_window: WindowSpec = WindowSpec("mid", 27),
) -> PValueTable:
    """Permutation p-values comparing Group 1 (x) with Group 2 (y).

    Spectra are classified once, on ``classify_window`` at ``threshold``,
    unless ``groups`` is given. Every (window, depth, transform, statistic)
    cell then gets a block permutation p-value; transforms act on the
    extracted window. A cell that cannot be computed is kept with a NaN
    p-value and a status explaining why (block size not dividing a group
    size, singular covariance, invalid transform, ...). Spatial cells whose
    window has at least as many points as the smaller group are reported as
    SingularCovariance, like the Mahalanobis cells they sit beside.
    """
    if groups is None:
        groups = classify_by_r2(extract_window(ds, classify_window), threshold)
    g1, g2 = groups.members(1), groups.members(2)
    table = PValueTable(
        meta={
            "threshold": threshold,
            "group_sizes": [int(g1.size), int(g2.size)],
            "block_size": permutation_cfg.block_size,
            "repetitions": permutation_cfg.repetitions,
            "seed": permutation_cfg.seed,
            "pvalue_mode": permutation_cfg.pvalue_mode,
        }
    )
    if g1.size == 0 or g2.size == 0:
        raise InputError(f"both groups must be non-empty (sizes {g1.size} and {g2.size})")

    def emit(window, depth, tname, stat, value, p, status):
        table.rows.append(
            {
                "window": window.label,
                "depth": depth.name,
                "transform": tname,
                "statistic": stat.name,
                "m": int(g1.size),
                "n": int(g2.size),
                "statistic_value": value,
                "p_value": p,
                "status": status,
            }
        )

    for window in windows:
        win = extract_window(ds, window)
        for tname in transforms:
            try:
                data = transform(win, tname)
                transform_error = None
            except DeepeastError as exc:
                data, transform_error = None, f"{type(exc).__name__}: {exc}"
            for depth in depths:
                status, pq = "ok", None
                if transform_error is not None:
                    status = transform_error
                elif isinstance(depth, Spatial) and data.shape[1] >= min(g1.size, g2.size):
                    # kept consistent with Mahalanobis, which is singular in this regime
                    status = (
                        f"SingularCovariance: window dimension {data.shape[1]} is not below "
                        f"the smaller group size {min(g1.size, g2.size)}"
                    )
                else:
                    try:
                        pq = permutation_qpairs(data[g1], data[g2], depth, permutation_cfg)
                    except BlockSizeMismatch as exc:
                        status = f"skipped: {exc}"
                    except NumericError as exc:
                        cause = getattr(exc, "cause", exc)
                        status = f"{type(cause).__name__}: {cause}"
                for stat in statistics:
                    if pq is None:
                        emit(window, depth, tname, stat, float("nan"), float("nan"), status)
                    else:
                        t_obs, _ = pq.statistic(stat)
                        emit(window, depth, tname, stat, t_obs, pq.p_value(stat, permutation_cfg.pvalue_mode), "ok")
    return table


# -- scale curves ------------------------------------------------------------


@dataclass(frozen=True)
class ScaleCurve:
    alphas: np.ndarray
    volumes: np.ndarray

    @property
    def points(self):
        """(1 - alpha, volume) pairs."""
        return [(1.0 - float(a), float(v)) for a, v in zip(self.alphas, self.volumes)]

    def to_csv(self) -> str:
        lines = ["one_minus_alpha,volume"]
        lines += [f"{x:.10g},{v:.10g}" for x, v in self.points]
        return "\n".join(lines) + "\n"


def hull_volume(points, n_trials: int = 10_000, rng=None) -> float:
    """Volume of the convex hull of ``points`` (rows).

    Exact for one and two dimensions. For three to eight dimensions the
    volume is estimated by hit-or-miss sampling of ``n_trials`` uniform
    points in the bounding box, testing hull membership against the hull's
    facet inequalities. Fewer than ``d + 1`` points, or points lying in a
    lower-dimensional flat, give volume 0.
    """
    pts = as_sample(points, "points")
    n, d = pts.shape
    if n < d + 1:
        return 0.0
    if d == 1:
        return float(pts.max() - pts.min())
    if d > 8:
        raise InputError(f"hull volumes are supported up to 8 dimensions, got {d}")
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return 0.0
    if d == 2:
        return float(hull.volume)
    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    box = float(np.prod(hi - lo))
    if box == 0.0:
        return 0.0
    trials = lo + (hi - lo) * rng.random((int(n_trials), d))
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    scale = np.abs(pts).max() + 1.0
    inside = np.all(trials @ normals.T + offsets <= 1e-12 * scale, axis=1)
    return box * float(inside.mean())


def scale_curve(s, kind: DepthKind, alphas, n_trials: int = 10_000, seed: int = 0) -> ScaleCurve:
    """Volumes of the depth-trimmed regions ``{x : D(x; F_m) >= alpha}``.

    Each region is represented by the sample rows whose depth (relative to
    the full sample) is at least ``alpha``; its volume is that of their
    convex hull, see :func:`hull_volume`.
    """
    sample = as_sample(s)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if np.any((alphas <= 0) | (alphas >= 1)):
        raise AlphaOutOfRange("every alpha must lie in (0, 1)")
    depths = compute_depths(sample, sample, kind)
    vols = np.array(
        [hull_volume(sample[depths >= a], n_trials, substream(seed, i)) for i, a in enumerate(alphas)]
    )
    return ScaleCurve(alphas=alphas, volumes=vols)


# -- synthetic data ----------------------------------------------------------


def make_synthetic_spectra(
    n_peak: int = 20,
    n_flat: int = 20,
    seed: int = 0,
    center: float = 1524.0,
    step: float = 41.0 / 26.0,
    half_width: int = 48,
    peak_height=(400.0, 700.0),
    peak_sigma=(5.0, 8.0),
    baseline=(800.0, 1200.0),
):
    """Peak and flat spectra with Poisson counts on a grid around ``center``.

    Peak spectra carry a Gaussian band at ``center`` on a sloped baseline;
    flat spectra carry the baseline only. Returns the dataset and the true
    labels (2 for peak, 1 for flat), peak spectra first.
    """
    rng = np.random.default_rng(seed)
    wn = center + step * np.arange(-half_width, half_width + 1)
    rows, labels, ids = [], [], []
    for i in range(n_peak + n_flat):
        is_peak = i < n_peak
        level = rng.uniform(*baseline)
        slope = rng.uniform(-0.5, 0.5)
        mean = level + slope * (wn - center)
        if is_peak:
            height = rng.uniform(*peak_height)
            sigma = rng.uniform(*peak_sigma)
            mean = mean + height * np.exp(-0.5 * ((wn - center) / sigma) ** 2)
        rows.append(rng.poisson(np.maximum(mean, 1.0)).astype(float))
        labels.append(2 if is_peak else 1)
        ids.append(f"{'peak' if is_peak else 'flat'}_{i:03d}")
    return SpectraDataset(wn, np.array(rows), tuple(ids)), np.array(labels)
