"""
Power studies for the depth-based two-sample tests.

Built-in scenarios all take ``F = N(0, I_2)`` and differ in ``G``:

- ``null``        ``G = F``
- ``scale``       ``G = N(0, I_2 + 0.5 J)``
- ``mean``        ``G = N((0.3, 0.3), I_2)``
- ``mean_scale``  ``G = N((0.2, 0.2), I_2 + 0.4 J)``

where ``J`` is the 2x2 antidiagonal matrix of ones. ``custom`` takes an
arbitrary mean shift and a common off-diagonal covariance term.

Critical values follow a calibrate-then-test protocol. For Max, Min and
Weighted, the critical value is the upper ``1 - alpha`` quantile of the
statistic over ``reps`` null datasets, and power is the fraction of
alternative datasets exceeding it. For Sum and Product, each dataset gets a
block permutation p-value; the threshold is the lower ``alpha`` quantile of
the null p-values and power is the fraction of alternative p-values below
it. One null batch per ``(depth, m, n)`` is shared by all statistics.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from ._rng import derive_seed, substream
from .depth import DepthKind, Euclidean, Mahalanobis, Projection, Spatial, depth_from_name
from .errors import InputError, InvalidAlpha, ScenarioConfigError
from .permute import PermutationConfig, empirical_threshold, permutation_qpairs
from .qstat import q_pair
from .stats import Max, Min, Product, StatisticKind, Sum, WeightedAvg, statistic_from_name, statistic_values

__all__ = [
    "Scenario",
    "PowerTable",
    "StudyConfig",
    "generate_scenario_sample",
    "run_power_study",
    "load_study_config",
    "study_config_from_dict",
]

SCENARIO_KINDS = ("null", "scale", "mean", "mean_scale", "custom")
_BUILTIN = {
    "null": ((0.0, 0.0), 0.0),
    "scale": ((0.0, 0.0), 0.5),
    "mean": ((0.3, 0.3), 0.0),
    "mean_scale": ((0.2, 0.2), 0.4),
}


@dataclass(frozen=True)
class Scenario:
    """A pair of normal distributions ``F = N(0, I_d)`` and ``G``.

    ``n_rule`` sets the second sample size from the first: ``"equal"`` gives
    ``n = m``, ``"half"`` gives ``n = m // 2``.
    """

    kind: str
    m: int = 100
    n_rule: str = "equal"
    mean_shift: tuple = ()
    cov_offdiag: float = 0.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioConfigError(f"kind: unknown scenario {self.kind!r}; choose one of {SCENARIO_KINDS}")
        if self.n_rule not in ("equal", "half"):
            raise ScenarioConfigError(f"n_rule: must be 'equal' or 'half', got {self.n_rule!r}")
        if self.kind == "custom":
            if len(self.mean_shift) < 1:
                raise ScenarioConfigError("mean_shift: custom scenario needs a mean shift vector")
            object.__setattr__(self, "mean_shift", tuple(float(v) for v in self.mean_shift))
            cov = self.g_covariance
            if not np.allclose(cov, cov.T) or np.linalg.eigvalsh(cov).min() <= 0:
                raise ScenarioConfigError(
                    f"cov_offdiag: covariance with off-diagonal {self.cov_offdiag} is not positive definite"
                )

    @property
    def label(self) -> str:
        if self.kind != "custom":
            return self.kind
        shift = ",".join(f"{v:g}" for v in self.mean_shift)
        return f"custom(shift=[{shift}],offdiag={self.cov_offdiag:g})"

    @property
    def dim(self) -> int:
        return len(self.mean_shift) if self.kind == "custom" else 2

    @property
    def g_mean(self) -> np.ndarray:
        if self.kind == "custom":
            return np.asarray(self.mean_shift, dtype=float)
        return np.asarray(_BUILTIN[self.kind][0])

    @property
    def g_covariance(self) -> np.ndarray:
        off = self.cov_offdiag if self.kind == "custom" else _BUILTIN[self.kind][1]
        d = self.dim
        return np.eye(d) + off * (np.ones((d, d)) - np.eye(d))

    def second_size(self, m: int) -> int:
        return m if self.n_rule == "equal" else m // 2


def generate_scenario_sample(scenario: Scenario, which: str, size: int, seed=0) -> np.ndarray:
    """Draw ``size`` i.i.d. rows from ``F`` or ``G`` of ``scenario``.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if size < 1:
        raise InputError(f"size must be >= 1, got {size}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal((size, scenario.dim))
    if which == "F":
        return z
    if which != "G":
        raise InputError(f"which must be 'F' or 'G', got {which!r}")
    root = np.linalg.cholesky(scenario.g_covariance)
    return scenario.g_mean + z @ root.T


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    FIELDS = ("scenario", "depth", "statistic", "m", "n", "power", "critical_value", "reps", "alpha", "seed")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row[k]) for k in self.FIELDS})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "rows": self.rows}, indent=2, sort_keys=True)

    def power(self, scenario: str, depth: str, statistic: str, m: int) -> float:
        for row in self.rows:
            if (row["scenario"], row["depth"], row["statistic"], row["m"]) == (scenario, depth, statistic, m):
                return row["power"]
        raise KeyError((scenario, depth, statistic, m))


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return value


def _depth_label(kind: DepthKind) -> str:
    return kind.name


def _needs_permutation(stat) -> bool:
    return isinstance(stat, (Sum, Product))


def _dataset_summary(x, y, depth, perm_stats, cfg):
    """Observed Q pair and permutation p-values for one dataset."""
    if not perm_stats:
        q = q_pair(x, y, depth)
        return q.q_fg, q.q_gf, {}
    pq = permutation_qpairs(x, y, depth, cfg)
    pvals = {i: pq.p_value(s, cfg.pvalue_mode) for i, s in enumerate(perm_stats)}
    return pq.q_fg, pq.q_gf, pvals


def _batch(scenario, role, key, m, n, depth, perm_stats, cfg, reps, seed, n_jobs):
    """Summaries for ``reps`` datasets; ``role`` 0 draws (F, F), 1 draws (F, G)."""

    def one(r):
        rng = substream(seed, role, *key, m, n, r)
        x = generate_scenario_sample(scenario, "F", m, rng)
        y = generate_scenario_sample(scenario, "G" if role == 1 else "F", n, rng)
        run_cfg = replace(cfg, seed=derive_seed(seed, 2, role, *key, m, n, r))
        return _dataset_summary(x, y, depth, perm_stats, run_cfg)

    if n_jobs == 1:
        out = [one(r) for r in range(reps)]
    else:
        from joblib import Parallel, delayed

        out = Parallel(n_jobs=n_jobs)(delayed(one)(r) for r in range(reps))
    q_fg = np.array([o[0] for o in out])
    q_gf = np.array([o[1] for o in out])
    pvals = {k: np.array([o[2][k] for o in out]) for k in (out[0][2] if out else {})}
    return q_fg, q_gf, pvals


def run_power_study(
    scenarios: Sequence[Scenario],
    depths: Sequence[DepthKind],
    statistics: Sequence[StatisticKind],
    m_grid: Sequence[int] | None = None,
    reps: int = 500,
    alpha: float = 0.05,
    permutation_cfg: PermutationConfig = PermutationConfig(block_size=25, repetitions=200),
    seed: int = 0,
    n_jobs: int = 1,
) -> PowerTable:
    """Empirical power for every (scenario, depth, statistic, m) combination.

    Parameters
    ----------
    scenarios, depths, statistics : sequences
        Grid of settings. Each scenario supplies ``n`` from ``m`` via its
        ``n_rule``.
    m_grid : sequence of int, optional
        First-sample sizes; defaults to each scenario's own ``m``.
    reps : int
        Datasets per null calibration batch and per alternative batch.
    alpha : float
        Nominal level.
    permutation_cfg : PermutationConfig
        Block size and repetitions for Sum and Product; its seed is replaced
        by per-dataset seeds derived from ``seed``.
    seed : int
        Base seed. Identical arguments give identical tables for any
        ``n_jobs``.

    Returns
    -------
    PowerTable
    """
    if reps < 50:
        raise InputError(f"reps must be >= 50, got {reps}")
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    perm_stats = [s for s in statistics if _needs_permutation(s)]
    null_cache = {}
    table = PowerTable(
        meta={
            "reps": reps,
            "alpha": alpha,
            "seed": seed,
            "block_size": permutation_cfg.block_size,
            "repetitions": permutation_cfg.repetitions,
            "pvalue_mode": permutation_cfg.pvalue_mode,
        }
    )
    for si, scenario in enumerate(scenarios):
        for depth in depths:
            for m in m_grid if m_grid is not None else [scenario.m]:
                n = scenario.second_size(int(m))
                depth_key = _depth_index(depths, depth)
                null_key = (depth_key, scenario.dim, m, n)
                if null_key not in null_cache:
                    null_cache[null_key] = _batch(
                        scenario, 0, (depth_key, scenario.dim), m, n, depth, perm_stats, permutation_cfg, reps, seed, n_jobs
                    )
                null_fg, null_gf, null_p = null_cache[null_key]
                alt_fg, alt_gf, alt_p = _batch(
                    scenario, 1, (depth_key, si), m, n, depth, perm_stats, permutation_cfg, reps, seed, n_jobs
                )
                for stat in statistics:
                    if _needs_permutation(stat):
                        k = perm_stats.index(stat)
                        crit = empirical_threshold(null_p[k], alpha)
                        power = float(np.mean(alt_p[k] < crit))
                    else:
                        null_t = statistic_values(null_fg, null_gf, m, n, stat)
                        alt_t = statistic_values(alt_fg, alt_gf, m, n, stat)
                        crit = float(np.quantile(null_t, 1.0 - alpha))
                        power = float(np.mean(alt_t > crit))
                    table.rows.append(
                        {
                            "scenario": scenario.label,
                            "depth": _depth_label(depth),
                            "statistic": stat.name,
                            "m": int(m),
                            "n": int(n),
                            "power": power,
                            "critical_value": float(crit),
                            "reps": int(reps),
                            "alpha": float(alpha),
                            "seed": int(seed),
                        }
                    )
    return table


def _depth_index(depths, depth):
    for i, d in enumerate(depths):
        if d is depth:
            return i
    return list(depths).index(depth)


# -- configuration files -----------------------------------------------------


@dataclass(frozen=True)
class StudyConfig:
    scenarios: tuple
    depths: tuple
    statistics: tuple
    m_grid: tuple
    reps: int
    alpha: float
    permutation: PermutationConfig
    seed: int

    def run(self, n_jobs: int = 1) -> PowerTable:
        table = run_power_study(
            self.scenarios,
            self.depths,
            self.statistics,
            self.m_grid,
            self.reps,
            self.alpha,
            self.permutation,
            self.seed,
            n_jobs=n_jobs,
        )
        table.meta["config"] = self.to_dict()
        return table

    def to_dict(self) -> dict:
        return {
            "scenarios": [
                {k: v for k, v in asdict(s).items() if k != "m"} for s in self.scenarios
            ],
            "depths": [_depth_to_dict(d) for d in self.depths],
            "statistics": [_stat_to_dict(s) for s in self.statistics],
            "m_grid": list(self.m_grid),
            "reps": self.reps,
            "alpha": self.alpha,
            "permutation": {
                "block_size": self.permutation.block_size,
                "repetitions": self.permutation.repetitions,
                "pvalue_mode": self.permutation.pvalue_mode,
            },
            "seed": self.seed,
        }


def _depth_to_dict(d):
    if isinstance(d, Projection):
        return {"kind": "projection", "n_directions": d.n_directions, "seed": d.seed}
    return {"kind": d.name}


def _stat_to_dict(s):
    if isinstance(s, WeightedAvg):
        return {"kind": "weighted", "w1": s.w1}
    return {"kind": s.name}


def _require(doc, key, path, kind=None):
    if key not in doc:
        raise ScenarioConfigError(f"{path}{key}: missing required key")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise ScenarioConfigError(f"{path}{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_entry(entry, path):
    if isinstance(entry, str):
        return {"kind": entry}
    if isinstance(entry, dict) and "kind" in entry:
        return dict(entry)
    raise ScenarioConfigError(f"{path}: expected a name or an object with 'kind'")


def study_config_from_dict(doc: dict) -> StudyConfig:
    """Validate a parsed configuration document; errors name the key path."""
    if not isinstance(doc, dict):
        raise ScenarioConfigError("config: top level must be an object")
    n_rule = doc.get("n_rule", "equal")
    scenarios = []
    for i, entry in enumerate(_require(doc, "scenarios", "", list)):
        spec = _parse_entry(entry, f"scenarios[{i}]")
        spec.setdefault("n_rule", n_rule)
        unknown = set(spec) - {"kind", "n_rule", "mean_shift", "cov_offdiag"}
        if unknown:
            raise ScenarioConfigError(f"scenarios[{i}]: unknown keys {sorted(unknown)}")
        try:
            scenarios.append(
                Scenario(
                    kind=spec["kind"],
                    n_rule=spec["n_rule"],
                    mean_shift=tuple(spec.get("mean_shift", ())),
                    cov_offdiag=float(spec.get("cov_offdiag", 0.0)),
                )
            )
        except ScenarioConfigError as exc:
            raise ScenarioConfigError(f"scenarios[{i}].{exc}") from exc
    depths = []
    for i, entry in enumerate(_require(doc, "depths", "", list)):
        spec = _parse_entry(entry, f"depths[{i}]")
        try:
            depths.append(
                depth_from_name(
                    spec["kind"], n_directions=int(spec.get("n_directions", 500)), seed=int(spec.get("seed", 0))
                )
            )
        except InputError as exc:
            raise ScenarioConfigError(f"depths[{i}]: {exc}") from exc
    statistics = []
    for i, entry in enumerate(_require(doc, "statistics", "", list)):
        spec = _parse_entry(entry, f"statistics[{i}]")
        try:
            statistics.append(statistic_from_name(spec["kind"], float(spec.get("w1", 0.5))))
        except InputError as exc:
            raise ScenarioConfigError(f"statistics[{i}]: {exc}") from exc
    m_grid = _require(doc, "m_grid", "", list)
    if not m_grid or not all(isinstance(m, int) and m >= 2 for m in m_grid):
        raise ScenarioConfigError("m_grid: expected a non-empty list of integers >= 2")
    perm = doc.get("permutation", {})
    try:
        permutation = PermutationConfig(
            block_size=int(perm.get("block_size", 25)),
            repetitions=int(perm.get("repetitions", 200)),
            pvalue_mode=perm.get("pvalue_mode", "strict_greater"),
        )
    except InputError as exc:
        raise ScenarioConfigError(f"permutation: {exc}") from exc
    reps = doc.get("reps", 500)
    if not isinstance(reps, int) or reps < 50:
        raise ScenarioConfigError("reps: expected an integer >= 50")
    alpha = doc.get("alpha", 0.05)
    if not isinstance(alpha, (int, float)) or not 0.0 < alpha < 1.0:
        raise ScenarioConfigError("alpha: expected a number in (0, 1)")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ScenarioConfigError("seed: expected a non-negative integer")
    return StudyConfig(
        scenarios=tuple(scenarios),
        depths=tuple(depths),
        statistics=tuple(statistics),
        m_grid=tuple(m_grid),
        reps=reps,
        alpha=float(alpha),
        permutation=permutation,
        seed=seed,
    )


def load_study_config(path) -> StudyConfig:
    """Read a JSON study configuration."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return study_config_from_dict(doc)
