"""
Command-line front end.

Every document written by a subcommand carries the package version, the seed
and the fully resolved configuration, so a run can be repeated exactly. JSON
output wraps the result in ``{"version", "seed", "config", "result"}``; CSV
output starts with ``#``-prefixed metadata lines followed by the table.

Exit codes: 0 success, 2 usage or input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .depth import DepthKind, Projection, compute_depths, depth_from_name
from .errors import DeepeastError, InputError, NumericError, ParseError
from .limitlaw import Quadrature, finite_sample_quantiles, limit_density, limit_quantile_table
from .permute import ADD_ONE, STRICT_GREATER, PermutationConfig, block_permutation_test
from .simulate import load_study_config
from .spectra import (
    WindowSpec,
    classify_by_r2,
    extract_window,
    load_spectra,
    scale_curve,
    transform,
    two_group_test_matrix,
)
from .stats import WeightedAvg, statistic_from_name

THREADS_ENV = "DEEPEAST_THREADS"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

BUNDLED = {
    "desk": "desk.json",
    "smoke": "smoke.json",
    "synthetic": "synthetic_spectra.csv",
    "synthetic-null": "synthetic_null_spectra.csv",
}


def bundled_path(name: str) -> Path:
    """Path of a bundled data file (``desk``, ``smoke``, ``synthetic``, ...)."""
    return Path(str(resources.files("deepeast") / "data" / BUNDLED[name]))


def _resolve(path: str) -> Path:
    return bundled_path(path) if path in BUNDLED else Path(path)


def read_matrix(path) -> np.ndarray:
    """Numeric CSV matrix, one observation per row. A non-numeric first row is
    taken as a header and skipped."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{path}, row {i + 1}: expected {width} values, found {len(row)}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"{path}, row {i + 1}, column {j + 1}: cannot parse {cell!r}") from None
    return out


# -- output ------------------------------------------------------------------


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def envelope(seed, config: dict, result) -> dict:
    return {"version": __version__, "seed": seed, "config": _clean(config), "result": _clean(result)}


def render(doc: dict, fmt: str, rows=None, fields=None) -> str:
    """JSON document, or CSV with ``#`` metadata lines over ``rows``."""
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# version: {doc['version']}\n")
    buf.write(f"# seed: {json.dumps(doc['seed'])}\n")
    buf.write(f"# config: {json.dumps(doc['config'], sort_keys=True)}\n")
    rows = rows if rows is not None else [doc["result"]]
    fields = fields or list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in _clean(row).items()})
    return buf.getvalue()


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _depth_from_args(args) -> DepthKind:
    return depth_from_name(args.depth, n_directions=args.n_directions, seed=args.depth_seed)


def _depth_config(kind: DepthKind) -> dict:
    if isinstance(kind, Projection):
        return {"kind": kind.name, "n_directions": kind.n_directions, "seed": kind.seed}
    return {"kind": kind.name}


def _check_alpha(alpha: float) -> None:
    from .errors import InvalidAlpha

    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"--alpha must lie in (0, 1), got {alpha}")


# -- subcommands -------------------------------------------------------------


def cmd_test(args) -> int:
    _check_alpha(args.alpha)
    x, y = read_matrix(args.x), read_matrix(args.y)
    kind = _depth_from_args(args)
    stat = statistic_from_name(args.stat, args.w1)
    cfg = PermutationConfig(args.block_size, args.reps, args.seed, args.pvalue_mode)
    res = block_permutation_test(x, y, kind, stat, cfg)
    config = {
        "x": str(args.x),
        "y": str(args.y),
        "depth": _depth_config(kind),
        "statistic": {"kind": stat.name, **({"w1": stat.w1} if isinstance(stat, WeightedAvg) else {})},
        "block_size": cfg.block_size,
        "repetitions": cfg.repetitions,
        "pvalue_mode": cfg.pvalue_mode,
        "alpha": args.alpha,
    }
    result = {
        "statistic": stat.name,
        "statistic_value": res.statistic.value,
        "p_value": res.p_value,
        "reject": bool(res.p_value < args.alpha),
        "m": res.statistic.m,
        "n": res.statistic.n,
    }
    _emit(render(envelope(args.seed, config, result), args.format), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_study_config(_resolve(args.config))
    table = cfg.run(n_jobs=args.threads)
    doc = envelope(cfg.seed, cfg.to_dict(), table.rows)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fields = list(table.rows[0])
    (out / f"{args.prefix}.csv").write_text(render(doc, "csv", table.rows, fields), encoding="utf-8")
    (out / f"{args.prefix}.json").write_text(render(doc, "json"), encoding="utf-8")
    print(f"wrote {len(table.rows)} rows to {out / args.prefix}.csv and .json")
    return EXIT_OK


def cmd_limit(args) -> int:
    for a in args.alpha:
        _check_alpha(a)
    stats = ("sum", "product") if args.stat == "both" else (args.stat,)
    if args.m is not None:
        n = args.n if args.n is not None else args.m
        table = finite_sample_quantiles(args.m, n, args.alpha, args.reps, args.seed)
        config = {"source": "finite_sample", "m": args.m, "n": n, "reps": args.reps}
    else:
        table = limit_quantile_table(args.alpha, args.draws, args.seed)
        config = {"source": "limit", "draws": args.draws}
    config.update({"statistics": list(stats), "alphas": list(args.alpha)})
    rows = []
    for row in table.rows():
        for s in stats:
            rows.append({"statistic": s, "alpha": row["alpha"], "quantile": row[f"quantile_{s}"]})
    result = {"quantiles": rows}
    if args.density_grid:
        lo, hi, num = args.density_grid
        grid = np.linspace(lo, hi, int(num))
        quad = Quadrature(n_points=args.quad_points)
        result["density"] = [
            {"statistic": s, "x": float(x), "density": float(f)}
            for s in stats
            for x, f in zip(grid, limit_density(s, grid, quad))
        ]
        config.update({"density_grid": [lo, hi, int(num)], "quad_points": args.quad_points})
    doc = envelope(args.seed, config, result)
    if args.format == "csv":
        text = render(doc, "csv", rows, ["statistic", "alpha", "quantile"])
        if args.density_grid:
            text += render(doc, "csv", result["density"], ["statistic", "x", "density"]).split("\n", 3)[3]
    else:
        text = render(doc, "json")
    _emit(text, args.output)
    return EXIT_OK


def cmd_spectra(args) -> int:
    path = _resolve(args.data)
    ds = load_spectra(path, strict=args.strict)
    windows = [WindowSpec.from_label(w, args.center) for w in args.windows.split(",")]
    depths = [depth_from_name(d, n_directions=args.n_directions, seed=args.depth_seed) for d in args.depths.split(",")]
    stats = [statistic_from_name(s) for s in args.stats.split(",")]
    transforms = args.transforms.split(",")
    cfg = PermutationConfig(args.block_size, args.reps, args.seed, args.pvalue_mode)
    classify_window = WindowSpec.from_label(args.classify_window, args.center)
    groups = classify_by_r2(extract_window(ds, classify_window), args.threshold)
    table = two_group_test_matrix(
        ds, windows, depths, stats, transforms, cfg, args.threshold, groups=groups, classify_window=classify_window
    )
    scale_window = WindowSpec.from_label(args.scale_window, args.center)
    scale_kind = depth_from_name(args.scale_depth, n_directions=args.n_directions, seed=args.depth_seed)
    alphas = np.round(np.arange(args.scale_step, 1.0 - 1e-9, args.scale_step), 10)
    curves = []
    swin = transform(extract_window(ds, scale_window), args.scale_transform)
    for g in (1, 2):
        members = groups.members(g)
        if members.size == 0:
            continue
        curve = scale_curve(swin[members], scale_kind, alphas, args.scale_trials, args.seed)
        curves += [{"group": g, "one_minus_alpha": p, "volume": v} for p, v in curve.points]
    config = {
        "data": str(path),
        "center": args.center,
        "windows": [w.label for w in windows],
        "depths": [_depth_config(d) for d in depths],
        "statistics": [s.name for s in stats],
        "transforms": transforms,
        "threshold": args.threshold,
        "classify_window": classify_window.label,
        "block_size": cfg.block_size,
        "repetitions": cfg.repetitions,
        "pvalue_mode": cfg.pvalue_mode,
        "scale_window": scale_window.label,
        "scale_depth": _depth_config(scale_kind),
        "scale_transform": args.scale_transform,
        "scale_trials": args.scale_trials,
    }
    classification = [
        {"spectrum": sid, "r_squared": float(r2), "group": int(g)}
        for sid, r2, g in zip(ds.spectrum_ids, groups.r_squared, groups.group)
    ]
    doc = envelope(
        args.seed,
        config,
        {"classification": classification, "tests": table.rows, "scale_curves": curves},
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "pvalues.csv").write_text(render(doc, "csv", table.rows, list(table.FIELDS)), encoding="utf-8")
    (out / "classification.csv").write_text(render(doc, "csv", classification), encoding="utf-8")
    if curves:
        (out / "scale_curves.csv").write_text(render(doc, "csv", curves), encoding="utf-8")
    (out / "spectra.json").write_text(render(doc, "json"), encoding="utf-8")
    sizes = [int(groups.members(g).size) for g in (1, 2)]
    print(f"groups {sizes[0]} / {sizes[1]}; wrote {len(table.rows)} test cells to {out}")
    return EXIT_OK


def cmd_depth(args) -> int:
    ref, pts = read_matrix(args.reference), read_matrix(args.points)
    kind = _depth_from_args(args)
    values = compute_depths(ref, pts, kind)
    config = {"reference": str(args.reference), "points": str(args.points), "depth": _depth_config(kind)}
    rows = [{"index": i, "depth": float(v)} for i, v in enumerate(values)]
    doc = envelope(getattr(kind, "seed", None), config, rows)
    _emit(render(doc, args.format, rows, ["index", "depth"]), args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_depth_flags(p, default="mahalanobis"):
    p.add_argument("--depth", default=default, help="euclidean, mahalanobis, spatial or projection")
    p.add_argument("--n-directions", type=int, default=500, help="projection depth directions")
    p.add_argument("--depth-seed", type=int, default=0, help="seed of the projection directions")


def _add_output_flags(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


def _add_perm_flags(p, block_size=1, reps=200):
    p.add_argument("--block-size", type=int, default=block_size)
    p.add_argument("--reps", type=int, default=reps, help="permutation replicates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pvalue-mode", choices=(STRICT_GREATER, ADD_ONE), default=STRICT_GREATER)


def _triple(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START:STOP:NUM")
    return float(parts[0]), float(parts[1]), int(parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepeast", description="Depth-based two-sample homogeneity tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help=f"worker processes (default from ${THREADS_ENV}, else 1); results do not depend on it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="block permutation test of two CSV samples")
    p.add_argument("x", help="CSV matrix, one observation per row")
    p.add_argument("y", help="CSV matrix with the same number of columns")
    _add_depth_flags(p)
    p.add_argument("--stat", default="sum", help="sum, product, max, min or weighted")
    p.add_argument("--w1", type=float, default=0.5, help="weight of the weighted statistic")
    p.add_argument("--alpha", type=float, default=0.05, help="level for the reported decision")
    _add_perm_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="power study from a JSON config")
    p.add_argument("config", help="config path, or a bundled name: desk, smoke")
    p.add_argument("--out-dir", default=".", help="directory for the CSV and JSON tables")
    p.add_argument("--prefix", default="power", help="output file stem")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limit", help="limit-law or finite-sample quantiles of Sum and Product")
    p.add_argument("--stat", choices=("sum", "product", "both"), default="both")
    p.add_argument("--alpha", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.01])
    p.add_argument("--draws", type=int, default=1_000_000, help="limit-law Monte Carlo draws")
    p.add_argument("--m", type=int, help="finite-sample size of the first sample (switches to simulation)")
    p.add_argument("--n", type=int, help="finite-sample size of the second sample (default m)")
    p.add_argument("--reps", type=int, default=10_000, help="finite-sample null datasets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density-grid", type=_triple, help="also tabulate the limit density on START:STOP:NUM")
    p.add_argument("--quad-points", type=int, default=64)
    _add_output_flags(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("spectra", help="classify spectra, test the two groups, compute scale curves")
    p.add_argument("data", help="wide spectra CSV, or a bundled name: synthetic, synthetic-null")
    p.add_argument("--out-dir", default=".", help="directory for the result files")
    p.add_argument("--center", type=float, default=1524.0, help="centre wavenumber")
    p.add_argument("--windows", default="27M,15M,5L,5R")
    p.add_argument("--classify-window", default="27M")
    p.add_argument("--threshold", type=float, default=0.5, help="R^2 threshold for Group 2")
    p.add_argument("--depths", default="mahalanobis,spatial,projection")
    p.add_argument("--stats", default="sum,product,max,min")
    p.add_argument("--transforms", default="identity")
    p.add_argument("--n-directions", type=int, default=500)
    p.add_argument("--depth-seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="reject negative intensities")
    p.add_argument("--scale-window", default="5L")
    p.add_argument("--scale-depth", default="mahalanobis")
    p.add_argument("--scale-transform", default="identity")
    p.add_argument("--scale-step", type=float, default=0.05, help="alpha grid step of the scale curves")
    p.add_argument("--scale-trials", type=int, default=10_000, help="Monte Carlo points per hull volume")
    _add_perm_flags(p, block_size=2, reps=1000)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("depth", help="depths of CSV points against a CSV reference sample")
    p.add_argument("reference")
    p.add_argument("points")
    _add_depth_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_depth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DeepeastError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
