"""Command-line front end.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bandwidth import DEFAULT_EVAL_RESOLUTION, DEFAULT_LSCV_RESOLUTION, SearchGrid, select
from .errors import AssocKDEError, EmptyCandidateSetError, NumericalError
from .estimator import (
    Sample2,
    amise_diagnostic,
    bias_diagnostic,
    estimate_grid,
    midpoint_axis,
    normalize,
    variance_diagnostic,
)
from .kernels import BandwidthMatrix2, Family, bs_kernel_eval, modified_bs_eval
from .simulation import MODELS, get_target, run_study

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(ValueError):
    """Malformed user input (file contents or flag values)."""


def _fmt(v):
    return f"{v:.17g}"


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def read_sample_csv(path):
    """Read an ``x1,x2`` CSV into a :class:`Sample2`, naming the first bad row."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or [c.strip() for c in rows[0]] != ["x1", "x2"]:
        raise InputError(f"{path}: header must be 'x1,x2'")
    points = []
    for row_no, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"{path}: row {row_no}: expected 2 fields, got {len(row)}")
        try:
            a, b = float(row[0]), float(row[1])
        except ValueError:
            raise InputError(f"{path}: row {row_no}: not a pair of numbers: {','.join(row)!r}") from None
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise InputError(f"{path}: row {row_no}: point ({row[0]}, {row[1]}) outside the unit square")
        points.append((a, b))
    if not points:
        raise InputError(f"{path}: no data rows")
    return Sample2(np.array(points))


def _range_spec(text, spacing):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:k, got {text!r}")
    try:
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:k with numbers, got {text!r}") from None
    if not (0 < a <= b) or k < 1 or (k > 1 and a == b):
        raise argparse.ArgumentTypeError(f"need 0 < a < b and k >= 1, got {text!r}")
    if k == 1:
        return (a,)
    return tuple(np.geomspace(a, b, k) if spacing == "log" else np.linspace(a, b, k))


def _log_range(text):
    return _range_spec(text, "log")


def _lin_range(text):
    return _range_spec(text, "lin")


def _pair(text):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return (a, b)


def _list_of(choices):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"unknown name(s) {bad or text!r}; choose from {', '.join(choices)}")
        return items

    return parse


def _resolution(text):
    g = int(text)
    if g < 8:
        raise argparse.ArgumentTypeError("grid resolution must be at least 8")
    return g


def _positive_int(text):
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return k


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="output CSV path (summary sidecar written next to it)")
    common.add_argument("--grid", type=_resolution, default=DEFAULT_EVAL_RESOLUTION, metavar="G",
                        help="evaluation grid resolution per axis (default 201)")
    common.add_argument("--parallelism", type=_positive_int, default=1, metavar="P")
    common.add_argument("--seed", type=int, default=0)

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--input", help="CSV file with header x1,x2")
    search.add_argument("--family", choices=[f.value for f in Family], default="full")
    search.add_argument("--lscv-grid", type=_resolution, default=DEFAULT_LSCV_RESOLUTION, metavar="G",
                        help="quadrature resolution inside LSCV (default 64)")
    search.add_argument("--lscv-h11", type=_log_range, metavar="a:b:k", help="log-spaced h11 values")
    search.add_argument("--lscv-h22", type=_log_range, metavar="a:b:k", help="log-spaced h22 values")
    search.add_argument("--h12-points", type=_positive_int, default=9, metavar="m")
    search.add_argument("--scott-h", type=_lin_range, metavar="a:b:k", help="linearly spaced Scott scales")

    bandwidth = argparse.ArgumentParser(add_help=False)
    bandwidth.add_argument("--h11", type=float)
    bandwidth.add_argument("--h22", type=float)
    bandwidth.add_argument("--h12", type=float, default=0.0)

    kernel_opts = argparse.ArgumentParser(add_help=False)
    kernel_opts.add_argument("--modified", action="store_true", help="use the nine-region modified kernel")
    kernel_opts.add_argument("--alpha", type=_pair, metavar="a1,a2",
                             help="boundary widths of the modified kernel (default 2*h_jj, at most 0.45)")

    parser = argparse.ArgumentParser(prog="assockde", description="Beta-Sarmanov associated-kernel density estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common, search, kernel_opts], help="select H by LSCV and export the density grid")
    p.add_argument("--normalize", action="store_true", help="rescale the grid to unit mass")

    sub.add_parser("select", parents=[common, search], help="run LSCV selection and export the trace")

    p = sub.add_parser("eval-kernel", parents=[common, bandwidth, kernel_opts], help="tabulate one kernel")
    p.add_argument("--x", type=_pair, required=True, metavar="x1,x2", help="target point")
    p.add_argument("--v", type=_pair, metavar="v1,v2", help="also report the value at this point")

    p = sub.add_parser("mass", parents=[common, search, bandwidth], help="total mass of the unnormalized estimate")

    p = sub.add_parser("diagnose", parents=[common, bandwidth], help="bias, variance and AMISE against a model")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--x", type=_pair, default=(0.5, 0.5), metavar="x1,x2")
    p.add_argument("--n", type=_positive_int, default=100)

    p = sub.add_parser("simulate", parents=[common, search], help="ISE replication study on the synthetic models")
    p.add_argument("--models", type=_list_of(MODELS), default=["A"])
    p.add_argument("--families", type=_list_of([f.value for f in Family]), default=["full", "scott", "diagonal"])
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--reps", type=_positive_int, default=10, help="replications per model")
    p.add_argument("--normalize", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _search_grid(args):
    kw = {"h12_points_per_cell": args.h12_points}
    if args.lscv_h11:
        kw["h11_values"] = args.lscv_h11
    if args.lscv_h22:
        kw["h22_values"] = args.lscv_h22
    if args.scott_h:
        kw["h_values"] = args.scott_h
    return SearchGrid(**kw)


def _bandwidth_from_args(args):
    if args.h11 is None or args.h22 is None:
        raise InputError("--h11 and --h22 are required")
    if args.h12 == 0.0:
        return BandwidthMatrix2.diagonal(args.h11, args.h22)
    return BandwidthMatrix2.full(args.h11, args.h22, args.h12)


def _bandwidth_dict(H):
    out = {"h11": H.h11, "h22": H.h22, "h12": H.h12, "family": H.family.value}
    if H.family is Family.SCOTT:
        out.update(scale=H.scale, H0=[[H.h0[0], H.h0[2]], [H.h0[2], H.h0[1]]], h12_raw=H.h12_raw)
    return out


def _config(args, **resolved):
    cfg = {k: v for k, v in vars(args).items() if k != "handler"}
    cfg.update(resolved)
    return cfg


def _sidecar_path(output):
    return Path(output).with_suffix(".summary.json")


def _emit_summary(args, summary):
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default)
    if args.output:
        _sidecar_path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, np.ndarray)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_rows(path, header, rows):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _select(args, sample, grid):
    return select(sample, args.family, grid, grid_resolution=args.lscv_grid,
                  eval_resolution=args.grid, parallelism=args.parallelism)


def cmd_fit(args):
    _require(args, "input", "output")
    sample = read_sample_csv(args.input)
    grid = _search_grid(args)
    res = _select(args, sample, grid)
    fit = estimate_grid(sample, res.best, args.grid, modified=args.modified, alpha=args.alpha,
                        parallelism=args.parallelism)
    mass = fit.integral()
    if args.normalize:
        fit = normalize(fit)
    fit.to_csv(args.output)
    _emit_summary(args, {
        "command": "fit",
        "n": sample.n,
        "bandwidth": _bandwidth_dict(res.best),
        "objective": res.objective,
        "total_mass": mass,
        "config": _config(args, search_grid=_grid_dict(grid)),
    })


def _grid_dict(grid):
    return {"h11_values": grid.h11_values, "h22_values": grid.h22_values,
            "h12_points_per_cell": grid.h12_points_per_cell, "h_values": grid.h_values,
            "H0": grid.H0 if grid.H0 is not None else "sample covariance"}


def cmd_select(args):
    _require(args, "input")
    sample = read_sample_csv(args.input)
    grid = _search_grid(args)
    res = _select(args, sample, grid)
    if args.output:
        rows = [(e.candidate.h11, e.candidate.h22, e.candidate.h12,
                 "" if e.h12_raw is None else _fmt(e.h12_raw), e.objective, str(int(e.admissible)))
                for e in res.trace]
        _write_rows(args.output, ["h11", "h22", "h12", "h12_raw", "objective", "admissible"], rows)
    _emit_summary(args, {
        "command": "select",
        "n": sample.n,
        "bandwidth": _bandwidth_dict(res.best),
        "objective": res.objective,
        "candidates": len(res.trace),
        "config": _config(args, search_grid=_grid_dict(grid)),
    })


def cmd_eval_kernel(args):
    H = _bandwidth_from_args(args)
    x = np.array(args.x)
    if args.modified:
        # modified margins can blow up on the edge of the square, so use midpoints
        axis = midpoint_axis(args.grid)

        def kernel(v):
            return modified_bs_eval(x, H, v, args.alpha)
    else:
        axis = np.linspace(0.0, 1.0, args.grid)

        def kernel(v):
            return bs_kernel_eval(x, H, v)

    v1, v2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([v1, v2], axis=-1)
    vals = kernel(pts)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    summary = {
        "command": "eval-kernel",
        "x": list(args.x),
        "bandwidth": _bandwidth_dict(H),
        "max": float(vals[i, j]),
        "argmax": [float(axis[i]), float(axis[j])],
        "config": _config(args),
    }
    if args.v is not None:
        summary["value_at_v"] = float(kernel(np.array(args.v)))
    if args.output:
        _write_rows(args.output, ["v1", "v2", "kernel"], zip(v1.ravel(), v2.ravel(), vals.ravel()))
    _emit_summary(args, summary)


def cmd_mass(args):
    _require(args, "input")
    sample = read_sample_csv(args.input)
    if args.h11 is not None or args.h22 is not None:
        H, objective = _bandwidth_from_args(args), None
    else:
        res = _select(args, sample, _search_grid(args))
        H, objective = res.best, res.objective
    mass = estimate_grid(sample, H, args.grid, parallelism=args.parallelism).integral()
    if args.output:
        _write_rows(args.output, ["n", "h11", "h22", "h12", "grid", "total_mass"],
                    [(str(sample.n), H.h11, H.h22, H.h12, str(args.grid), mass)])
    _emit_summary(args, {"command": "mass", "n": sample.n, "bandwidth": _bandwidth_dict(H),
                         "objective": objective, "total_mass": mass, "config": _config(args)})


def cmd_diagnose(args):
    H = _bandwidth_from_args(args)
    target = get_target(args.model)
    diag = target.diagnostics()
    x = np.array(args.x)
    bias = bias_diagnostic(x, H, diag)
    var = variance_diagnostic(x, H, args.n, target.pdf(x))
    amise = amise_diagnostic(H, args.n, diag, args.grid)
    if args.output:
        _write_rows(args.output, ["model", "x1", "x2", "h11", "h22", "h12", "n", "bias", "variance", "amise"],
                    [(args.model, x[0], x[1], H.h11, H.h22, H.h12, str(args.n), bias, var, amise)])
    _emit_summary(args, {"command": "diagnose", "model": args.model, "bandwidth": _bandwidth_dict(H),
                         "bias": bias, "variance": var, "amise": amise, "config": _config(args)})


def cmd_simulate(args):
    grid = _search_grid(args)
    start = time.perf_counter()
    rows = run_study(args.models, args.families, n=args.n, N=args.reps, seed=args.seed, grid=grid,
                     lscv_resolution=args.lscv_grid, eval_resolution=args.grid,
                     normalize_fit=args.normalize, parallelism=args.parallelism)
    elapsed = time.perf_counter() - start
    if args.output:
        _write_rows(args.output, ["model", "family", "n", "N", "mean_ise", "sd_ise"],
                    [(r.model, r.bandwidth_family, str(r.n), str(r.N), r.mean_ise, r.sd_ise) for r in rows])
    summary = {
        "command": "simulate",
        "rows": [{"model": r.model, "family": r.bandwidth_family, "n": r.n, "N": r.N,
                  "mean_ise": r.mean_ise, "sd_ise": r.sd_ise, "per_rep": r.per_rep,
                  "bandwidths": [_bandwidth_dict(H) for H in r.bandwidths]} for r in rows],
        "config": _config(args, search_grid=_grid_dict(grid)),
    }
    _emit_summary(args, summary)
    print(f"elapsed {elapsed:.1f} s", file=sys.stderr)


COMMANDS = {
    "fit": cmd_fit,
    "select": cmd_select,
    "eval-kernel": cmd_eval_kernel,
    "mass": cmd_mass,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (NumericalError, EmptyCandidateSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AssocKDEError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
