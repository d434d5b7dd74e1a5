"""Command-line entry point.

    uckl kernel eval --d 3 --z-re 2 --N 0 --x 0,0,0 --y 1,0,0
    uckl tau --potential hardy:beta=0.5 --center 0,0,0 --rho 0.25 --grid 16
    uckl certify --class f3 --potential hardy:beta=0.5 --center-box 0,0,0,0.1 ...
    uckl lemma --which binom --gamma-max 10 --kmax 200 --out report.json
    uckl report-merge a.json b.json --out merged.json

Exit codes: 0 success, 2 invalid parameters, 3 non-convergence, 4 capacity.
Reports are JSON with ``schemaVersion`` 1; the only environment override is
``UCKL_THREADS`` (assembly worker count).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import classes, verify
from .discretize import dump_matrix, spectral_norm
from .errors import CapacityError, DomainError, NonConvergenceError, UnsupportedError
from .grid import GridParams, Region
from .kernels import KernelSpec, plain_kernel_array, truncated_kernel, weighted_truncated_kernel
from .potentials import parse_potential

SCHEMA_VERSION = 1

# Every default lives here.
DEFAULTS = {
    "seed": 42,
    "grid": 16,
    "tol": 1e-6,
    "max_iter": 10000,
    "point_cap": 20000,
    "d": 3,
    "delta": 0.25,
}

EXIT_OK, EXIT_INVALID, EXIT_NONCONV, EXIT_CAPACITY = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _vector(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("vector entries must be finite")
    return vals


def _typed(kind, test, what):
    def parse(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not {what}") from None
        if not test(val):
            raise argparse.ArgumentTypeError(f"{text!r} is not {what}")
        return val
    return parse


_finite = _typed(float, math.isfinite, "a finite number")
_positive = _typed(float, lambda v: math.isfinite(v) and v > 0, "a positive number")
_nonneg_int = _typed(int, lambda v: v >= 0, "a nonnegative integer")
_pos_int = _typed(int, lambda v: v >= 1, "a positive integer")
_grid_n = _typed(int, lambda v: v >= 2, "an integer >= 2")
_dim = _typed(int, lambda v: v >= 3, "an integer >= 3")


def _int_list(text):
    """``"1-10"`` or ``"1,2,5"``."""
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(v) for v in text.split("-"))
            vals = list(range(lo, hi + 1))
        else:
            vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not vals or min(vals) < 0:
        raise argparse.ArgumentTypeError("integer list must be nonempty and nonnegative")
    return vals


def _add_common(p, grid=True):
    p.add_argument("--seed", type=_nonneg_int, default=DEFAULTS["seed"])
    if grid:
        p.add_argument("--grid", type=_grid_n, default=DEFAULTS["grid"], help="cells per axis")
        p.add_argument("--point-cap", type=_pos_int, default=DEFAULTS["point_cap"])
        p.add_argument("--tol", type=_positive, default=DEFAULTS["tol"])
        p.add_argument("--max-iter", type=_pos_int, default=DEFAULTS["max_iter"])
    p.add_argument("--out", help="write the JSON report here instead of stdout")


def build_parser():
    parser = _Parser(prog="uckl", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="evaluate a kernel at one pair of points")
    k.add_argument("action", choices=["eval"])
    k.add_argument("--d", type=_dim, default=DEFAULTS["d"])
    k.add_argument("--z-re", type=_finite, required=True)
    k.add_argument("--z-im", type=_finite, default=0.0)
    k.add_argument("--N", type=_nonneg_int, default=0)
    weight = k.add_mutually_exclusive_group()
    weight.add_argument("--w", type=_typed(float, lambda v: math.isfinite(v) and v >= 0,
                                           "a nonnegative number"),
                        help="Carleman weight exponent")
    weight.add_argument("--delta", type=_positive, help="weight exponent N_d^delta")
    k.add_argument("--x", type=_vector, required=True)
    k.add_argument("--y", type=_vector, required=True)
    _add_common(k, grid=False)

    t = sub.add_parser("tau", help="tau-type norm of a potential on a ball")
    t.add_argument("--potential", required=True)
    t.add_argument("--d", type=_dim, default=DEFAULTS["d"])
    t.add_argument("--center", type=_vector, required=True)
    t.add_argument("--rho", type=_positive, required=True)
    t.add_argument("--variant", choices=["fd", "f3"], default="fd")
    t.add_argument("--dump-matrix", help="write the assembled matrix as CSV (row,col,re,im)")
    _add_common(t)

    c = sub.add_parser("certify", help="class scan over centers and a radius ladder")
    c.add_argument("--class", dest="cls", choices=list(classes.CLASSES), required=True)
    c.add_argument("--potential", required=True)
    c.add_argument("--d", type=_dim, default=DEFAULTS["d"])
    c.add_argument("--center-box", type=_vector, required=True,
                   help="center coordinates followed by the radius of the compact set")
    c.add_argument("--centers-per-axis", type=_pos_int, default=1)
    c.add_argument("--rho0", type=_positive, required=True)
    c.add_argument("--levels", type=_typed(int, lambda v: v >= 2, "an integer >= 2"),
                   default=3)
    c.add_argument("--p", type=_positive, help="exponent for morrey / lorentz")
    c.add_argument("--csv", help="write the value matrix as CSV")
    _add_common(c)

    lem = sub.add_parser("lemma", help="run one verification check")
    lem.add_argument("--which", required=True,
                     choices=["1", "2", "binom", "ourlem", "e-est", "kato-contraction",
                              "identity", "inclusions", "strichartz"])
    lem.add_argument("--d", type=_dim, default=DEFAULTS["d"])
    lem.add_argument("--nmax", type=_pos_int)
    lem.add_argument("--gamma-max", type=_positive)
    lem.add_argument("--kmax", type=_pos_int, default=200)
    lem.add_argument("--potential", default="hardy:beta=0.5")
    lem.add_argument("--rho", type=_positive, default=0.5)
    lem.add_argument("--a", type=_positive, default=0.1)
    lem.add_argument("--j", type=_pos_int, default=4)
    lem.add_argument("--delta", type=_positive, default=DEFAULTS["delta"])
    lem.add_argument("--n-list", type=_int_list, default=list(range(1, 11)))
    lem.add_argument("--m", type=_pos_int, default=2)
    _add_common(lem)

    r = sub.add_parser("report-merge", help="merge JSON reports")
    r.add_argument("reports", nargs="+")
    r.add_argument("--out")
    return parser


def _grid(args):
    return GridParams(args.grid, args.point_cap, args.seed)


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k != "out"}
    cfg["out"] = args.out
    return cfg


def _format_value(v):
    """Real part, then the imaginary part when nonzero, to 15 significant digits."""
    v = complex(v)
    if v.imag == 0:
        return f"{v.real:.15g}"
    return f"{v.real:.15g} {v.imag:.15g}"


def _check_point(vec, d, name):
    if len(vec) != d:
        raise DomainError(f"--{name} has {len(vec)} components, expected {d}")
    return np.asarray(vec, float)


def cmd_kernel(args):
    x = _check_point(args.x, args.d, "x")
    y = _check_point(args.y, args.d, "y")
    z = complex(args.z_re, args.z_im)
    if args.delta is not None:
        spec = KernelSpec.carleman(args.d, z, args.N, args.delta)
        value = weighted_truncated_kernel(spec, x, y)
    elif args.w:
        value = weighted_truncated_kernel(KernelSpec(args.d, z, args.N, args.w), x, y)
    else:
        spec = KernelSpec(args.d, z, args.N)
        if args.N == 0:
            if np.array_equal(x, y):
                raise DomainError("kernel is singular at x == y")
            value = complex(plain_kernel_array(spec, x, y))
        else:
            value = truncated_kernel(spec, x, y)
    value = complex(value)
    print(_format_value(value))
    estimate = {"value": value.real, "imag": value.imag, "residual": 0.0, "iterations": 0}
    return estimate, {"n": None, "h": None, "points": 1}, None


def cmd_tau(args):
    V = parse_potential(args.potential, args.d)
    grid = _grid(args)
    center = tuple(_check_point(args.center, args.d, "center"))
    op = classes.tau_operator(V, center, args.rho, args.d, grid, args.variant)
    if args.dump_matrix:
        dump_matrix(op, args.dump_matrix)
    est = spectral_norm(op, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    return ({"value": est.value, "residual": est.residual, "iterations": est.iterations},
            {"n": grid.n, "h": op.h, "points": len(op.points)}, None)


def cmd_certify(args):
    V = parse_potential(args.potential, args.d)
    grid = _grid(args)
    box = args.center_box
    if len(box) != args.d + 1:
        raise DomainError(f"--center-box needs {args.d} coordinates and a radius")
    region = Region.ball(box[:-1], box[-1])
    report = classes.class_scan(V, region, args.centers_per_axis, args.rho0, args.levels,
                                args.cls, args.d, grid, args.p)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            csv.writer(fh).writerows(report.csv_rows())
    return ({"value": report.beta_hat, "residual": 0.0, "iterations": report.values.size},
            {"n": grid.n, "h": None, "points": None}, {"scan": report.to_dict()})


def cmd_lemma(args):
    grid = _grid(args)
    which = args.which
    if which == "1":
        rep = verify.check_lemma1(args.d, args.nmax or 30)
    elif which == "2":
        g = args.gamma_max if args.gamma_max is not None else 4.0
        rep = verify.check_lemma2(np.linspace(-g, g, 33), args.nmax or 20, d=args.d)
    elif which == "binom":
        g = args.gamma_max if args.gamma_max is not None else 10.0
        rep = verify.check_binom_bound(np.linspace(-g, g, 201), args.kmax)
    elif which == "ourlem":
        V = parse_potential(args.potential, args.d)
        rep = verify.check_prop_ourlem(V, args.rho, args.a, args.delta, args.d, args.n_list, grid)
    elif which == "e-est":
        V = parse_potential(args.potential, args.d)
        rep = verify.check_E_estimates(V, args.rho, args.j, None, args.delta, args.d,
                                       args.n_list, grid)
    elif which == "kato-contraction":
        V = parse_potential(args.potential, args.d)
        rep = verify.check_kato_contraction(V, args.rho, args.n_list, grid, args.d)
    elif which == "identity":
        ms = verify.ManufacturedSolution(args.m, d=args.d)
        orders = [k for k in args.n_list if k <= 2 * args.m] if args.nmax is None \
            else list(range(0, args.nmax + 1))
        rep = verify.check_identity(ms, orders, grid)
    elif which == "inclusions":
        rep = verify.check_inclusions(args.d, grid)
    else:
        V = parse_potential(args.potential, args.d)
        rep = verify.check_strichartz([(V, args.rho)], args.d, grid)
    data = rep.to_dict()
    return ({"value": data["empiricalConstant"], "residual": 0.0, "iterations": rep.samples},
            {"n": grid.n, "h": None, "points": None}, {"report": data})


def cmd_report_merge(args):
    reports = []
    for path in args.reports:
        try:
            with open(path) as fh:
                reports.append(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read report {path}: {exc}") from None
    passes = [r["report"]["pass"] for r in reports if "report" in r and "pass" in r["report"]]
    merged = {"reports": reports, "allPass": all(passes) if passes else None,
              "count": len(reports)}
    return {"value": float(len(reports)), "residual": 0.0, "iterations": 0}, \
        {"n": None, "h": None, "points": None}, merged


COMMANDS = {"kernel": cmd_kernel, "tau": cmd_tau, "certify": cmd_certify,
            "lemma": cmd_lemma, "report-merge": cmd_report_merge}


def run(argv=None):
    """Parse, execute and report; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        estimate, grid, extra = COMMANDS[args.command](args)
    except NonConvergenceError as exc:
        best = exc.best.value if exc.best is not None else None
        print(f"uckl: non-convergence: {exc} (best estimate {best})", file=sys.stderr)
        return EXIT_NONCONV
    except CapacityError as exc:
        print(f"uckl: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, UnsupportedError) as exc:
        print(f"uckl: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = {
        "schemaVersion": SCHEMA_VERSION,
        "command": args.command,
        "params": _config(args),
        "estimate": estimate,
        "grid": grid,
        "wallTimeMs": round((time.perf_counter() - start) * 1000.0, 3),
        "seed": getattr(args, "seed", None),
    }
    if extra:
        report.update(extra)
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    elif args.command != "kernel":
        print(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
