"""Command-line interface.

Subcommands
-----------
sum       lateral sums of a scenario in one direction
jump      closed-form jumps of a scenario
validate  numeric lateral difference against the closed form (exit 0 iff all rows pass)
kernel    Ecalle kernel on a rectangular grid (CSV)
sweep     validation rows along one axis (CSV)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import HeatStokesError
from .kernels import EcalleKernelSpec, ecalle_kernel
from .scenario import (jump_rows, lateral_rows, load_scenario, report_json, run_validation,
                       sweep, sweep_csv)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args) -> list:
    if not args.config:
        raise SystemExit("error: --config is required for this subcommand")
    scenarios = []
    for path in args.config:
        sc = load_scenario(path)
        if args.tol is not None:
            sc = replace(sc, tolerance=args.tol)
        scenarios.append(sc)
    return scenarios


def _cmd_sum(args) -> int:
    out, ok = [], True
    for sc in _load(args):
        rows = lateral_rows(sc, args.theta, args.threads)
        ok = ok and all(r["error"] is None for r in rows)
        out.append({"scenario": sc.name, "rows": rows})
    _emit(json.dumps({"sums": out}, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if ok else 1


def _cmd_jump(args) -> int:
    out, ok = [], True
    for sc in _load(args):
        rows = jump_rows(sc, args.threads)
        ok = ok and all(r["error"] is None for r in rows)
        out.append({"scenario": sc.name, "rows": rows})
    _emit(json.dumps({"jumps": out}, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if ok else 1


def _cmd_validate(args) -> int:
    reports = [run_validation(sc, args.threads) for sc in _load(args)]
    _emit(report_json(reports), args.out)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_sweep(args) -> int:
    scenarios = _load(args)
    if len(scenarios) != 1:
        raise SystemExit("error: sweep takes exactly one --config")
    sc = scenarios[0]
    grid = args.grid if args.grid is not None else list(sc.sweep_grid)
    rows = sweep(sc, args.axis, grid, args.threads)
    _emit(sweep_csv(grid, rows), args.out)
    return 0 if all(r.passed for r in rows) else 1


def _cmd_kernel(args) -> int:
    spec = EcalleKernelSpec(args.alpha, method=args.method)
    re = np.linspace(args.re[0], args.re[1], int(args.re[2]))
    im = np.linspace(args.im[0], args.im[1], int(args.im[2]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("re_tau", "im_tau", "re_value", "im_value"))
    ok = True
    for y in im:
        for x in re:
            tau = complex(x, y)
            try:
                v = complex(ecalle_kernel(spec, tau, args.derivative))
            except HeatStokesError:
                v = complex(float("nan"), float("nan"))
                ok = False
            w.writerow((repr(float(x)), repr(float(y)), repr(v.real), repr(v.imag)))
    _emit(buf.getvalue(), args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", metavar="PATH",
                        help="scenario JSON file (repeatable)")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--tol", type=float, metavar="FLOAT",
                        help="override the scenario pass tolerance")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="rows evaluated concurrently (output order is fixed)")

    parser = argparse.ArgumentParser(prog="heatstokes",
                                     description="Lateral sums and Stokes jumps of "
                                                 "d_t^p u = d_z^q u.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sum", parents=[common], help="lateral sums in one direction")
    p.add_argument("--theta", type=float, help="direction in radians (default delta + eps_dir)")
    p.set_defaults(func=_cmd_sum)

    p = sub.add_parser("jump", parents=[common], help="closed-form jumps")
    p.set_defaults(func=_cmd_jump)

    p = sub.add_parser("validate", parents=[common], help="numeric against closed form")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("sweep", parents=[common], help="validation rows along one axis (CSV)")
    p.add_argument("--axis", choices=("t-modulus", "z-real", "eps_dir"))
    p.add_argument("--grid", type=float, nargs="*", help="axis values (default: scenario sweep)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("kernel", parents=[common], help="Ecalle kernel on a grid (CSV)")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--derivative", type=int, default=0)
    p.add_argument("--re", type=float, nargs=3, default=(-5.0, 5.0, 11),
                   metavar=("MIN", "MAX", "N"))
    p.add_argument("--im", type=float, nargs=3, default=(0.0, 0.0, 1),
                   metavar=("MIN", "MAX", "N"))
    p.add_argument("--method", choices=("auto", "series", "contour"), default="auto")
    p.set_defaults(func=_cmd_kernel)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except HeatStokesError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
