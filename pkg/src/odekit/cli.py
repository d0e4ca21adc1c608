"""Command-line harness: numeric tables, convergence studies and analytic solutions."""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from odekit.errors import (
    GridError, NumericBlowup, OdekitError, ParseError, Unclassified, UnsupportedIntegral,
    UnsupportedProblem,
)
from odekit.expr import evaluate, parse, to_text
from odekit.first_order import CLASS_NAMES, solve_rhs
from odekit.numeric import Ivp, Method, estimate_order, integrate_fixed, rhs_from_expr

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNSUPPORTED = 3
EXIT_BLOWUP = 4
EXIT_IO = 5
ANALYTIC_GATE = 1e-8

METHOD_NAMES = {m.value: m for m in Method}


class UsageError(Exception):
    pass


def _methods(text: str) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("at least one method is required")
    bad = [n for n in names if n not in METHOD_NAMES]
    if bad:
        raise UsageError(f"unknown method(s): {', '.join(bad)}; choose from euler, heun, rk4")
    return [METHOD_NAMES[n] for n in names]


def _fmt(v: float) -> str:
    return f"{v:.15f}"


def _stride(report_every: float, h: float) -> int:
    k = round(report_every / h)
    if k < 1 or abs(k * h - report_every) > 1e-9 * report_every:
        raise UsageError(f"--report-every {report_every} is not a multiple of h = {h}")
    return k


def _ivp(args) -> Ivp:
    if not args.xend > args.x0:
        raise UsageError("--xend must exceed --x0")
    f = parse(args.rhs)
    try:
        return Ivp(rhs_from_expr(f), args.x0, args.y0, args.xend)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _exact(args):
    """Exact solution as a function of x: --exact, else derived analytically."""
    if args.exact:
        e = parse(args.exact)
    else:
        _, sol = solve_rhs(parse(args.rhs), (args.x0, args.y0))
        e = sol.expression
    return lambda x: evaluate(e, {"x": x})


def _steps(args) -> list:
    hs = args.h or [0.1]
    if any(not h > 0 for h in hs):
        raise UsageError("every --h must be positive")
    return hs


def _run_all(ivp: Ivp, methods: list, hs: list) -> list:
    """One {method: trajectory} per h; runs in parallel, results kept in --h order."""
    def run(h):
        return {m: integrate_fixed(ivp, m, h) for m in methods}

    with ThreadPoolExecutor() as pool:
        return list(pool.map(run, hs))


def _table(ivp, methods, h, trajectories, exact, report_every) -> list:
    k = _stride(report_every, h)
    header = ["x"] + (["exact"] if exact else [])
    for m in methods:
        header += [m.value] + ([f"{m.value}_abs_err"] if exact else [])
    lines = [",".join(header)]
    n = len(next(iter(trajectories.values())).xs)
    for r in range(0, n, k):
        x = trajectories[methods[0]].xs[r]
        row = [_fmt(x)]
        ex = exact(x) if exact else None
        if exact:
            row.append(_fmt(ex))
        for m in methods:
            y = trajectories[m].ys[r]
            row.append(_fmt(y))
            if exact:
                row.append(_fmt(abs(ex - y)))
        lines.append(",".join(row))
    return lines


def _write_blocks(blocks: list, hs: list, out: Optional[str]):
    if out is None:
        sys.stdout.write("\n\n".join("\n".join(b) for b in blocks) + "\n")
        return
    path = Path(out)
    if len(blocks) == 1:
        targets = [path]
    else:
        targets = [path.with_name(f"{path.stem}_h{h:g}{path.suffix}") for h in hs]
    for target, block in zip(targets, blocks):
        with open(target, "w", newline="\n") as fh:
            fh.write("\n".join(block) + "\n")


def cmd_compare(args) -> int:
    ivp = _ivp(args)
    methods = _methods(args.methods)
    hs = _steps(args)
    exact = _exact(args)
    runs = _run_all(ivp, methods, hs)
    blocks = [_table(ivp, methods, h, t, exact, args.report_every) for h, t in zip(hs, runs)]
    _write_blocks(blocks, hs, args.out)
    return EXIT_OK


def cmd_solve_numeric(args) -> int:
    ivp = _ivp(args)
    methods = _methods(args.methods)
    hs = _steps(args)
    runs = _run_all(ivp, methods, hs)
    blocks = [_table(ivp, methods, h, t, None, args.report_every) for h, t in zip(hs, runs)]
    _write_blocks(blocks, hs, args.out)
    return EXIT_OK


def _order_text(v: float) -> str:
    if math.isinf(v):
        return "inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.6f}"


def cmd_convergence(args) -> int:
    ivp = _ivp(args)
    methods = _methods(args.methods)
    hs = _steps(args)
    if len(hs) < 2:
        raise UsageError("convergence needs at least two --h values")
    exact = _exact(args)
    k = round((args.xend - args.x0) / args.report_every)
    at = [args.x0 + i * args.report_every for i in range(k + 1)]
    at = [x for x in at if x <= args.xend + 1e-12]
    lines = ["method,h,max_abs_err,local_order"]
    for m in methods:
        try:
            report = estimate_order(ivp, m, hs, exact, at)
        except (GridError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        for i, (h, err) in enumerate(report.pairs):
            order = "" if i == 0 else _order_text(report.local_orders[i - 1])
            lines.append(f"{m.value},{h:g},{err:.5e},{order}")
        lines.append(f"{m.value},mean,,{_order_text(report.estimated_order)}")
    _write_blocks([lines], hs[:1], args.out)
    return EXIT_OK


def cmd_solve_analytic(args) -> int:
    rhs = parse(args.rhs)
    ic = (args.x0, args.y0) if args.y0 is not None else None
    y1 = parse(args.y1) if args.y1 else None
    try:
        cls, sol = solve_rhs(rhs, ic, y1)
    except Unclassified as exc:
        sys.stderr.write(f"unclassified: {exc}\ntry: odekit solve-numeric --rhs ... \n")
        return EXIT_UNSUPPORTED
    name = CLASS_NAMES[type(cls)]
    lines = [f"class: {name}", f"method: {sol.method}", f"kind: {sol.kind}"]
    if sol.expression is not None:
        lines.append(f"y = {to_text(sol.expression)}")
        lines.append(f"residual: {sol.residual:.3e}")
    else:
        lines.append(f"implicit: {to_text(sol.implicit)} = C")
    lines += [f"note: {n}" for n in sol.notes]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if sol.expression is None:
        return EXIT_UNSUPPORTED
    return EXIT_OK if sol.residual < ANALYTIC_GATE else EXIT_UNSUPPORTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odekit", description="ODE solvers: numeric tables and analytic methods")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, numeric=True, default_methods="euler,rk4"):
        p.add_argument("--rhs", required=True, help="right-hand side f(x, y) of dy/dx = f")
        p.add_argument("--x0", type=float, default=0.0)
        p.add_argument("--out", help="output file (default: standard output)")
        if numeric:
            p.add_argument("--y0", type=float, required=True)
            p.add_argument("--xend", type=float, default=1.0)
            p.add_argument("--h", type=float, action="append", help="step length (repeatable)")
            p.add_argument("--methods", default=default_methods, help="comma list of euler, heun, rk4")
            p.add_argument("--report-every", dest="report_every", type=float, default=0.1)

    p = sub.add_parser("compare", help="numeric trajectories against an exact solution")
    common(p)
    p.add_argument("--exact", help="exact solution y(x); derived analytically when omitted")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convergence", help="errors and empirical orders under step halving")
    common(p, default_methods="euler,heun,rk4")
    p.add_argument("--exact", help="exact solution y(x); derived analytically when omitted")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("solve-numeric", help="numeric trajectories only")
    common(p)
    p.set_defaults(func=cmd_solve_numeric)

    p = sub.add_parser("solve-analytic", help="classify and solve dy/dx = f analytically")
    common(p, numeric=False)
    p.add_argument("--y0", type=float, help="initial value at --x0 (general solution if omitted)")
    p.add_argument("--y1", help="known particular solution (Riccati equations)")
    p.set_defaults(func=cmd_solve_analytic)
    return parser


VALUE_FLAGS = {"--rhs", "--exact", "--y1", "--x0", "--y0", "--xend", "--h", "--report-every"}


def _attach_values(argv: list) -> list:
    """Turn ``--rhs -6*y`` into ``--rhs=-6*y`` so values starting with '-' are not read as flags."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_attach_values(argv))
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except NumericBlowup as exc:
        sys.stderr.write(f"numeric blowup: {exc}\n")
        return EXIT_BLOWUP
    except (Unclassified, UnsupportedIntegral, UnsupportedProblem) as exc:
        sys.stderr.write(f"unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except OdekitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
