"""Command-line front end: ``eval``, ``table``, ``verify``, ``mc`` and ``zeros``.

Exit codes: 0 success, 1 a property check failed (or every table row
failed), 2 domain error or divergence, 3 tolerance not reached.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import io
import json
import math
import operator
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analysis, stochastic
from .core import (
    Divergent,
    Grid,
    KernelParams,
    Method,
    NumericalInstability,
    OutOfDomain,
    ToleranceUnreachable,
)
from .periodic_green import g_eval

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DOMAIN = 2
EXIT_TOLERANCE = 3

CSV_FIELDS = ["alpha", "c", "x", "value", "error_bound", "method", "rigorous"]

_FLAG = {
    "alpha": "--alpha",
    "c": "--c",
    "x": "--x",
    "p": "--p-max",
    "p_max": "--p-max",
    "n_samples": "--n",
    "resolution": "--resolution",
    "grid": "--grid-points",
    "method": "--method",
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_number(text: str) -> float:
    """A float or simple arithmetic on numbers and ``pi`` (``pi/2``, ``3*pi/4``)."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        return float(ev(ast.parse(text.strip().lower(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_values(text: str) -> List[float]:
    """A number, or ``a:b:n`` for ``n`` equally spaced points including both ends."""
    parts = text.split(":")
    if len(parts) == 1:
        return [parse_number(text)]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be a:b:n, got {text!r}")
    a, b = parse_number(parts[0]), parse_number(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"range count must be an integer, got {parts[2]!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("range count must be >= 1")
    if n == 1:
        return [a]
    return [float(v) for v in np.linspace(a, b, n)]


def _flatten(groups: Optional[Sequence[List[float]]]) -> List[float]:
    return [v for g in (groups or []) for v in g]


def fmt_float(v: float) -> str:
    """Shortest round-trip decimal; independent of locale."""
    return repr(float(v))


def record(params: KernelParams, x: float, gv) -> Dict:
    return {
        "alpha": params.alpha,
        "c": params.c,
        "x": float(x),
        "value": float(gv.value),
        "error_bound": float(gv.error_bound),
        "method": gv.method.value,
        "rigorous": bool(gv.rigorous),
    }


def records_csv(rows: List[Dict], extra: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS + list(extra))
    for r in rows:
        out = []
        for k in CSV_FIELDS + list(extra):
            v = r.get(k)
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(fmt_float(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _domain_message(exc: Exception) -> str:
    if isinstance(exc, OutOfDomain):
        flag = _FLAG.get(exc.parameter, exc.parameter)
        got = "" if exc.value is None else f", got {exc.value!r}"
        return f"OutOfDomain: {flag} must satisfy {exc.allowed}{got}"
    return str(exc)


def _fail(exc: Exception) -> int:
    if isinstance(exc, (OutOfDomain, Divergent)):
        print(_domain_message(exc), file=sys.stderr)
        return EXIT_DOMAIN
    if isinstance(exc, (ToleranceUnreachable, NumericalInstability)):
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    raise exc


def _workers(args) -> int:
    n = getattr(args, "parallel", None)
    if n is None:
        n = int(os.environ.get("FRACGREEN_THREADS", "1") or 1)
    return max(1, int(n))


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _method(args) -> Optional[Method]:
    return None if args.method is None else Method.parse(args.method)


# ---------------------------------------------------------------- commands


def cmd_eval(args) -> int:
    xs = _flatten(args.x)
    if not xs:
        raise OutOfDomain("x", "at least one value")
    params = KernelParams(args.alpha, args.c)
    method = _method(args)
    rows = [record(params, x, g_eval(params, x, method, args.tol)) for x in xs]
    sys.stdout.write(records_csv(rows) if args.format == "csv" else to_json(rows))
    return EXIT_OK


def _table_row(job):
    alpha, c, x, method, tol = job
    try:
        params = KernelParams(alpha, c)
        return record(params, x, g_eval(params, x, method, tol))
    except (OutOfDomain, Divergent, ToleranceUnreachable, NumericalInstability) as exc:
        return {"alpha": alpha, "c": c, "x": x, "error": f"{type(exc).__name__}: {_domain_message(exc)}"}


def cmd_table(args) -> int:
    alphas = sorted(set(_flatten(args.alpha)))
    cs = sorted(set(_flatten(args.c)))
    xs = sorted(set(_flatten(args.x)))
    method = _method(args)
    jobs = [(a, c, x, method, args.tol) for a in alphas for c in cs for x in xs]
    nw = _workers(args)
    if nw == 1:
        rows = [_table_row(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            rows = list(pool.map(_table_row, jobs))
    failed = any("error" in r for r in rows)
    if args.format == "csv":
        text = records_csv(rows, extra=("error",) if failed else ())
    else:
        text = to_json(rows)
    _emit(text, args.out)
    return EXIT_OK if any("error" not in r for r in rows) else EXIT_CHECK_FAILED


_SUITES = ("cm", "unimodal", "boundary", "cross", "factorization", "normalization")


def _run_suite(name, params, args):
    grid = Grid.interior(args.grid_points)
    if name == "cm":
        return analysis.check_complete_monotonicity(params, grid, args.p_max)
    if name == "unimodal":
        return analysis.check_unimodality(params, grid)
    if name == "boundary":
        return analysis.check_boundary_derivative(params)
    if name == "cross":
        return analysis.check_cross_method(params, Grid.interior(min(args.grid_points, 10)), args.cross_tol)
    if name == "factorization":
        return analysis.check_h_factorization(params, args.n_samples, stochastic.RngStream(args.seed, 0))
    return analysis.check_normalization(params)


def cmd_verify(args) -> int:
    params = KernelParams(args.alpha, args.c)
    if params.alpha > 2:
        raise OutOfDomain("alpha", f"0 < alpha <= 2 for the {args.suite} suite", params.alpha)
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    nw = _workers(args)
    if nw == 1:
        reports = [_run_suite(n, params, args) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            reports = list(pool.map(lambda n: _run_suite(n, params, args), names))
    _emit(to_json([r.to_dict() for r in reports]), args.out)
    code = EXIT_OK
    for r in reports:
        print(r.summary(), file=sys.stderr)
        if not r.passed and not r.informational:
            code = EXIT_CHECK_FAILED
    return code


def cmd_mc(args) -> int:
    params = KernelParams(args.alpha, args.c)
    rng = stochastic.RngStream(args.seed, args.stream)
    if args.estimator == "jtp":
        est = stochastic.mc_g_jtp(params, args.x, args.n, rng, _workers(args))
    else:
        est = stochastic.mc_g_poisson(params, args.x, args.n, rng, _workers(args))
    ref = g_eval(params, args.x, tol=1e-10)
    out = {
        "alpha": params.alpha,
        "c": params.c,
        "x": float(args.x),
        "estimator": Method.MC_JTP.value if args.estimator == "jtp" else Method.MC_POISSON.value,
        "mean": est.mean,
        "std_error": est.std_error,
        "n_samples": est.n_samples,
        "seed": est.seed,
        "stream_id": rng.stream_id,
        "reference": ref.value,
        "reference_method": ref.method.value,
        "standardized_deviation": est.deviation(ref.value),
    }
    if args.format == "json":
        sys.stdout.write(to_json(out))
    else:
        for k, v in out.items():
            sys.stdout.write(f"{k}={fmt_float(v) if isinstance(v, float) else v}\n")
    return EXIT_OK


def cmd_zeros(args) -> int:
    params = KernelParams(args.alpha, args.c)
    res = analysis.scan_zeros(params, args.resolution)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["root", "lo", "hi"])
        for r, (lo, hi) in zip(res.refined_roots, res.bracketing_intervals):
            w.writerow([fmt_float(r), fmt_float(lo), fmt_float(hi)])
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(to_json(res.to_dict()))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _load_config(path: Optional[str]) -> Dict[str, str]:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_string("[fracgreen]\n" + fh.read())
    return {k.replace("-", "_"): v for k, v in cp["fracgreen"].items()}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracgreen", description="Green function of c + (-Laplacian)^(alpha/2) on the circle.")
    ap.add_argument("--config", help="key=value file presetting defaults (tol, format, seed, ...)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate G at one or more points")
    p.add_argument("--alpha", type=parse_number, required=True)
    p.add_argument("--c", type=parse_number, required=True)
    p.add_argument("--x", type=parse_values, action="append", required=True, help="value or a:b:n; repeatable; 'pi' accepted")
    p.add_argument("--method", choices=["series", "periodized", "ml", "closed", "jtp", "poisson"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="evaluate on the Cartesian product of alpha, c and x values")
    p.add_argument("--alpha", type=parse_values, action="append", required=True)
    p.add_argument("--c", type=parse_values, action="append", required=True)
    p.add_argument("--x", type=parse_values, action="append", required=True)
    p.add_argument("--method", choices=["series", "periodized", "ml", "closed"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.add_argument("--parallel", type=int, help="worker threads (default FRACGREEN_THREADS or 1)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="run property checks and write a JSON report array")
    p.add_argument("--alpha", type=parse_number, required=True)
    p.add_argument("--c", type=parse_number, required=True)
    p.add_argument("--suite", choices=list(_SUITES) + ["all"], default="all")
    p.add_argument("--grid-points", type=int, default=50)
    p.add_argument("--p-max", type=int, default=6)
    p.add_argument("--cross-tol", type=float, default=1e-6)
    p.add_argument("--n-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--parallel", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo estimate of G(x) with a deterministic reference")
    p.add_argument("--alpha", type=parse_number, required=True)
    p.add_argument("--c", type=parse_number, required=True)
    p.add_argument("--x", type=parse_number, required=True)
    p.add_argument("--estimator", choices=["jtp", "poisson"], default="jtp")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--parallel", type=int)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("zeros", help="certified sign changes of G for 2 <= alpha <= 4")
    p.add_argument("--alpha", type=parse_number, required=True)
    p.add_argument("--c", type=parse_number, required=True)
    p.add_argument("--resolution", type=int, default=2000)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_zeros)
    return ap


def _apply_config(ap: argparse.ArgumentParser, cfg: Dict[str, str]):
    if not cfg:
        return
    for action in ap._subparsers._group_actions:
        for sp in action.choices.values():
            known = {a.dest: a for a in sp._actions}
            for key, raw in cfg.items():
                a = known.get(key)
                if a is None or a.required:
                    continue
                val = a.type(raw) if a.type is not None else raw
                if a.choices is not None and val not in a.choices:
                    raise SystemExit(f"config: {key}={raw!r} not one of {list(a.choices)}")
                sp.set_defaults(**{key: val})


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    pre, _ = ap.parse_known_args(argv)
    _apply_config(ap, _load_config(pre.config))
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OutOfDomain, Divergent, ToleranceUnreachable, NumericalInstability) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
