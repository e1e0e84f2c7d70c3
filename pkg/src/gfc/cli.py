"""Command-line interface: ``gfc eval``, ``gfc verify``, ``gfc kernels list``, ``gfc econ``.

Exit status is 0 on success, 1 when a computation fails or a check does not
pass, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import econ
from .errors import GFCError, ParseError
from .exprfn import Var, parse
from .functions import ExprFunction
from .kernels import KernelPair, catalog_json, default_catalog, make_pair, power_law_pair
from .monotone import MonotoneMap, builtin_map, make_monotone_map
from .operators import gfd_caputo, gfd_rl, gfi
from .quadrature import QuadBudget, default_budget
from .verify import SUITES, reports_json, run_suite

OPS = {"gfi": gfi, "caputo": gfd_caputo, "rl": gfd_rl}


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        self.flag = flag
        super().__init__(f"argument {flag}: {message}" if flag else message)


class _Parser(argparse.ArgumentParser):
    """Usage errors raise instead of exiting so that ``run`` owns the exit code."""

    def error(self, message):
        raise UsageError("", message)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


# {{{ argument helpers


def parse_kernel_spec(text: str) -> tuple[str, dict]:
    """``name:key=val,key=val`` -> ``(name, {key: float})``."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if not name:
        raise UsageError("--kernel", f"missing kernel name in {text!r}")
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError("--kernel", f"expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError("--kernel", f"non-numeric value in {item!r}") from None
    return name, params


def _kernel(text: str, default_length: float) -> KernelPair:
    name, params = parse_kernel_spec(text)
    length = params.pop("L", default_length)
    try:
        return make_pair(name, L=length, **params)
    except GFCError as exc:
        raise UsageError("--kernel", str(exc)) from None


def _interval(text: str, flag: str = "--interval") -> tuple[float, float]:
    parts = text.split(",")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise UsageError(flag, f"expected 'a,b', got {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise UsageError(flag, f"need finite a < b, got {text!r}")
    return a, b


def _map(text: str, interval: tuple[float, float]) -> MonotoneMap:
    """An expression in ``x``, or ``builtin:name[:key=val,...]``."""
    try:
        if text.startswith("builtin:"):
            name, params = parse_kernel_spec(text[len("builtin:"):])
            return builtin_map(name, interval, **params)
        if parse(text) == Var():
            return builtin_map("identity", interval)
        return make_monotone_map(text, interval)
    except (GFCError, UsageError) as exc:
        raise UsageError("--g", str(exc)) from None


def _function(text: str, interval: tuple[float, float], flag: str = "--f") -> ExprFunction:
    try:
        return ExprFunction(text, interval)
    except ParseError as exc:
        raise UsageError(flag, str(exc)) from None


def make_grid(interval: tuple[float, float], n: int, spacing: str = "uniform", side: str = "left") -> np.ndarray:
    """``n`` points in the interval, excluding the anchor endpoint of ``side``.

    Geometric spacing clusters the points toward the anchor, with offsets
    from ``1e-3`` to ``1`` times the interval length.
    """
    a, b = interval
    if n < 1:
        raise UsageError("--grid", f"grid count must be at least 1, got {n}")
    if spacing == "uniform":
        offsets = (b - a) * np.arange(1, n + 1) / n
    elif spacing == "geometric":
        offsets = (b - a) * (np.geomspace(1e-3, 1.0, n) if n > 1 else np.ones(1))
    else:
        raise UsageError("--spacing", f"unknown spacing {spacing!r}")
    xs = a + offsets if side == "left" else b - offsets[::-1]
    return np.clip(xs, a, b)


def _budget(args) -> QuadBudget:
    budget = default_budget()
    if getattr(args, "quad_tol", None) is not None:
        if not args.quad_tol > 0:
            raise UsageError("--quad-tol", "must be positive")
        budget = budget.with_tol(args.quad_tol)
    if getattr(args, "order", None) is not None:
        try:
            budget = QuadBudget(int(args.order), budget.tol, budget.max_subdivisions)
        except GFCError as exc:
            raise UsageError("--order", str(exc)) from None
    return budget


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# }}}


# {{{ subcommands


def cmd_eval(args) -> int:
    interval = _interval(args.interval)
    g = _map(args.g, interval)
    f = _function(args.f, interval)
    pair = _kernel(args.kernel, max(1.0, g.gb - g.ga))
    kernel = pair.M if args.op == "gfi" else pair.K
    xs = make_grid(interval, args.grid, args.spacing, args.side)
    try:
        res = OPS[args.op](kernel, g, f, xs, args.side, args.path, _budget(args))
    except GFCError as exc:
        if "path" in str(exc):
            raise UsageError("--path", str(exc)) from None
        raise
    if args.format == "json":
        doc = {
            "op": args.op, "side": args.side, "kernel": pair.fingerprint(), "g": args.g, "f": args.f,
            "interval": list(interval), "path": res.path,
            "rows": [{"x": float(x), "value": float(v), "err_estimate": float(e), "converged": bool(c)}
                     for x, v, e, c in zip(xs, res.values, res.errors, res.converged)],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["x,value,err_estimate"]
        lines += [f"{_fmt(x)},{_fmt(v)},{_fmt(e)}" for x, v, e in zip(xs, res.values, res.errors)]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    bad = np.nonzero(~res.converged)[0]
    if bad.size:
        i = int(bad[0])
        why = "diverges" if res.divergent[i] else "missed the quadrature tolerance"
        print(f"gfc: computation failed at x = {float(xs[i])!r}: {why} (error estimate {res.errors[i]:.3e})",
              file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    interval = _interval(args.interval) if args.interval else None
    if args.g and interval is None:
        raise UsageError("--interval", "required together with --g")
    maps = [_map(args.g, interval)] if args.g else None
    if interval is not None and not args.g:
        maps = [builtin_map("identity", interval)]
    span = max(1.0, *(m.gb - m.ga for m in maps)) if maps else 1.0
    catalog = [_kernel(k, span) for k in args.kernel] if args.kernel else None
    if catalog is None and span > 1.0:
        catalog = default_catalog(L=span)
    functions = None
    if args.f:
        dom = interval or (-math.inf, math.inf)
        functions = [_function(s, dom) for s in args.f]
    reports = run_suite(args.suite, catalog, maps, args.tol, _budget(args), args.grid, functions)
    if args.format == "json":
        text = reports_json(reports) + "\n"
    else:
        lines = ["identity,verdict,sup_norm,tolerance,points,inconclusive,fingerprint"]
        for r in reports:
            name = r.identity.replace('"', "'")
            lines.append(f'"{name}",{r.verdict},{_fmt(r.sup_norm)},{_fmt(r.tolerance)},{len(r.grid)},'
                         f"{len(r.inconclusive)},{r.fingerprint}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    failed = [r for r in reports if not r.passed]
    if failed:
        r = failed[0]
        print(f"gfc: {len(failed)} of {len(reports)} checks failed; first: {r.summary()}", file=sys.stderr)
        return 1
    return 0


def cmd_kernels(args) -> int:
    catalog = default_catalog(L=args.length)
    if args.format == "json":
        _emit(catalog_json(catalog) + "\n", args.out)
        return 0
    lines = ["name,parameters,p_M,p_K,certified_variant,provenance,residual"]
    for p in catalog:
        e = p.catalog_entry()
        params = ";".join(f"{k}={v:g}" for k, v in e["parameters"].items())
        lines.append(f"{e['name']},{params},{_fmt(e['p_M'])},{_fmt(e['p_K'])},{e['certified_variant']},"
                     f"{e['provenance'] or 'base'},{_fmt(e['residual'])}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _times(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError("--t", f"expected comma-separated numbers, got {text!r}") from None


def cmd_econ(args) -> int:
    try:
        series = econ.load_series(args.csv)
    except OSError as exc:
        raise UsageError("--csv", str(exc)) from None
    ts = _times(args.t)
    span = max(1.0, float(series.X[-1] - series.X[0]))
    if args.what == "elasticity":
        if series.X[0] > 0:
            span = max(1.0, float(np.log(series.X[-1] / series.X[0])))
        if args.kernel:
            pair = _kernel(args.kernel, span)
        elif args.alpha is not None:
            pair = power_law_pair(args.alpha, L=span)
        else:
            raise UsageError("--kernel", "elasticity needs --kernel or --alpha")
        spec = econ.MarginalSpec("general", pair=pair, window_start=args.window_start)
    else:
        pair = _kernel(args.kernel, span) if args.kernel else None
        try:
            spec = econ.MarginalSpec(args.mode, alpha=args.alpha, pair=pair, normalization=args.normalization,
                                     window_start=args.window_start)
        except GFCError as exc:
            raise UsageError("--mode", str(exc)) from None
    rows = econ.marginal_rows(series, spec, ts, budget=_budget(args), quantity=args.what)
    if args.format == "json":
        text = econ.rows_to_json(rows, spec, args.what) + "\n"
    else:
        text = econ.rows_to_csv(rows)
    _emit(text, args.out)
    return 0


# }}}


# {{{ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gfc", description="General fractional calculus with respect to a monotone map.")
    p.add_argument("--config", help="JSON file with default values for the subcommand's options")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, fmt=True):
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"))
            sp.add_argument("--out", help="output file (default: standard output)")
        sp.add_argument("--quad-tol", type=float, help="quadrature tolerance (overrides GFC_QUAD_TOL)")
        sp.add_argument("--order", type=int, help="base Gauss-Jacobi order")

    ev = sub.add_parser("eval", help="evaluate an operator on a grid")
    ev.add_argument("--op", choices=tuple(OPS))
    ev.add_argument("--side", choices=("left", "right"))
    ev.add_argument("--kernel", help="kernel pair, e.g. power:alpha=0.5 or ml:alpha=0.5,beta=0.7")
    ev.add_argument("--g", help="map g as an expression in x, or builtin:NAME[:key=val]")
    ev.add_argument("--f", help="function f as an expression in x")
    ev.add_argument("--interval", help="a,b")
    ev.add_argument("--grid", type=int, help="number of grid points")
    ev.add_argument("--spacing", choices=("uniform", "geometric"))
    ev.add_argument("--path", choices=("direct", "conjugated", "plain"))
    common(ev)

    ve = sub.add_parser("verify", help="run residual checks")
    ve.add_argument("suite", choices=SUITES)
    ve.add_argument("--kernel", action="append", help="kernel pair (repeatable; default: catalog)")
    ve.add_argument("--g", help="map g (default: identity on [0,1] and Hadamard on [1,e])")
    ve.add_argument("--f", action="append", help="test function (repeatable; default: fixed battery)")
    ve.add_argument("--interval", help="a,b")
    ve.add_argument("--tol", type=float, help="residual tolerance")
    ve.add_argument("--grid", type=int, help="grid points per check")
    common(ve)

    ke = sub.add_parser("kernels", help="kernel catalog")
    ke.add_argument("action", choices=("list",))
    ke.add_argument("--length", type=float, help="kernel support length L")
    ke.add_argument("--format", choices=("csv", "json"))
    ke.add_argument("--out")

    ec = sub.add_parser("econ", help="marginal values with memory for a t,X,Y series")
    ec.add_argument("what", choices=("marginal", "elasticity"))
    ec.add_argument("--csv", help="series file with header t,X,Y")
    ec.add_argument("--mode", choices=("standard", "fractional", "general"))
    ec.add_argument("--alpha", type=float)
    ec.add_argument("--kernel")
    ec.add_argument("--normalization", choices=("raw", "ratio"))
    ec.add_argument("--window-start", type=float)
    ec.add_argument("--t", help="evaluation time(s), comma-separated")
    common(ec)
    return p


DEFAULTS = {
    "eval": {"op": "gfi", "side": "left", "g": "x", "grid": 10, "spacing": "uniform", "path": "direct",
             "format": "csv"},
    "verify": {"tol": 1e-5, "grid": 8, "format": "csv"},
    "kernels": {"length": 1.0, "format": "csv"},
    "econ": {"mode": "fractional", "normalization": "raw", "format": "csv"},
}
REQUIRED = {
    "eval": ("kernel", "f", "interval"),
    "econ": ("csv", "t"),
}


def _apply_config(args, config: dict) -> None:
    known = vars(args)
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("command", "config"):
            raise UsageError("--config", f"unknown option {key!r} for '{args.command}'")
        if known[dest] is None:
            setattr(args, dest, value)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("", "a subcommand is required (eval, verify, kernels, econ)")
        if args.config:
            try:
                config = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise UsageError("--config", str(exc)) from None
            if not isinstance(config, dict):
                raise UsageError("--config", "expected a JSON object")
            _apply_config(args, config)
        for key, value in DEFAULTS[args.command].items():
            if getattr(args, key) is None:
                setattr(args, key, value)
        for key in REQUIRED.get(args.command, ()):
            if getattr(args, key) is None:
                raise UsageError(f"--{key}", "is required")
        handler = {"eval": cmd_eval, "verify": cmd_verify, "kernels": cmd_kernels, "econ": cmd_econ}
        return handler[args.command](args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"gfc: error: {exc}", file=sys.stderr)
        return 2
    except GFCError as exc:
        print(f"gfc: computation failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


# }}}
