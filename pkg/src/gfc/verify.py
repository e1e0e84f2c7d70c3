"""Residual suites for the fundamental theorems, semigroup and reductions.

Every check returns a :class:`ResidualReport`. Nested operators are
evaluated lazily (the inner operator is sampled at the nodes of the outer
rule), so residuals measure quadrature error only. Inner integrals that miss
their tolerance turn the affected grid points inconclusive.
"""

from __future__ import annotations

import json
import math
import warnings
from collections.abc import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_fn

from .errors import DomainError, ToleranceNotMetError
from .functions import ExprFunction, FunctionHandle, TabulatedFunction, as_function
from .kernels import (
    KernelPair,
    KernelTerm,
    SingularKernel,
    _const,
    convolve_kernels,
    default_catalog,
    power_kernel,
    power_law_pair,
    sonin_certify,
    tempered_pair,
)
from .monotone import MonotoneMap, builtin_map, g_monomial
from .operators import (
    _boundary_values,
    _FailureLog,
    ek_integral_handle,
    caputo_handle,
    erdelyi_kober,
    gfd_caputo,
    gfd_rl,
    gfi,
    integral_handle,
    kernel_integral,
    rl_handle,
)
from .quadrature import QuadBudget, default_budget
from .reports import ResidualReport, reports_table
from .specialfns import gamma

__all__ = [
    "ResidualReport",
    "BATTERY_VERSION",
    "function_battery",
    "default_grid",
    "check_sonin",
    "check_ft1",
    "check_ft2",
    "check_semigroup",
    "check_reduction_suite",
    "run_suite",
    "SUITES",
    "semigroup_kernel",
    "ek_integral_oracle",
    "reports_table",
    "reports_json",
]

BATTERY_VERSION = 1
MONOMIAL_EXPONENTS = (0.3, 0.7, 1.0, 2.0)
TABULATED_SAMPLES = 13

Side = str


def default_grid(g: MonotoneMap, n: int = 12) -> np.ndarray:
    a, b = g.interval
    return a + (b - a) * (np.arange(n) + 0.5) / n


def function_battery(g: MonotoneMap, side: Side = "left") -> list[tuple[str, FunctionHandle]]:
    """The fixed test functions: g-monomials, sin, exp and a tabulated series."""
    a, b = g.interval
    out: list[tuple[str, FunctionHandle]] = []
    for beta in MONOMIAL_EXPONENTS:
        out.append((f"g-monomial^{beta:g}", g_monomial(g, beta, side)))
    out.append(("sin", ExprFunction("sin(x)", (a, b))))
    out.append(("exp", ExprFunction("exp(x)", (a, b))))
    t = np.linspace(a, b, TABULATED_SAMPLES)
    y = 1.0 + 0.5 * np.cos(2.0 * (t - a) / (b - a)) + (t - a) / (b - a)
    out.append(("tabulated", TabulatedFunction(t, y, label="tabulated series")))
    return out


def _config(identity: str, pair, g: MonotoneMap, f: FunctionHandle, budget: QuadBudget, **extra) -> dict:
    if isinstance(pair, KernelPair):
        pinfo = pair.fingerprint()
    elif isinstance(pair, SingularKernel):
        pinfo = {"kernel": pair.label}
    else:
        pinfo = {"kernels": [k.label for k in pair]}
    cfg = {
        "identity": identity,
        "pair": pinfo,
        "map": g.fingerprint(),
        "f": f.label,
        "budget": {"order": budget.order, "tol": budget.tol, "max_subdivisions": budget.max_subdivisions},
        "battery_version": BATTERY_VERSION,
    }
    cfg.update(extra)
    return cfg


def _pointwise(compute: Callable[[np.ndarray], tuple], grid: np.ndarray, log: _FailureLog):
    """Run *compute* on the grid; attribute inner failures to single points."""
    before = log.count
    v, e, ok = compute(grid)
    if log.count == before:
        return v, e, ok
    v, e, ok = v.copy(), e.copy(), ok.copy()
    for i, x in enumerate(grid):
        c0 = log.count
        vi, ei, oki = compute(np.array([x]))
        v[i], e[i] = vi[0], ei[0]
        ok[i] = bool(oki[0]) and log.count == c0
    return v, e, ok


def _anchor(g: MonotoneMap, side: Side) -> float:
    return g.a if side == "left" else g.b


def _derivative_values(kind: str, K: SingularKernel, g: MonotoneMap, F: FunctionHandle, grid, side,
                       path, budget, log):
    """RL or Caputo derivative of a (possibly lazy) handle, outer level vectorized."""
    sign = 1.0 if side == "left" else -1.0
    dF = F.derivative()

    def compute(xs):
        v, e, ok = kernel_integral(K, g, dF, xs, side, path, budget, jac=False)
        v = sign * v
        if kind == "RL":
            bv, _ = _boundary_values(K, g, F, xs, side)
            v = v + bv
        return v, e, ok

    return _pointwise(compute, np.asarray(grid, dtype=float), log)


# {{{ checks


def check_sonin(pair: KernelPair, grid_size: int = 64, tol: float = 1e-7,
                budget: QuadBudget | None = None) -> ResidualReport:
    return sonin_certify(pair, pair.length, grid_size=grid_size, tol=tol, budget=budget)


def check_ft1(pair: KernelPair | tuple[SingularKernel, SingularKernel], g: MonotoneMap, f,
              kind: str = "RL", grid=None, tol: float = 1e-5, *, side: Side = "left",
              path: str = "direct", budget: QuadBudget | None = None) -> ResidualReport:
    """Residual of ``D_K I_M f - f`` (RL) or ``D*_K I_M f - f`` (Caputo)."""
    if kind not in ("RL", "Caputo"):
        raise ValueError(f"kind must be 'RL' or 'Caputo', got {kind!r}")
    M, K = (pair.M, pair.K) if isinstance(pair, KernelPair) else pair
    budget = budget or default_budget()
    f = as_function(f, g.interval)
    grid = default_grid(g) if grid is None else np.asarray(grid, dtype=float)
    log = _FailureLog()
    F = integral_handle(M, g, f, side, path, budget, log)
    v, e, ok = _derivative_values(kind, K, g, F, grid, side, path, budget, log)
    r = v - f(grid)
    name = f"FT1-{kind} ({side})"
    return ResidualReport.build(name, grid, r, tol, ~ok,
                                _config(name, pair, g, f, budget, side=side, kind=kind, path=path, tol=tol),
                                {"max_error_estimate": float(np.max(e)) if e.size else 0.0})


def check_ft2(pair: KernelPair | tuple[SingularKernel, SingularKernel], g: MonotoneMap, f,
              kind: str = "Caputo", side: Side = "left", grid=None, tol: float = 1e-5, *,
              range_restricted: bool | None = None, path: str = "direct",
              budget: QuadBudget | None = None) -> ResidualReport:
    """Residual of ``I_M D*_K f - (f - f(anchor))`` or ``I_M D_K f - f``.

    For the RL kind the check runs by default on ``I_M f`` (the given ``f``
    acts as the density), which lies in the range of the integral operator;
    pass ``range_restricted=False`` to measure the residual on ``f`` itself.
    The right-sided Caputo target is ``f(x) - f(b)``, as follows from the
    sign in the definition of the right-sided derivative.
    """
    if kind not in ("RL", "Caputo"):
        raise ValueError(f"kind must be 'RL' or 'Caputo', got {kind!r}")
    M, K = (pair.M, pair.K) if isinstance(pair, KernelPair) else pair
    budget = budget or default_budget()
    h = as_function(f, g.interval)
    grid = default_grid(g) if grid is None else np.asarray(grid, dtype=float)
    log = _FailureLog()
    if range_restricted is None:
        range_restricted = kind == "RL"
    target_fn = integral_handle(M, g, h, side, path, budget, log) if range_restricted else h

    if kind == "Caputo":
        D = caputo_handle(K, g, target_fn, side, path, budget, log)
    else:
        D = rl_handle(K, g, target_fn, side, path, budget, log)

    def compute(xs):
        return kernel_integral(M, g, D, xs, side, path, budget)

    v, e, ok = _pointwise(compute, grid, log)
    fx = target_fn(grid)
    details = {"max_error_estimate": float(np.max(e)) if e.size else 0.0}
    if kind == "Caputo":
        fa = float(target_fn(_anchor(g, side)))
        target = fx - fa
        if side == "right":
            details["residual_vs_reversed_sign_target"] = float(np.max(np.abs(v - (fa - fx))))
    else:
        target = fx
    r = v - target
    name = f"FT2-{kind} ({side}{', range-restricted' if kind == 'RL' and range_restricted else ''})"
    return ResidualReport.build(name, grid, r, tol, ~ok,
                                _config(name, pair, g, h, budget, side=side, kind=kind, path=path, tol=tol,
                                        range_restricted=bool(range_restricted)),
                                details)


def _first_kernel(k) -> SingularKernel:
    return k.M if isinstance(k, KernelPair) else k


def _power_constant(k: SingularKernel) -> tuple[float, float] | None:
    if len(k.terms) == 1 and hasattr(k.terms[0].G, "constant"):
        return k.terms[0].exponent, k.terms[0].G.constant
    return None


def semigroup_kernel(k1: SingularKernel, k2: SingularKernel, budget: QuadBudget | None = None) -> SingularKernel:
    """``k1 * k2``: closed form for pure power kernels, numerical otherwise."""
    p1, p2 = _power_constant(k1), _power_constant(k2)
    if p1 is not None and p2 is not None:
        (e1, c1), (e2, c2) = p1, p2
        c = c1 * c2 * float(beta_fn(e1 + 1.0, e2 + 1.0))
        term = KernelTerm(e1 + e2 + 1.0, _const(c), f"{k1.label}*{k2.label}")
        return SingularKernel((term,), min(k1.length, k2.length), k1.dimension, f"{k1.label}*{k2.label}")
    return convolve_kernels(k1, k2, budget)


def check_semigroup(pair1, pair2, g: MonotoneMap, f, grid=None, tol: float = 1e-6, *,
                    side: Side = "left", path: str = "direct", budget: QuadBudget | None = None,
                    product: SingularKernel | None = None) -> ResidualReport:
    """Residual of ``I_{M1} I_{M2} f - I_{M1*M2} f``."""
    k1, k2 = _first_kernel(pair1), _first_kernel(pair2)
    budget = budget or default_budget()
    f = as_function(f, g.interval)
    grid = default_grid(g) if grid is None else np.asarray(grid, dtype=float)
    k12 = product if product is not None else semigroup_kernel(k1, k2, budget)
    log = _FailureLog()
    inner = integral_handle(k2, g, f, side, path, budget, log)

    def compute(xs):
        return kernel_integral(k1, g, inner, xs, side, path, budget)

    lhs, e1, ok1 = _pointwise(compute, grid, log)
    rhs, e2, ok2 = kernel_integral(k12, g, f, grid, side, path, budget)
    name = f"semigroup ({side})"
    return ResidualReport.build(name, grid, lhs - rhs, tol, ~(ok1 & ok2),
                                _config(name, (k1, k2), g, f, budget, side=side, path=path, tol=tol,
                                        product=k12.label),
                                {"max_error_estimate": float(np.max(e1 + e2)) if grid.size else 0.0})


# }}}


# {{{ reductions


def _relerr(v, ref):
    return (np.asarray(v) - ref) / np.maximum(1.0, np.abs(ref))


def _reduction_a(grid_n: int, tol: float, budget: QuadBudget) -> list[ResidualReport]:
    g = builtin_map("identity", (0.0, 1.0))
    f = ExprFunction("1 + sin(2*x)", (0.0, 1.0))
    grid = default_grid(g, grid_n)
    reports = []
    for pair in (power_law_pair(0.5, certify=False), tempered_pair(0.3, 2.0)):
        for op_name, op, kern in (("GFI", gfi, pair.M), ("GFD-Caputo", gfd_caputo, pair.K),
                                  ("GFD-RL", gfd_rl, pair.K)):
            plain = op(kern, g, f, grid, "left", "plain", budget)
            worst = np.zeros(grid.shape)
            ok = plain.converged.copy()
            for path in ("direct", "conjugated"):
                res = op(kern, g, f, grid, "left", path, budget)
                worst = np.maximum(worst, np.abs(res.values - plain.values))
                ok &= res.converged
            name = f"A: identity map vs plain, {op_name}, {pair.family}"
            reports.append(ResidualReport.build(name, grid, worst, tol, ~ok,
                                                _config(name, pair, g, f, budget, tol=tol)))
    return reports


def _reduction_b(grid_n: int, tol: float, budget: QuadBudget) -> list[ResidualReport]:
    reports = []
    g = builtin_map("power", (0.0, 1.0), sigma=2.0)
    grid = 0.2 + 0.8 * (np.arange(grid_n) + 0.5) / grid_n
    for alpha, beta in ((0.5, 0.7), (0.3, 2.0)):
        f = g_monomial(g, beta)
        K = power_kernel(1.0 - alpha)
        res = gfd_caputo(K, g, f, grid, budget=budget)
        ref = gamma(beta + 1) / gamma(beta - alpha + 1) * (grid**2) ** (beta - alpha)
        name = f"B: Caputo closed form, alpha={alpha:g}, beta={beta:g}, g=x^2"
        reports.append(ResidualReport.build(name, grid, _relerr(res.values, ref), 1e-7, ~res.converged,
                                            _config(name, K, g, f, budget, tol=1e-7)))
    # alpha -> 1: both derivatives approach f'/g'
    f = ExprFunction("x^3", (0.0, 1.0))
    K = power_kernel(0.001)
    ref = 1.5 * grid
    for label, op in (("Caputo", gfd_caputo), ("RL", gfd_rl)):
        res = op(K, g, f, grid, budget=budget)
        name = f"B: alpha=0.999 {label} vs f'/g', f=x^3, g=x^2"
        reports.append(ResidualReport.build(name, grid, (res.values - ref) / ref, 0.02, ~res.converged,
                                            _config(name, K, g, f, budget, tol=0.02)))
    return reports


def _reduction_c(grid_n: int, tol: float, budget: QuadBudget) -> list[ResidualReport]:
    a, b = 1.0, math.e
    g = builtin_map("hadamard", (a, b))
    grid = default_grid(g, grid_n)
    alpha, beta = 0.4, 0.9
    f = g_monomial(g, beta)
    lg = np.log(grid / a)
    reports = []
    res = gfd_caputo(power_kernel(1 - alpha), g, f, grid, budget=budget)
    ref = gamma(beta + 1) / gamma(beta - alpha + 1) * lg ** (beta - alpha)
    name = "C: Hadamard Caputo closed form, alpha=0.4, beta=0.9"
    reports.append(ResidualReport.build(name, grid, _relerr(res.values, ref), 1e-7, ~res.converged,
                                        _config(name, power_kernel(1 - alpha), g, f, budget, tol=1e-7)))
    res = gfi(power_kernel(alpha), g, f, grid, budget=budget)
    ref = gamma(beta + 1) / gamma(alpha + beta + 1) * lg ** (alpha + beta)
    name = "C: Hadamard integral closed form, alpha=0.4, beta=0.9"
    reports.append(ResidualReport.build(name, grid, _relerr(res.values, ref), 1e-7, ~res.converged,
                                        _config(name, power_kernel(alpha), g, f, budget, tol=1e-7)))
    return reports


def ek_integral_oracle(alpha: float, sigma: float, eta: float, f: FunctionHandle, x: float, a: float,
                       budget: QuadBudget | None = None) -> float:
    """The classical Erdelyi-Kober integral written out, by QUADPACK's algebraic-weight rule."""
    budget = budget or QuadBudget(tol=1e-11)
    # (x^s - u^s)^(alpha-1) = (x-u)^(alpha-1) * r(u)^(alpha-1); u^(s*eta+s-1) is a weight too when a = 0
    p0 = sigma * eta + sigma - 1 if a == 0 else 0.0

    def integrand(u):
        d = x - u
        if d <= 0:
            r = sigma * x ** (sigma - 1)
        elif 2 * u < x:
            r = (x**sigma - u**sigma) / d
        else:
            r = -(x**sigma) * math.expm1(sigma * math.log1p(-d / x)) / d
        lead = 1.0 if a == 0 else u ** (sigma * eta + sigma - 1)
        return lead * r ** (alpha - 1) * float(f(u))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, a, x, weight="alg", wvar=(p0, alpha - 1),
                                  epsabs=0.0, epsrel=budget.tol, limit=200)
    if not err <= 100 * budget.tol * abs(val):
        raise ToleranceNotMetError(f"Erdelyi-Kober oracle at x = {x}: error {err:.2e}", val, err)
    return sigma * x ** (-sigma * (alpha + eta)) / gamma(alpha) * val


def _reduction_d(grid_n: int, tol: float, budget: QuadBudget) -> list[ResidualReport]:
    a, b = 0.0, 1.0
    alpha, sigma, eta = 0.5, 2.0, 0.25
    f = ExprFunction("x", (a, b))
    grid = 0.1 + 0.9 * (np.arange(grid_n) + 0.5) / grid_n
    res = erdelyi_kober(alpha, sigma, eta, f, grid, (a, b), "integral", budget=budget)
    ref = np.array([ek_integral_oracle(alpha, sigma, eta, f, x, a) for x in grid])
    name = "D: Erdelyi-Kober integral vs classical form"
    reports = [ResidualReport.build(name, grid, _relerr(res.values, ref), 1e-7, ~res.converged,
                                    _config(name, power_kernel(alpha), builtin_map("power", (a, b), sigma=sigma),
                                            f, budget, tol=1e-7, eta=eta))]
    # derivative of the integral recovers f
    log = _FailureLog()
    phi = ek_integral_handle(alpha, sigma, eta, f, (a, b), budget=budget, log=log)
    res = erdelyi_kober(alpha, sigma, eta, phi, grid, (a, b), "derivative", budget=budget)
    bad = ~res.converged | (log.count > 0)
    name = "D: Erdelyi-Kober derivative of integral = f"
    reports.append(ResidualReport.build(name, grid, _relerr(res.values, f(grid)), 1e-7, bad,
                                        _config(name, power_kernel(1 - alpha), builtin_map("power", (a, b), sigma=sigma),
                                                f, budget, tol=1e-7, eta=eta)))
    return reports


def check_reduction_suite(grid=12, tol: float = 1e-10, budget: QuadBudget | None = None) -> list[ResidualReport]:
    """Fixed battery of special-case reductions A-D.

    ``tol`` applies to the identity-map comparison (A); the closed-form and
    limit checks carry their own tolerances.
    """
    budget = budget or default_budget()
    n = int(grid) if np.ndim(grid) == 0 else len(grid)
    return (_reduction_a(n, tol, budget) + _reduction_b(n, tol, budget)
            + _reduction_c(n, tol, budget) + _reduction_d(n, tol, budget))


# }}}


def _user_functions(g: MonotoneMap, side: Side, functions: Sequence | None):
    if functions is None:
        return function_battery(g, side)
    return [(str(f), as_function(f, g.interval)) for f in functions]


SUITES = ("sonin", "ft1", "ft2", "semigroup", "reductions", "all")


def run_suite(which: str = "all", catalog: Sequence[KernelPair] | None = None,
              maps: Sequence[MonotoneMap] | None = None, tol: float = 1e-5,
              budget: QuadBudget | None = None, grid_n: int = 8,
              functions: Sequence | None = None) -> list[ResidualReport]:
    """Run a named suite over the catalog and battery, returning all reports.

    ``functions`` (expressions or handles) replaces the fixed battery; for the
    range-restricted FT2-RL check they serve as the inner ``h``.
    """
    if which not in SUITES:
        raise DomainError(f"unknown suite {which!r}; expected one of {', '.join(SUITES)}")
    budget = budget or default_budget()
    catalog = list(catalog) if catalog is not None else default_catalog()
    maps = list(maps) if maps is not None else [builtin_map("identity", (0.0, 1.0)),
                                                 builtin_map("hadamard", (1.0, math.e))]
    out: list[ResidualReport] = []
    if which in ("sonin", "all"):
        out += [check_sonin(p) for p in catalog]
    if which in ("ft1", "all"):
        for pair in catalog:
            for g in maps:
                grid = default_grid(g, grid_n)
                for side in ("left", "right"):
                    for _, f in _user_functions(g, side, functions):
                        for kind in ("RL", "Caputo"):
                            out.append(check_ft1(pair, g, f, kind, grid, tol, side=side, budget=budget))
    if which in ("ft2", "all"):
        for pair in catalog:
            for g in maps:
                grid = default_grid(g, grid_n)
                for side in ("left", "right"):
                    for _, f in _user_functions(g, side, functions):
                        out.append(check_ft2(pair, g, f, "Caputo", side, grid, tol, budget=budget))
                    inner = functions if functions is not None else ["cos(x)"]
                    for h in inner:
                        out.append(check_ft2(pair, g, as_function(h, g.interval), "RL", side, grid, tol,
                                             budget=budget))
    if which in ("semigroup", "all"):
        couples = list(zip(catalog[::2], catalog[2::2])) or [(catalog[0], catalog[0])]
        for g in maps:
            grid = default_grid(g, grid_n)
            fs = [f for _, f in _user_functions(g, "left", functions)] if functions is not None \
                else [ExprFunction("1 + x", g.interval)]
            for f in fs:
                span = max(1.0, g.gb - g.ga)
                out.append(check_semigroup(power_kernel(0.3, span), power_kernel(0.4, span), g, f, grid, 1e-7,
                                           budget=budget))
                for p1, p2 in couples:
                    out.append(check_semigroup(p1, p2, g, f, grid, tol, budget=budget))
    if which in ("reductions", "all"):
        out += check_reduction_suite(grid_n, budget=budget)
    return out


def reports_json(reports: Sequence[ResidualReport], indent: int | None = 2) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=indent, sort_keys=True)
