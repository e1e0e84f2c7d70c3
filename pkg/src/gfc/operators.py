"""Integral and derivative operators of a kernel pair with respect to a map g.

For a kernel ``k`` and an increasing map ``g`` on ``[a, b]``::

    I_{a+} f(x) = int_a^x k(g(x) - g(u)) f(u) g'(u) du
    I_{b-} f(x) = int_x^b k(g(u) - g(x)) f(u) g'(u) du

The Caputo-type derivative of the pair (M, K) is the operator of ``K``
applied to ``f'/g'`` (with a sign flip on the right), and the
Riemann-Liouville type adds the boundary term ``K(g(x) - g(a)) f(a)``
(resp. ``K(g(b) - g(x)) f(b)``).

Two independent evaluation paths are provided: ``direct`` integrates in the
original variable ``u``, ``conjugated`` substitutes ``s = g(u)`` and
integrates ``f o g^{-1}`` against the plain convolution kernel. For the
identity map, ``plain`` skips g altogether.

Operators return :class:`OperatorFunction` handles when used lazily, so that
compositions such as ``I_M (D_K f)`` can be evaluated without tabulation:
the inner operator is simply evaluated at the nodes of the outer rule.
"""

from __future__ import annotations

import threading
import time
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, MissingDerivativeError
from .functions import (
    CallableFunction,
    Composed,
    FunctionHandle,
    LinearCombination,
    Product,
    TabulatedFunction,
    as_function,
)
from .kernels import KernelPair, KernelTerm, SingularKernel, power_kernel
from .monotone import MonotoneMap, builtin_map
from .quadrature import QuadBudget, default_budget, weighted_integral

__all__ = [
    "OperatorRequest",
    "OperatorResult",
    "OperatorFunction",
    "BoundaryTerm",
    "kernel_integral",
    "gfi",
    "gfd_caputo",
    "gfd_rl",
    "gfd_rl_fd",
    "evaluate_operator",
    "erdelyi_kober",
    "ek_integral_handle",
    "integral_handle",
    "caputo_handle",
    "rl_handle",
]

Side = Literal["left", "right"]
Path = Literal["direct", "conjugated", "plain"]
Kind = Literal["GFI", "GFD_RL", "GFD_Caputo"]

MIN_WINDOW_SAMPLES = 8


class TabulatedSparseWarning(UserWarning):
    pass


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")


def _check_path(path: str, g: MonotoneMap) -> None:
    if path not in ("direct", "conjugated", "plain"):
        raise DomainError(f"unknown path {path!r}")
    if path == "plain" and not g.is_identity:
        raise DomainError("the plain path is only available for the identity map")


# {{{ core integral


def _term_integral(term: KernelTerm, g: MonotoneMap, h: FunctionHandle, xs: np.ndarray,
                   side: str, path: str, budget: QuadBudget, jac: bool):
    """One kernel term against one function term.

    With ``jac`` the integrand carries ``g'(u)`` (integral operators);
    without it the density is ``h(u) du`` (Caputo form, ``h = f'``).
    """
    a, b = g.interval
    p = term.exponent
    G = term.G
    left = side == "left"
    anchor = a if left else b
    nu = 1.0 if path == "plain" else g.edge_order(anchor)
    q_u = h.edge_exponent(anchor)

    if path == "conjugated":
        q = q_u / nu if jac else (q_u - (nu - 1.0)) / nu
        gx = g.g.eval(xs)
        lo, hi = (np.full(xs.shape, g.ga), gx) if left else (gx, np.full(xs.shape, g.gb))
        knots = [float(g.g(c)) for c in h.breakpoints + g.g.breakpoints if a < c < b]

        def density(s):
            u = g.inverse(s)
            v = h.eval(u)
            return v if jac else v / g.gprime.eval(u)

        if left:
            def phi(idx, s, d_hi, d_lo):
                with np.errstate(divide="ignore", invalid="ignore"):
                    return G(d_hi) * density(s) / d_lo**q
        else:
            def phi(idx, s, d_hi, d_lo):
                with np.errstate(divide="ignore", invalid="ignore"):
                    return G(d_lo) * density(s) / d_hi**q
    else:
        q = q_u + (nu - 1.0) if (jac and path != "plain") else q_u
        lo, hi = (np.full(xs.shape, a), xs) if left else (xs, np.full(xs.shape, b))
        knots = sorted(set(h.breakpoints) | set(g.g.breakpoints))
        plain = path == "plain"

        def weight(u, v):
            return v if (plain or not jac) else v * g.gprime.eval(u)

        if left:
            def phi(idx, s, d_hi, d_lo):
                x = xs[idx][:, None]
                delta = d_hi if plain else g.delta(x, s, d_hi)
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = 1.0 if plain else (delta / d_hi) ** p
                    return ratio * G(delta) * weight(s, h.eval(s)) / d_lo**q
        else:
            def phi(idx, s, d_hi, d_lo):
                x = xs[idx][:, None]
                delta = d_lo if plain else g.delta(s, x, d_lo)
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = 1.0 if plain else (delta / d_lo) ** p
                    return ratio * G(delta) * weight(s, h.eval(s)) / d_hi**q

    if not q > -1:
        raise DomainError(f"{h.label} is too singular at {anchor} (exponent {q} <= -1)")
    p_hi, p_lo = (p, q) if left else (q, p)
    return weighted_integral(phi, lo, hi, p_hi, p_lo, budget, knots)


def kernel_integral(
    kernel: SingularKernel,
    g: MonotoneMap,
    h: FunctionHandle,
    xs,
    side: Side = "left",
    path: Path = "direct",
    budget: QuadBudget | None = None,
    *,
    jac: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``int k(|g(x) - g(u)|) h(u) [g'(u)] du`` over ``[a, x]`` or ``[x, b]``.

    Returns values, error estimates and per-point convergence flags. The
    operator distributes over the terms of ``h`` and of ``k``.
    """
    _check_side(side)
    _check_path(path, g)
    budget = budget or default_budget()
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    a, b = g.interval
    span = b - a
    if np.any((xs < a - 1e-12 * span) | (xs > b + 1e-12 * span)):
        raise DomainError(f"evaluation points must lie in [{a}, {b}]")
    xs = np.clip(xs, a, b)
    values = np.zeros(xs.shape)
    errors = np.zeros(xs.shape)
    ok = np.ones(xs.shape, dtype=bool)
    for c, hterm in h.terms():
        if c == 0.0:
            continue
        for term in kernel.terms:
            res = _term_integral(term, g, hterm, xs, side, path, budget, jac)
            values += c * res.values
            errors += abs(c) * res.errors
            ok &= res.converged
    return values, errors, ok


# }}}


# {{{ lazy handles


def _anchor_value(f: FunctionHandle, anchor: float) -> float:
    """``f`` at the anchor endpoint; the RL/Caputo relation needs it finite."""
    q = f.edge_exponent(anchor)
    if q < 0:
        raise DomainError(f"{f.label} is unbounded at {anchor}; the boundary term is undefined")
    if q > 0:
        return 0.0
    v = float(f(anchor))
    if not np.isfinite(v):
        raise DomainError(f"{f.label}({anchor}) is not finite")
    return v


class _FailureLog:
    """Thread-safe counter of unconverged inner integrals."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.count = 0
        self.max_error = 0.0

    def record(self, errors: np.ndarray, ok: np.ndarray) -> None:
        with self._lock:
            self.count += int(np.count_nonzero(~ok))
            if errors.size:
                self.max_error = max(self.max_error, float(np.max(errors)))


class OperatorFunction(FunctionHandle):
    """``u -> int k(...) h [g'] du`` for a single kernel term, evaluated lazily."""

    def __init__(self, term: KernelTerm, kernel: SingularKernel, g: MonotoneMap, h: FunctionHandle,
                 side: str, path: str, budget: QuadBudget, jac: bool, log: _FailureLog):
        self.term = term
        self.kernel = SingularKernel((term,), kernel.length, kernel.dimension, term.label or kernel.label)
        self.map = g
        self.h = h
        self.side = side
        self.path = path
        self.budget = budget
        self.jac = jac
        self.log = log
        self.domain = g.interval
        tag = "I" if jac else "J"
        self.label = f"{tag}[{self.kernel.label}; {side}]({h.label})"
        self.breakpoints = tuple(sorted(set(h.breakpoints)))

    def eval(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        v, e, ok = kernel_integral(self.kernel, self.map, self.h, flat, self.side, self.path,
                                   self.budget, jac=self.jac)
        self.log.record(e, ok)
        return v.reshape(x.shape)

    def edge_exponent(self, point: float) -> float:
        g = self.map
        anchor = g.a if self.side == "left" else g.b
        if abs(point - anchor) > 1e-14 * max(1.0, abs(anchor)):
            return 0.0
        nu = g.edge_order(anchor)
        q_u = self.h.edge_exponent(anchor)
        q_s = q_u / nu if self.jac else (q_u - (nu - 1.0)) / nu
        return nu * (1.0 + self.term.exponent + q_s)

    @property
    def has_derivative(self) -> bool:
        return self.jac and self.h.has_derivative

    def derivative(self) -> FunctionHandle:
        if not self.jac:
            raise MissingDerivativeError(f"no derivative available for {self.label}")
        g = self.map
        left = self.side == "left"
        anchor = g.a if left else g.b
        boundary = _anchor_value(self.h, anchor)
        inner = OperatorFunction(self.term, self.kernel, g, self.h.derivative(), self.side, self.path,
                                 self.budget, False, self.log)
        parts: list[tuple[float, FunctionHandle]] = [(1.0, Product(g.gprime_handle, inner))]
        if boundary != 0.0:
            bt = BoundaryTerm(self.term, g, self.side, self.kernel.length)
            parts.append((boundary if left else -boundary, Product(g.gprime_handle, bt)))
        return LinearCombination(parts)


class BoundaryTerm(FunctionHandle):
    """``u -> k(g(u) - g(a))`` (left) or ``k(g(b) - g(u))`` (right) for one term."""

    def __init__(self, term: KernelTerm, g: MonotoneMap, side: str, length: float):
        self.term = term
        self.map = g
        self.side = side
        self.domain = g.interval
        self.label = f"{term.label or 'k'}(g-boundary; {side})"

    def distance(self, x: np.ndarray) -> np.ndarray:
        g = self.map
        if self.side == "left":
            return g.delta(x, np.full(np.shape(x), g.a), np.asarray(x) - g.a)
        return g.delta(np.full(np.shape(x), g.b), x, g.b - np.asarray(x))

    def eval(self, x: np.ndarray) -> np.ndarray:
        d = np.maximum(self.distance(np.asarray(x, dtype=float)), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.term(d)

    def edge_exponent(self, point: float) -> float:
        g = self.map
        anchor = g.a if self.side == "left" else g.b
        if abs(point - anchor) > 1e-14 * max(1.0, abs(anchor)):
            return 0.0
        return g.edge_order(anchor) * self.term.exponent

    @property
    def has_derivative(self) -> bool:
        return False


def _sum_over_terms(kernel: SingularKernel, make) -> FunctionHandle:
    return LinearCombination(tuple((1.0, make(t)) for t in kernel.terms))


def integral_handle(kernel: SingularKernel, g: MonotoneMap, f: FunctionHandle, side: Side = "left",
                    path: Path = "direct", budget: QuadBudget | None = None,
                    log: _FailureLog | None = None) -> FunctionHandle:
    """Lazy ``I_k f`` as a function handle (one sub-handle per kernel term)."""
    _check_side(side)
    _check_path(path, g)
    budget = budget or default_budget()
    log = log or _FailureLog()
    return _sum_over_terms(kernel, lambda t: OperatorFunction(t, kernel, g, f, side, path, budget, True, log))


def caputo_handle(kernel: SingularKernel, g: MonotoneMap, f: FunctionHandle, side: Side = "left",
                  path: Path = "direct", budget: QuadBudget | None = None,
                  log: _FailureLog | None = None) -> FunctionHandle:
    """Lazy Caputo-type derivative ``D*_k f``."""
    _check_side(side)
    _check_path(path, g)
    budget = budget or default_budget()
    log = log or _FailureLog()
    df = f.derivative()
    sign = 1.0 if side == "left" else -1.0
    return LinearCombination(tuple(
        (sign, OperatorFunction(t, kernel, g, df, side, path, budget, False, log)) for t in kernel.terms
    ))


def rl_handle(kernel: SingularKernel, g: MonotoneMap, f: FunctionHandle, side: Side = "left",
              path: Path = "direct", budget: QuadBudget | None = None,
              log: _FailureLog | None = None) -> FunctionHandle:
    """Lazy Riemann-Liouville type derivative: Caputo part plus boundary term."""
    cap = caputo_handle(kernel, g, f, side, path, budget, log)
    fa = _anchor_value(f, g.a if side == "left" else g.b)
    if fa == 0.0:
        return cap
    parts = [(1.0, cap)] + [(fa, BoundaryTerm(t, g, side, kernel.length)) for t in kernel.terms]
    return LinearCombination(parts)


# }}}


# {{{ requests


@dataclass(frozen=True)
class OperatorRequest:
    kind: Kind
    pair: KernelPair | SingularKernel
    map: MonotoneMap
    f: FunctionHandle
    eval_grid: tuple[float, ...]
    side: Side = "left"
    path: Path = "direct"
    budget: QuadBudget = field(default_factory=default_budget)

    def __post_init__(self) -> None:
        if self.kind not in ("GFI", "GFD_RL", "GFD_Caputo"):
            raise DomainError(f"unknown operator kind {self.kind!r}")
        _check_side(self.side)
        _check_path(self.path, self.map)
        object.__setattr__(self, "f", as_function(self.f, self.map.interval))
        object.__setattr__(self, "eval_grid", tuple(float(x) for x in np.atleast_1d(self.eval_grid)))
        if self.kind != "GFI" and not self.f.has_derivative:
            raise MissingDerivativeError(f"{self.kind} needs the derivative of {self.f.label}")
        a, b = self.map.interval
        span = b - a
        for x in self.eval_grid:
            if not (a - 1e-12 * span <= x <= b + 1e-12 * span):
                raise DomainError(f"evaluation point {x} outside [{a}, {b}]")
        pair = self.pair
        if isinstance(pair, KernelPair) and pair.length < span * (1 - 1e-12):
            raise DomainError("kernel length is shorter than the interval")

    @property
    def kernel(self) -> SingularKernel:
        pair = self.pair
        if isinstance(pair, SingularKernel):
            return pair
        return pair.M if self.kind == "GFI" else pair.K


@dataclass(frozen=True)
class OperatorResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    divergent: np.ndarray
    path: str
    elapsed: float
    warnings: tuple[str, ...] = ()

    @property
    def inconclusive(self) -> np.ndarray:
        return ~self.converged | self.divergent


def _tabulated_sources(f: FunctionHandle) -> list[TabulatedFunction]:
    found = []
    stack = [f]
    while stack:
        h = stack.pop()
        if isinstance(h, TabulatedFunction):
            found.append(h)
        elif isinstance(h, LinearCombination):
            stack.extend(t for _, t in h.terms())
        elif isinstance(h, Product):
            stack.extend([h.f1, h.f2])
        elif isinstance(h, Composed):
            stack.append(h.inner)
    return found


def _window_warnings(f: FunctionHandle, g: MonotoneMap, xs: np.ndarray, side: str) -> list[str]:
    msgs = []
    for tab in _tabulated_sources(f):
        for x in xs:
            lo, hi = (g.a, x) if side == "left" else (x, g.b)
            n = int(np.count_nonzero((tab.t >= lo) & (tab.t <= hi)))
            if 0 < hi - lo and n < MIN_WINDOW_SAMPLES:
                msgs.append(f"only {n} samples of {tab.label} in the integration window at x = {x:g}")
                break
    for m in msgs:
        warnings.warn(m, TabulatedSparseWarning, stacklevel=3)
    return msgs


def _finish(values, errors, ok, divergent, path, t0, msgs) -> OperatorResult:
    values = np.where(divergent, np.nan, values)
    return OperatorResult(values, errors, ok & ~divergent, divergent, path, time.perf_counter() - t0,
                          tuple(msgs))


def _boundary_values(kernel: SingularKernel, g: MonotoneMap, f: FunctionHandle, xs: np.ndarray,
                     side: str):
    fa = _anchor_value(f, g.a if side == "left" else g.b)
    vals = np.zeros(xs.shape)
    divergent = np.zeros(xs.shape, dtype=bool)
    if fa == 0.0:
        return vals, divergent
    for t in kernel.terms:
        bt = BoundaryTerm(t, g, side, kernel.length)
        v = bt.eval(xs)
        vals = vals + fa * v
    divergent = ~np.isfinite(vals)
    return np.where(divergent, 0.0, vals), divergent


def gfi(kernel: SingularKernel, g: MonotoneMap, f, xs, side: Side = "left", path: Path = "direct",
        budget: QuadBudget | None = None) -> OperatorResult:
    """General fractional integral of ``f`` with kernel ``kernel`` w.r.t. ``g``."""
    t0 = time.perf_counter()
    f = as_function(f, g.interval)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    msgs = _window_warnings(f, g, xs, side)
    v, e, ok = kernel_integral(kernel, g, f, xs, side, path, budget)
    return _finish(v, e, ok, np.zeros(xs.shape, bool), path, t0, msgs)


def gfd_caputo(kernel: SingularKernel, g: MonotoneMap, f, xs, side: Side = "left",
               path: Path = "direct", budget: QuadBudget | None = None) -> OperatorResult:
    """Caputo-type general fractional derivative (kernel ``K`` of the pair)."""
    t0 = time.perf_counter()
    f = as_function(f, g.interval)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    msgs = _window_warnings(f, g, xs, side)
    v, e, ok = kernel_integral(kernel, g, f.derivative(), xs, side, path, budget, jac=False)
    if side == "right":
        v = -v
    return _finish(v, e, ok, np.zeros(xs.shape, bool), path, t0, msgs)


def gfd_rl(kernel: SingularKernel, g: MonotoneMap, f, xs, side: Side = "left", path: Path = "direct",
           budget: QuadBudget | None = None) -> OperatorResult:
    """Riemann-Liouville type derivative via the Caputo part plus the boundary term.

    Where the boundary term is infinite (at the anchor endpoint itself, for a
    singular ``K`` and ``f(anchor) != 0``) the point is flagged divergent.
    """
    t0 = time.perf_counter()
    f = as_function(f, g.interval)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    cap = gfd_caputo(kernel, g, f, xs, side, path, budget)
    bv, divergent = _boundary_values(kernel, g, f, xs, side)
    return _finish(cap.values + bv, cap.errors, cap.converged, divergent, path, t0, list(cap.warnings))


def gfd_rl_fd(kernel: SingularKernel, g: MonotoneMap, f, xs, side: Side = "left", path: Path = "direct",
              budget: QuadBudget | None = None, step: float | None = None) -> OperatorResult:
    """RL derivative as ``(1/g') d/dx I_K f`` by central differences (a cross-check).

    The step defaults to ``1e-4 (b - a)`` and the inner integrals are computed
    to a tolerance tighter than the step can amplify.
    """
    t0 = time.perf_counter()
    f = as_function(f, g.interval)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    a, b = g.interval
    h = step if step is not None else 1e-4 * (b - a)
    if np.any((xs - h < a) | (xs + h > b)):
        raise DomainError("finite-difference stencil leaves the interval")
    budget = (budget or default_budget())
    inner = QuadBudget(budget.order, min(budget.tol, 1e-13), budget.max_subdivisions)
    vp, ep, okp = kernel_integral(kernel, g, f, xs + h, side, path, inner)
    vm, em, okm = kernel_integral(kernel, g, f, xs - h, side, path, inner)
    dI = (vp - vm) / (2 * h)
    sign = 1.0 if side == "left" else -1.0
    vals = sign * dI / g.gprime.eval(xs)
    errs = (ep + em) / (2 * h) / np.abs(g.gprime.eval(xs))
    return _finish(vals, errs, okp & okm, np.zeros(xs.shape, bool), path, t0, [])


def evaluate_operator(req: OperatorRequest) -> OperatorResult:
    xs = np.asarray(req.eval_grid)
    fn = {"GFI": gfi, "GFD_Caputo": gfd_caputo, "GFD_RL": gfd_rl}[req.kind]
    return fn(req.kernel, req.map, req.f, xs, req.side, req.path, req.budget)


# }}}


# {{{ Erdelyi-Kober


class _Monomial(FunctionHandle):
    """``x^e`` on ``[a, b]`` with ``a >= 0``."""

    def __init__(self, e: float, domain: tuple[float, float]):
        self.e = float(e)
        self.domain = domain
        self.label = f"x^{self.e:g}"

    def eval(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, np.abs(x) ** self.e, 0.0 if self.e > 0 else (1.0 if self.e == 0 else np.inf))

    def derivative(self) -> FunctionHandle:
        if self.e == 0:
            return CallableFunction(lambda x: np.zeros(np.shape(x)), domain=self.domain, label="0")
        return self.e * _Monomial(self.e - 1.0, self.domain)

    def edge_exponent(self, point: float) -> float:
        return self.e if point == 0.0 else 0.0


def ek_integral_handle(alpha: float, sigma: float, eta: float, f, interval: tuple[float, float],
                       path: Path = "direct", budget: QuadBudget | None = None,
                       log: _FailureLog | None = None) -> FunctionHandle:
    """Lazy Erdelyi-Kober integral, for composing with other operators."""
    a, b = float(interval[0]), float(interval[1])
    g = builtin_map("power", (a, b), sigma=sigma)
    f = as_function(f, (a, b))
    L = max(g.gb - g.ga, 1e-300)
    inner = integral_handle(power_kernel(alpha, L), g, Product(_Monomial(sigma * eta, (a, b)), f), "left",
                            path, budget, log)
    return Product(_Monomial(-sigma * (alpha + eta), (a, b)), inner)


def erdelyi_kober(alpha: float, sigma: float, eta: float, f, xs, interval: tuple[float, float],
                  kind: Literal["integral", "derivative"] = "integral", path: Path = "direct",
                  budget: QuadBudget | None = None) -> OperatorResult:
    """Left-sided Erdelyi-Kober operators on ``[a, b]`` with ``a >= 0``.

    The integral is ``x^{-sigma(alpha+eta)} I^alpha_{x^sigma}(x^{sigma eta} f)``;
    the derivative is ``x^{-sigma eta} D^alpha_{x^sigma}(x^{sigma(alpha+eta)} f)``
    with the RL-type derivative of the power kernel ``h_{1-alpha}``.
    """
    t0 = time.perf_counter()
    a, b = float(interval[0]), float(interval[1])
    if a < 0:
        raise DomainError("Erdelyi-Kober operators need a >= 0")
    if not 0 < alpha < 1 and kind == "derivative":
        raise DomainError("the derivative needs 0 < alpha < 1")
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    g = builtin_map("power", (a, b), sigma=sigma)
    f = as_function(f, (a, b))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    L = max(g.gb - g.ga, 1e-300)
    if kind == "integral":
        inner = Product(_Monomial(sigma * eta, (a, b)), f)
        res = gfi(power_kernel(alpha, L), g, inner, xs, "left", path, budget)
        scale = xs ** (-sigma * (alpha + eta))
    elif kind == "derivative":
        inner = Product(_Monomial(sigma * (alpha + eta), (a, b)), f)
        res = gfd_rl(power_kernel(1.0 - alpha, L), g, inner, xs, "left", path, budget)
        scale = xs ** (-sigma * eta)
    else:
        raise DomainError(f"unknown Erdelyi-Kober kind {kind!r}")
    return _finish(scale * res.values, np.abs(scale) * res.errors, res.converged, res.divergent,
                   path, t0, list(res.warnings))


# }}}
