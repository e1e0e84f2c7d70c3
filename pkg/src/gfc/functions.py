"""Evaluable functions of one variable.

Every handle is vectorized: ``f(x)`` accepts a scalar or an array. Handles
may know their derivative, and may carry two quadrature hints:

* ``edge_exponent(point)``: an exponent ``q`` with ``f(u) ~ |u - point|^q``
  near an interval endpoint (default 0), so the integrator can factor it out;
* ``breakpoints``: abscissae where the function is only piecewise smooth.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, DomainFault, MissingDerivativeError
from .exprfn import Expr, differentiate, eval_expr, parse, to_string

__all__ = [
    "FunctionHandle",
    "ExprFunction",
    "TabulatedFunction",
    "CallableFunction",
    "LinearCombination",
    "Product",
    "Composed",
    "as_function",
    "constant",
    "evaluate",
]

Interval = tuple[float, float]
_FULL: Interval = (-math.inf, math.inf)


class FunctionHandle:
    """Base class; subclasses implement :meth:`eval` on float arrays."""

    domain: Interval = _FULL
    label: str = "f"
    breakpoints: tuple[float, ...] = ()

    def eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        out = self.eval(np.asarray(x, dtype=float))
        return float(out) if np.ndim(x) == 0 else out

    @property
    def has_derivative(self) -> bool:
        return True

    def derivative(self) -> FunctionHandle:
        raise MissingDerivativeError(f"no derivative available for {self.label}")

    def edge_exponent(self, point: float) -> float:
        return 0.0

    def terms(self) -> list[tuple[float, FunctionHandle]]:
        """Decomposition into a linear combination of simpler handles."""
        return [(1.0, self)]

    def __add__(self, other: FunctionHandle) -> FunctionHandle:
        return LinearCombination(((1.0, self), (1.0, as_function(other))))

    def __sub__(self, other: FunctionHandle) -> FunctionHandle:
        return LinearCombination(((1.0, self), (-1.0, as_function(other))))

    def __rmul__(self, c: float) -> FunctionHandle:
        return LinearCombination(((float(c), self),))

    def __mul__(self, other):
        if isinstance(other, FunctionHandle):
            return Product(self, other)
        return LinearCombination(((float(other), self),))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


def evaluate(f: FunctionHandle, x, *, slack: float = 1e-12):
    """Evaluate *f* at *x*, checking that *x* lies in ``f.domain``."""
    lo, hi = f.domain
    xa = np.asarray(x, dtype=float)
    width = hi - lo if math.isfinite(hi - lo) else 1.0
    bad = (xa < lo - slack * width) | (xa > hi + slack * width) | np.isnan(xa)
    if np.any(bad):
        first = float(np.ravel(xa[bad] if xa.ndim else xa)[0])
        raise DomainFault(f"{f.label}: x = {first!r} outside domain [{lo}, {hi}]", f.label, first)
    return f(x)


# {{{ expression-backed


class ExprFunction(FunctionHandle):
    """A parsed expression; the derivative is symbolic."""

    def __init__(self, expr: Expr | str, domain: Interval = _FULL, label: str | None = None):
        self.expr = parse(expr) if isinstance(expr, str) else expr
        self.domain = (float(domain[0]), float(domain[1]))
        self.label = label if label is not None else to_string(self.expr)
        self._derivative: ExprFunction | None = None

    def eval(self, x: np.ndarray) -> np.ndarray:
        return eval_expr(self.expr, x)

    def derivative(self) -> ExprFunction:
        if self._derivative is None:
            d = differentiate(self.expr)
            self._derivative = ExprFunction(d, self.domain)
        return self._derivative


# }}}


# {{{ tabulated


class TabulatedFunction(FunctionHandle):
    """Monotone piecewise-cubic (PCHIP) interpolant of samples.

    Reproduces the samples exactly and is monotone wherever the data are.
    """

    def __init__(self, t: Sequence[float], y: Sequence[float], label: str = "tabulated",
                 _interp: PchipInterpolator | None = None):
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if t.ndim != 1 or t.shape != y.shape or t.size < 2:
            raise DomainError("tabulated data need matching 1D arrays with at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise DomainError("tabulated abscissae must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise DomainError("tabulated data must be finite")
        self.t = t
        self.y = y
        self.domain = (float(t[0]), float(t[-1]))
        self.label = label
        self.breakpoints = tuple(float(v) for v in t[1:-1])
        self._interp = _interp if _interp is not None else PchipInterpolator(t, y, extrapolate=True)

    def eval(self, x: np.ndarray) -> np.ndarray:
        out = self._interp(x)
        # the local polynomial form can be an ulp off at the knots themselves
        idx = np.minimum(np.searchsorted(self.t, x), self.t.size - 1)
        hit = self.t[idx] == x
        return np.where(hit, self.y[idx], out)

    def derivative(self) -> TabulatedFunction:
        d = self._interp.derivative()
        return TabulatedFunction(self.t, d(self.t), label=f"d/dx {self.label}", _interp=d)


# }}}


# {{{ generic callables


class CallableFunction(FunctionHandle):
    """Wrap a vectorized Python callable."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        derivative: FunctionHandle | Callable | None = None,
        domain: Interval = _FULL,
        label: str = "f",
        exponents: dict[float, float] | None = None,
        breakpoints: Sequence[float] = (),
    ):
        self.fn = fn
        self._derivative = derivative
        self.domain = (float(domain[0]), float(domain[1]))
        self.label = label
        self.exponents = dict(exponents or {})
        self.breakpoints = tuple(breakpoints)

    def eval(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(x), dtype=float) * np.ones_like(x)

    @property
    def has_derivative(self) -> bool:
        return self._derivative is not None

    def derivative(self) -> FunctionHandle:
        d = self._derivative
        if d is None:
            raise MissingDerivativeError(f"no derivative available for {self.label}")
        if isinstance(d, FunctionHandle):
            return d
        # a derivative may be supplied lazily as a zero-argument factory
        handle = d()
        self._derivative = handle
        return handle

    def edge_exponent(self, point: float) -> float:
        for p, q in self.exponents.items():
            if abs(p - point) <= 1e-14 * max(1.0, abs(p)):
                return q
        return 0.0


def constant(c: float, domain: Interval = _FULL) -> CallableFunction:
    c = float(c)
    return CallableFunction(
        lambda x: np.full(np.shape(x), c),
        derivative=lambda: constant(0.0, domain),
        domain=domain,
        label=repr(c),
    )


# }}}


# {{{ combinations


def _intersect(*domains: Interval) -> Interval:
    return (max(d[0] for d in domains), min(d[1] for d in domains))


class LinearCombination(FunctionHandle):
    """``sum_i c_i f_i``; operators act term by term."""

    def __init__(self, terms: Sequence[tuple[float, FunctionHandle]]):
        flat: list[tuple[float, FunctionHandle]] = []
        for c, f in terms:
            for c2, f2 in f.terms():
                flat.append((float(c) * c2, f2))
        self._terms = tuple(flat)
        self.domain = _intersect(*(f.domain for _, f in flat))
        self.label = " + ".join(f"{c:g}*({f.label})" for c, f in flat)
        self.breakpoints = tuple(sorted({b for _, f in flat for b in f.breakpoints}))

    def terms(self) -> list[tuple[float, FunctionHandle]]:
        return list(self._terms)

    def eval(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(np.shape(x))
        for c, f in self._terms:
            out = out + c * f.eval(x)
        return out

    @property
    def has_derivative(self) -> bool:
        return all(f.has_derivative for _, f in self._terms)

    def derivative(self) -> FunctionHandle:
        return LinearCombination(tuple((c, f.derivative()) for c, f in self._terms))

    def edge_exponent(self, point: float) -> float:
        return min(f.edge_exponent(point) for _, f in self._terms)


class Product(FunctionHandle):
    def __init__(self, f1: FunctionHandle, f2: FunctionHandle):
        self.f1, self.f2 = f1, f2
        self.domain = _intersect(f1.domain, f2.domain)
        self.label = f"({f1.label})*({f2.label})"
        self.breakpoints = tuple(sorted(set(f1.breakpoints) | set(f2.breakpoints)))

    def eval(self, x: np.ndarray) -> np.ndarray:
        return self.f1.eval(x) * self.f2.eval(x)

    @property
    def has_derivative(self) -> bool:
        return self.f1.has_derivative and self.f2.has_derivative

    def derivative(self) -> FunctionHandle:
        return LinearCombination(
            ((1.0, Product(self.f1.derivative(), self.f2)), (1.0, Product(self.f1, self.f2.derivative())))
        )

    def edge_exponent(self, point: float) -> float:
        return self.f1.edge_exponent(point) + self.f2.edge_exponent(point)


@dataclass
class Composed(FunctionHandle):
    """``x -> outer(inner(x))`` with the chain rule for the derivative."""

    outer: FunctionHandle
    inner: FunctionHandle
    domain: Interval = _FULL
    label: str = ""
    breakpoints: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.label:
            self.label = f"({self.outer.label})o({self.inner.label})"

    def eval(self, x: np.ndarray) -> np.ndarray:
        return self.outer.eval(self.inner.eval(x))

    @property
    def has_derivative(self) -> bool:
        return self.outer.has_derivative and self.inner.has_derivative

    def derivative(self) -> FunctionHandle:
        return Product(
            Composed(self.outer.derivative(), self.inner, self.domain, breakpoints=self.breakpoints),
            self.inner.derivative(),
        )

    __hash__ = object.__hash__
    __eq__ = object.__eq__


# }}}


def as_function(f, domain: Interval = _FULL) -> FunctionHandle:
    """Coerce strings, expressions, numbers and callables into handles."""
    if isinstance(f, FunctionHandle):
        return f
    if isinstance(f, str):
        return ExprFunction(f, domain)
    if isinstance(f, (int, float)) and not isinstance(f, bool):
        return constant(f, domain)
    if callable(f):
        return CallableFunction(f, domain=domain, label=getattr(f, "__name__", "f"))
    try:
        return ExprFunction(f, domain)
    except Exception as exc:  # pragma: no cover - defensive
        raise TypeError(f"cannot make a function out of {f!r}") from exc
