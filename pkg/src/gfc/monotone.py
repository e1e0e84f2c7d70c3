"""Increasing maps g on [a, b] and the substitution operators Q_g, Q_g^{-1}."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, MonotonicityError
from .exprfn import Expr
from .functions import CallableFunction, Composed, ExprFunction, FunctionHandle, Product

__all__ = [
    "MonotoneMap",
    "Substitution",
    "make_monotone_map",
    "builtin_map",
    "inverse_at",
    "substitute",
    "g_monomial",
    "tabulated_map",
]

MAX_NEWTON = 50
MAX_BISECTION = 200

# 4-point Gauss-Legendre on [0, 1], used to form g(x) - g(u) for nearby points
_GL_T, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W


class MonotoneMap:
    """A strictly increasing C^1 map ``g`` on ``[a, b]``.

    Built-in maps carry a closed-form inverse and an accurate difference
    ``g(x) - g(u)``; generic maps fall back to safeguarded Newton iteration and
    a short Gauss rule for the difference of nearby points.
    """

    def __init__(
        self,
        g: FunctionHandle,
        gprime: FunctionHandle,
        interval: tuple[float, float],
        inverse_tolerance: float = 1e-12,
        *,
        name: str = "generic",
        params: dict | None = None,
        inverse: Callable[[np.ndarray], np.ndarray] | None = None,
        delta: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None,
        edge_orders: dict[float, float] | None = None,
    ):
        a, b = float(interval[0]), float(interval[1])
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise DomainError(f"map interval must be finite with a < b, got [{a}, {b}]")
        self.g = g
        self.gprime = gprime
        self.interval = (a, b)
        self.inverse_tolerance = float(inverse_tolerance)
        self.name = name
        self.params = dict(params or {})
        self._inverse = inverse
        self._delta = delta
        # nu with g(u) - g(c) ~ |u - c|^nu at an endpoint c (1 unless g' vanishes
        # or blows up there)
        self.edge_orders = dict(edge_orders or {})
        self.ga = float(g(a))
        self.gb = float(g(b))
        if not (math.isfinite(self.ga) and math.isfinite(self.gb)):
            raise DomainError(f"g must be finite at the endpoints of [{a}, {b}]")

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def range(self) -> tuple[float, float]:
        return (self.ga, self.gb)

    @property
    def is_identity(self) -> bool:
        return self.name == "identity"

    @property
    def label(self) -> str:
        return self.g.label

    def __call__(self, x):
        return self.g(x)

    def edge_order(self, point: float) -> float:
        for c, nu in self.edge_orders.items():
            if abs(c - point) <= 1e-14 * max(1.0, abs(c)):
                return nu
        return 1.0

    @property
    def gprime_handle(self) -> FunctionHandle:
        """``g'`` as a handle that knows its endpoint exponents."""
        gp = self.gprime
        return CallableFunction(
            gp.eval,
            derivative=lambda: gp.derivative(),
            domain=self.interval,
            label=gp.label,
            exponents={c: nu - 1.0 for c, nu in self.edge_orders.items() if nu != 1.0},
        )

    def prime(self, x):
        return self.gprime(x)

    def __repr__(self) -> str:
        return f"MonotoneMap(g={self.g.label!r}, interval={self.interval}, name={self.name!r})"

    def fingerprint(self) -> dict:
        return {"g": self.g.label, "interval": list(self.interval), "name": self.name,
                "params": self.params}

    # {{{ differences

    def delta(self, x: np.ndarray, u: np.ndarray, d: np.ndarray | None = None) -> np.ndarray:
        """``g(x) - g(u)`` for ``x >= u``; ``d = x - u`` may be given exactly."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if d is None:
            d = x - u
        x, u, d = np.broadcast_arrays(x, u, np.asarray(d, dtype=float))
        if self._delta is not None:
            return self._delta(x, u, d)
        out = np.array(self.g.eval(x) - self.g.eval(u), dtype=float)
        near = np.abs(d) < 1e-2 * (self.b - self.a)
        if not np.any(near):
            return out
        knots = np.asarray(self.g.breakpoints, dtype=float)
        un, xn, dn = u[near], x[near], d[near]
        if knots.size == 0:
            out[near] = self._gl(un, dn)
            return out
        # g' is only piecewise smooth: split at a knot lying between u and x
        iu = np.searchsorted(knots, un, side="right")
        ix = np.searchsorted(knots, xn, side="left")
        res = out[near]
        same = iu >= ix
        res[same] = self._gl(un[same], dn[same])
        one = ix - iu == 1
        if np.any(one):
            k = knots[iu[one]]
            res[one] = self._gl(un[one], k - un[one]) + self._gl(k, xn[one] - k)
        out[near] = res
        return out

    def _gl(self, u: np.ndarray, d: np.ndarray) -> np.ndarray:
        u, d = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(d, dtype=float))
        gp = self.gprime.eval(u[..., None] + d[..., None] * _GL_T)
        return d * (gp @ _GL_W)

    # }}}

    # {{{ inverse

    def inverse(self, y):
        """Vectorized ``g^{-1}(y)`` for ``y`` in ``[g(a), g(b)]``."""
        ya = np.asarray(y, dtype=float)
        tol = self.inverse_tolerance
        slack = tol * (1.0 + np.abs(ya))
        bad = (ya < self.ga - slack) | (ya > self.gb + slack) | np.isnan(ya)
        if np.any(bad):
            first = float(np.ravel(ya[bad] if ya.ndim else ya)[0])
            raise DomainError(
                f"y = {first!r} outside the range [{self.ga}, {self.gb}] of g = {self.g.label}"
            )
        yc = np.clip(ya, self.ga, self.gb)
        if self._inverse is not None:
            out = np.clip(self._inverse(yc), self.a, self.b)
        else:
            out = self._newton_inverse(np.ravel(yc)).reshape(yc.shape)
        return float(out) if np.ndim(y) == 0 else out

    def _newton_inverse(self, y: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        lo = np.full(y.shape, a)
        hi = np.full(y.shape, b)
        # secant guess through the endpoints
        x = a + (y - self.ga) * (b - a) / (self.gb - self.ga)
        tol = self.inverse_tolerance * (1.0 + np.abs(y))
        active = np.ones(y.shape, dtype=bool)
        for _ in range(MAX_NEWTON):
            if not np.any(active):
                break
            idx = np.nonzero(active)[0]
            xi = x[idx]
            r = self.g.eval(xi) - y[idx]
            done = np.abs(r) <= 0.25 * tol[idx]
            lo[idx] = np.where(r < 0, xi, lo[idx])
            hi[idx] = np.where(r > 0, xi, hi[idx])
            gp = self.gprime.eval(xi)
            with np.errstate(all="ignore"):
                xn = xi - r / gp
            inside = np.isfinite(xn) & (xn > lo[idx]) & (xn < hi[idx])
            xn = np.where(inside, xn, 0.5 * (lo[idx] + hi[idx]))
            x[idx] = np.where(done, xi, xn)
            active[idx[done]] = False

        # bisection fallback for stragglers
        for _ in range(MAX_BISECTION):
            if not np.any(active):
                break
            idx = np.nonzero(active)[0]
            mid = 0.5 * (lo[idx] + hi[idx])
            r = self.g.eval(mid) - y[idx]
            lo[idx] = np.where(r < 0, mid, lo[idx])
            hi[idx] = np.where(r >= 0, mid, hi[idx])
            x[idx] = mid
            done = (np.abs(r) <= 0.25 * tol[idx]) | (hi[idx] - lo[idx] <= 4 * np.spacing(np.abs(mid) + 1e-300))
            active[idx[done]] = False
        return x

    # }}}

    def reflected(self) -> MonotoneMap:
        """The map ``v -> -g(a + b - v)`` on the same interval.

        Right-sided operators of ``f`` w.r.t. ``g`` equal left-sided operators
        of ``f(a + b - v)`` w.r.t. the reflected map.
        """
        a, b = self.interval
        g, gp = self.g, self.gprime
        g_r = CallableFunction(lambda v: -g.eval(a + b - v), derivative=lambda: gp_r,
                               domain=(a, b), label=f"-g(a+b-x) with g = {g.label}")
        gp_r = CallableFunction(lambda v: gp.eval(a + b - v), domain=(a, b),
                                label=f"g'(a+b-x) with g = {g.label}")
        inverse = None
        if self._inverse is not None:
            inv = self._inverse
            inverse = lambda y: a + b - inv(-y)  # noqa: E731
        delta = None
        if self._delta is not None:
            dl = self._delta
            # g_r(x) - g_r(u) = g(a+b-u) - g(a+b-x)
            delta = lambda x, u, d: dl(a + b - u, a + b - x, d)  # noqa: E731
        return MonotoneMap(g_r, gp_r, (a, b), self.inverse_tolerance, name=f"reflected {self.name}",
                           params=self.params, inverse=inverse, delta=delta,
                           edge_orders={a + b - c: nu for c, nu in self.edge_orders.items()})


def _validate(g: FunctionHandle, gprime: FunctionHandle, a: float, b: float, n: int) -> None:
    xs = np.linspace(a, b, n + 2)[1:-1]
    gp = gprime(xs)
    bad = ~(gp > 0) | ~np.isfinite(gp)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise MonotonicityError(
            f"g = {g.label} is not strictly increasing on [{a}, {b}]: "
            f"g'({xs[i]!r}) = {gp[i]!r} (sample {i} of {n})",
            position=float(xs[i]),
        )
    gv = g(xs)
    if np.any(np.diff(gv) < 0):
        i = int(np.argmax(np.diff(gv) < 0))
        raise MonotonicityError(
            f"g = {g.label} decreases between samples near x = {xs[i]!r}", position=float(xs[i])
        )


def make_monotone_map(
    g_expr: str | Expr | FunctionHandle,
    interval: tuple[float, float],
    n_validation_samples: int = 1024,
    inverse_tolerance: float = 1e-12,
) -> MonotoneMap:
    """Build a map from an expression (or handle) and validate ``g' > 0``."""
    a, b = float(interval[0]), float(interval[1])
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"map interval must be finite with a < b, got [{a}, {b}]")
    g = g_expr if isinstance(g_expr, FunctionHandle) else ExprFunction(g_expr, (a, b))
    gprime = g.derivative()
    _validate(g, gprime, a, b, n_validation_samples)
    return MonotoneMap(g, gprime, (a, b), inverse_tolerance)


def tabulated_map(handle: FunctionHandle, n_validation_samples: int = 1024) -> MonotoneMap:
    """Map from an interpolated, strictly increasing sample sequence."""
    return make_monotone_map(handle, handle.domain, n_validation_samples)


def builtin_map(name: str, interval: tuple[float, float] = (0.0, 1.0), **params) -> MonotoneMap:
    """The maps of the classical special cases.

    ``identity``: g = x; ``shift``: g = x - c (``c`` defaults to a);
    ``hadamard``: g = ln(x/a), requires a > 0; ``power``: g = x^sigma,
    requires sigma > 0 and a >= 0.
    """
    a, b = float(interval[0]), float(interval[1])
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"map interval must be finite with a < b, got [{a}, {b}]")

    if name == "identity":
        g = ExprFunction("x", (a, b))
        return MonotoneMap(g, g.derivative(), (a, b), name="identity",
                           inverse=lambda y: y, delta=lambda x, u, d: d.copy())
    if name == "shift":
        c = float(params.get("c", a))
        g = ExprFunction(f"x - {c!r}" if c >= 0 else f"x + {-c!r}", (a, b))
        return MonotoneMap(g, g.derivative(), (a, b), name="shift", params={"c": c},
                           inverse=lambda y: y + c, delta=lambda x, u, d: d.copy())
    if name == "hadamard":
        if not a > 0:
            raise DomainError("the Hadamard map ln(x/a) requires a > 0")
        g = ExprFunction(f"ln(x/{a!r})", (a, b))
        return MonotoneMap(
            g, g.derivative(), (a, b), name="hadamard", params={"a": a},
            inverse=lambda y: a * np.exp(y),
            delta=lambda x, u, d: -np.log1p(-d / x),
        )
    if name == "power":
        sigma = float(params.get("sigma", 1.0))
        if not sigma > 0:
            raise DomainError("the power map x^sigma requires sigma > 0")
        if a < 0:
            raise DomainError("the power map x^sigma requires a >= 0")
        g = ExprFunction(f"x^{sigma!r}", (a, b))

        def delta(x, u, d):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = -(x**sigma) * np.expm1(sigma * np.log1p(-d / x))
            return np.where(u > 0, out, x**sigma)

        return MonotoneMap(g, g.derivative(), (a, b), name="power", params={"sigma": sigma},
                           inverse=lambda y: y ** (1.0 / sigma), delta=delta,
                           edge_orders={0.0: sigma} if a == 0 and sigma != 1 else None)
    raise DomainError(f"unknown built-in map {name!r}")


def inverse_at(map: MonotoneMap, y):
    """``x`` with ``g(x) = y`` to within the map's inverse tolerance."""
    return map.inverse(y)


# {{{ substitution operators


class _Inverse(FunctionHandle):
    def __init__(self, map: MonotoneMap):
        self.map = map
        self.domain = map.range
        self.label = f"inv({map.g.label})"

    def eval(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.map.inverse(y), dtype=float)

    def derivative(self) -> FunctionHandle:
        gp = Composed(self.map.gprime, self, self.domain)
        return CallableFunction(lambda y: 1.0 / gp.eval(y), domain=self.domain,
                                label=f"1/g'(inv({self.map.g.label}))")


@dataclass(frozen=True)
class Substitution:
    """``Q_g f = f o g`` (forward) or ``Q_g^{-1} f = f o g^{-1}`` (inverse)."""

    map: MonotoneMap
    direction: Literal["forward", "inverse"] = "forward"

    def __post_init__(self) -> None:
        if self.direction not in ("forward", "inverse"):
            raise ValueError(f"direction must be 'forward' or 'inverse', got {self.direction!r}")

    @property
    def inverted(self) -> Substitution:
        return Substitution(self.map, "inverse" if self.direction == "forward" else "forward")

    def __call__(self, f: FunctionHandle) -> FunctionHandle:
        return substitute(self, f)


def substitute(sub: Substitution, f: FunctionHandle) -> FunctionHandle:
    m = sub.map
    if sub.direction == "forward":
        return Composed(f, m.g, m.interval, label=f"({f.label})o({m.g.label})")
    return Composed(f, _Inverse(m), m.range, label=f"({f.label})o(inv {m.g.label})")


# }}}


def g_monomial(map: MonotoneMap, beta: float, side: Literal["left", "right"] = "left") -> CallableFunction:
    """``(g(u) - g(a))^beta`` (left) or ``(g(b) - g(u))^beta`` (right).

    The handle records its exact edge exponent so that integrators can
    absorb the endpoint behaviour into the quadrature weight.
    """
    a, b = map.interval
    beta = float(beta)
    if side == "left":
        def base(u):
            return np.maximum(map.delta(u, np.full_like(u, a), u - a), 0.0)
        anchor, sign = a, 1.0
        label = f"(g(x)-g({a:g}))^{beta:g}"
    else:
        def base(u):
            return np.maximum(map.delta(np.full_like(u, b), u, b - u), 0.0)
        anchor, sign = b, -1.0
        label = f"(g({b:g})-g(x))^{beta:g}"

    def value(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return base(u) ** beta if beta != 0 else np.ones_like(u)

    def deriv():
        if beta == 0:
            return CallableFunction(lambda u: np.zeros_like(u), domain=(a, b), label="0")
        lower = g_monomial(map, beta - 1.0, side)
        return Product(sign * beta * map.gprime_handle, lower)

    nu = map.edge_order(anchor)
    return CallableFunction(value, derivative=deriv, domain=(a, b), label=label,
                            exponents={anchor: nu * beta})
