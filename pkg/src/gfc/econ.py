"""Marginal values with memory for a factor/indicator pair sampled in time.

A :class:`TimeSeries` holds samples ``(t, X(t), Y(t))`` and monotone cubic
interpolants of ``X`` and ``Y``. The factor ``X`` must be strictly
increasing: it plays the role of the map ``g`` w.r.t. which ``Y`` is
differentiated.

* ``standard``: ``Y'(t) / X'(t)``;
* ``fractional``: the Caputo-type derivative of order ``alpha`` in (0, 1]
  w.r.t. ``X``, ``1/Gamma(1-alpha) int_a^t (X(t) - X(s))^{-alpha} Y'(s) ds``;
* ``general``: the Caputo-type general fractional derivative with the kernel
  ``K`` of a certified pair, w.r.t. the map ``X``.

The fractional mode is evaluated here directly in the time variable, the
general mode through :mod:`gfc.operators` in the conjugated variable
``X(t)``, so that ``K = h_{1-alpha}`` compares two independent routes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, GFCError, MonotonicityError, ToleranceNotMetError
from .functions import CallableFunction, Composed, FunctionHandle, TabulatedFunction
from .kernels import KernelPair
from .monotone import MonotoneMap
from .operators import gfd_caputo
from .quadrature import QuadBudget, default_budget, weighted_integral
from .specialfns import gamma

__all__ = [
    "SeriesFormatError",
    "TimeSeries",
    "MarginalSpec",
    "load_series",
    "parse_series",
    "standard_marginal",
    "memory_marginal",
    "normalized_marginal",
    "gf_elasticity",
    "marginal_rows",
    "rows_to_csv",
    "rows_to_json",
]

DERIVATIVE_GUARD = 1e-12


class SeriesFormatError(GFCError, ValueError):
    """Malformed series data; ``line`` is 1-based in the source file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    x_interp: TabulatedFunction = field(repr=False)
    y_interp: TabulatedFunction = field(repr=False)

    @classmethod
    def from_arrays(cls, t, X, Y, lines: Sequence[int] | None = None) -> TimeSeries:
        t = np.asarray(t, dtype=float)
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if not (t.ndim == X.ndim == Y.ndim == 1 and t.size == X.size == Y.size):
            raise SeriesFormatError("t, X and Y must be 1D arrays of equal length")
        if t.size < 3:
            raise SeriesFormatError(f"need at least 3 samples, got {t.size}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise SeriesFormatError("series values must be finite")
        line = (lambda i: lines[i]) if lines is not None else (lambda i: None)
        dt = np.diff(t)
        if np.any(dt <= 0):
            i = int(np.nonzero(dt <= 0)[0][0]) + 1
            what = "duplicate timestamp" if dt[i - 1] == 0 else "timestamps not increasing"
            raise SeriesFormatError(f"{what}: t = {float(t[i])!r} (row {i + 1})", line(i))
        dX = np.diff(X)
        if np.any(dX <= 0):
            i = int(np.nonzero(dX <= 0)[0][0]) + 1
            where = f" (line {line(i)})" if lines is not None else ""
            raise MonotonicityError(f"X must be strictly increasing; row {i + 1}{where} has X = {float(X[i])!r} "
                                    f"after {float(X[i - 1])!r}", i + 1)
        xi = TabulatedFunction(t, X, label="X(t)")
        slopes = xi.derivative()(t)
        if np.any(slopes <= 0):
            i = int(np.nonzero(slopes <= 0)[0][0])
            raise MonotonicityError(f"interpolated X'(t) vanishes at sample row {i + 1} (t = {float(t[i])!r})", i + 1)
        return cls(t, X, Y, xi, TabulatedFunction(t, Y, label="Y(t)"))

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def interval(self) -> tuple[float, float]:
        return (float(self.t[0]), float(self.t[-1]))

    def x_map(self) -> MonotoneMap:
        """``X`` as an increasing map of time."""
        xi = self.x_interp
        return MonotoneMap(xi, xi.derivative(), self.interval, name="series X")

    def log_x_map(self) -> MonotoneMap:
        """``ln X`` as an increasing map of time (needs ``X > 0``)."""
        _require_positive(self.X, "X")
        xi, dxi = self.x_interp, self.x_interp.derivative()
        lg = CallableFunction(lambda s: np.log(xi.eval(s)), domain=self.interval, label="ln X(t)",
                              breakpoints=xi.breakpoints)
        dlg = CallableFunction(lambda s: dxi.eval(s) / xi.eval(s), domain=self.interval, label="X'/X",
                               breakpoints=xi.breakpoints)
        return MonotoneMap(lg, dlg, self.interval, name="series ln X")


def _require_positive(values: np.ndarray, name: str) -> None:
    bad = np.nonzero(values <= 0)[0]
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"{name} must be positive for logarithms; sample row {i + 1} has {name} = {float(values[i])!r}")


def parse_series(text: str, source: str = "<string>") -> TimeSeries:
    """Parse CSV text with header ``t,X,Y``."""
    reader = csv.reader(io.StringIO(text))
    rows: list[tuple[float, float, float]] = []
    lines: list[int] = []
    header_seen = False
    for lineno, row in enumerate(reader, start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        if not header_seen:
            if cells != ["t", "X", "Y"]:
                raise SeriesFormatError(f"{source}: expected header 't,X,Y', found {','.join(cells)!r}", lineno)
            header_seen = True
            continue
        if len(cells) != 3:
            raise SeriesFormatError(f"{source}: expected 3 fields, found {len(cells)}", lineno)
        try:
            vals = tuple(float(c) for c in cells)
        except ValueError:
            raise SeriesFormatError(f"{source}: non-numeric field in {','.join(cells)!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise SeriesFormatError(f"{source}: non-finite value", lineno)
        rows.append(vals)  # type: ignore[arg-type]
        lines.append(lineno)
    if not header_seen:
        raise SeriesFormatError(f"{source}: empty file", 1)
    if len(rows) < 3:
        raise SeriesFormatError(f"{source}: need at least 3 data rows, found {len(rows)}")
    arr = np.asarray(rows)
    return TimeSeries.from_arrays(arr[:, 0], arr[:, 1], arr[:, 2], lines)


def load_series(csv_path: str | Path) -> TimeSeries:
    path = Path(csv_path)
    return parse_series(path.read_text(encoding="utf-8"), str(path))


@dataclass(frozen=True)
class MarginalSpec:
    mode: str = "fractional"
    alpha: float | None = None
    pair: KernelPair | None = None
    normalization: str = "raw"
    window_start: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("standard", "fractional", "general"):
            raise DomainError(f"unknown marginal mode {self.mode!r}")
        if self.normalization not in ("raw", "ratio"):
            raise DomainError(f"unknown normalization {self.normalization!r}")
        if self.mode == "fractional":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise DomainError(f"fractional mode needs alpha in (0, 1], got {self.alpha}")
        if self.mode == "general" and self.pair is None:
            raise DomainError("general mode needs a kernel pair")

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "alpha": self.alpha,
            "pair": self.pair.fingerprint() if self.pair is not None else None,
            "normalization": self.normalization,
            "window_start": self.window_start,
        }


def _window(series: TimeSeries, spec: MarginalSpec | None, t: float) -> float:
    t0, t1 = series.interval
    a = t0 if spec is None or spec.window_start is None else float(spec.window_start)
    if not t0 <= a < t1:
        raise DomainError(f"window start {a} outside the sampled range [{t0}, {t1})")
    if not a < t <= t1:
        raise DomainError(f"t = {t} must lie in ({a}, {t1}]")
    return a


def standard_marginal(series: TimeSeries, t: float) -> float:
    """``(dY/dt) / (dX/dt)`` from the interpolants."""
    t0, t1 = series.interval
    if not t0 <= t <= t1:
        raise DomainError(f"t = {t} outside [{t0}, {t1}]")
    dx = float(series.x_interp.derivative()(t))
    if abs(dx) < DERIVATIVE_GUARD:
        raise DomainError(f"|X'({t})| = {abs(dx):.3e} is below the division guard {DERIVATIVE_GUARD:g}")
    return float(series.y_interp.derivative()(t)) / dx


def _fractional(series: TimeSeries, y: FunctionHandle, alpha: float, a: float, t: float,
                budget: QuadBudget) -> tuple[float, float]:
    """``1/Gamma(1-alpha) int_a^t (X(t)-X(s))^{-alpha} y'(s) ds`` in the time variable."""
    if alpha == 1.0:
        dx = float(series.x_interp.derivative()(t))
        if abs(dx) < DERIVATIVE_GUARD:
            raise DomainError(f"|X'({t})| is below the division guard")
        return float(y.derivative()(t)) / dx, 0.0
    dy = y.derivative()
    xmap = series.x_map()

    def phi(idx, s, d_hi, d_lo):
        dX = xmap.delta(np.full(s.shape, t), s, d_hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (dX / d_hi) ** (-alpha) * dy.eval(s)

    res = weighted_integral(phi, np.array([a]), np.array([t]), -alpha, 0.0, budget,
                            tuple(series.t[1:-1]) + tuple(y.breakpoints))
    scale = 1.0 / gamma(1.0 - alpha)
    v, e = scale * float(res.values[0]), scale * float(res.errors[0])
    if not res.converged[0]:
        raise ToleranceNotMetError(f"fractional marginal at t = {t} missed its tolerance", v, e)
    return v, e


def _general(series: TimeSeries, y: FunctionHandle, pair: KernelPair, a: float, t: float,
             budget: QuadBudget, gmap: MonotoneMap | None = None) -> tuple[float, float]:
    gmap = gmap or series.x_map()
    if a != gmap.a:
        gmap = MonotoneMap(gmap.g, gmap.gprime, (a, gmap.b), name=gmap.name)
    span = gmap.gb - gmap.ga
    if pair.length < span * (1 - 1e-12):
        raise DomainError(f"kernel length {pair.length} is shorter than the range {span} of the map")
    res = gfd_caputo(pair.K, gmap, y, np.array([t]), "left", "conjugated", budget)
    v, e = float(res.values[0]), float(res.errors[0])
    if not res.converged[0]:
        raise ToleranceNotMetError(f"general marginal at t = {t} missed its tolerance", v, e)
    return v, e


def _marginal(series: TimeSeries, y: FunctionHandle, spec: MarginalSpec, t: float,
              budget: QuadBudget | None) -> tuple[float, float]:
    budget = budget or default_budget()
    if spec.mode == "standard":
        dx = float(series.x_interp.derivative()(t))
        if abs(dx) < DERIVATIVE_GUARD:
            raise DomainError(f"|X'({t})| is below the division guard")
        return float(y.derivative()(t)) / dx, 0.0
    a = _window(series, spec, t)
    if spec.mode == "fractional":
        return _fractional(series, y, float(spec.alpha), a, t, budget)
    return _general(series, y, spec.pair, a, t, budget)


def memory_marginal(series: TimeSeries, spec: MarginalSpec, t: float, *,
                    budget: QuadBudget | None = None, with_error: bool = False):
    """Marginal value of ``Y`` w.r.t. ``X`` at time ``t`` (raw, or ratio-normalized)."""
    if spec.normalization == "ratio":
        return normalized_marginal(series, spec, t, budget=budget, with_error=with_error)
    v, e = _marginal(series, series.y_interp, spec, float(t), budget)
    return (v, e) if with_error else v


def normalized_marginal(series: TimeSeries, spec: MarginalSpec, t: float, *,
                        budget: QuadBudget | None = None, with_error: bool = False):
    """``M(Y) / M(X)``, equal to one when ``Y = X``."""
    vy, ey = _marginal(series, series.y_interp, spec, float(t), budget)
    vx, ex = _marginal(series, series.x_interp, spec, float(t), budget)
    if abs(vx) < DERIVATIVE_GUARD:
        raise DomainError(f"normalizing marginal of X at t = {t} is {vx:.3e}, below the division guard")
    v = vy / vx
    e = abs(v) * (ey / abs(vx) + (ex / abs(vy) if vy != 0 else 0.0))
    return (v, e) if with_error else v


def gf_elasticity(series: TimeSeries, pair: KernelPair, t: float, *, window_start: float | None = None,
                  budget: QuadBudget | None = None, with_error: bool = False):
    """Caputo-type general fractional derivative of ``ln Y`` w.r.t. the map ``ln X``.

    The memory window ``[a, t]`` is in time; the map starts at ``ln X(a)``.
    """
    _require_positive(series.X, "X")
    _require_positive(series.Y, "Y")
    spec = MarginalSpec("general", pair=pair, window_start=window_start)
    a = _window(series, spec, float(t))
    yi = series.y_interp
    logy = Composed(CallableFunction(np.log, derivative=lambda: CallableFunction(lambda v: 1.0 / v), label="ln"),
                    yi, series.interval, "ln Y(t)", yi.breakpoints)
    v, e = _general(series, logy, pair, a, float(t), budget or default_budget(), series.log_x_map())
    return (v, e) if with_error else v


# {{{ output


def marginal_rows(series: TimeSeries, spec: MarginalSpec, ts: Sequence[float], *,
                  budget: QuadBudget | None = None, quantity: str = "marginal") -> list[tuple[float, float, float]]:
    rows = []
    for t in ts:
        if quantity == "elasticity":
            v, e = gf_elasticity(series, spec.pair, t, window_start=spec.window_start, budget=budget,
                                 with_error=True)
        else:
            v, e = memory_marginal(series, spec, t, budget=budget, with_error=True)
        rows.append((float(t), float(v), float(e)))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def rows_to_csv(rows: Sequence[tuple[float, float, float]], header: str = "t,value,err_estimate") -> str:
    out = [header]
    out += [",".join(_fmt(c) for c in row) for row in rows]
    return "\n".join(out) + "\n"


def rows_to_json(rows: Sequence[tuple[float, float, float]], spec: MarginalSpec, quantity: str = "marginal",
                 indent: int | None = 2) -> str:
    doc = {
        "quantity": quantity,
        "spec": spec.describe(),
        "rows": [{"t": t, "value": v, "err_estimate": e} for t, v, e in rows],
    }
    return json.dumps(doc, indent=indent, sort_keys=True)


# }}}
