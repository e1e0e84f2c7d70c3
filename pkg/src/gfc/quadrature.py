"""Quadrature for weakly singular integrands.

The workhorse is :func:`weighted_integral`, which evaluates, for a whole grid
of intervals at once,

    int_lo^hi (hi - s)^p (s - lo)^q Phi(s) ds,     p, q > -1,

with Gauss-Jacobi rules that absorb both endpoint powers exactly. When the
error estimate (difference of successive rules) misses the budget it climbs a
fixed ladder of rules: two-sided Gauss-Jacobi of order n/4, n/2 and n, then
composite rules geometrically graded toward both endpoints.
:func:`adaptive_integral` is an independent general-purpose integrator kept
for cross-checks.
"""

from __future__ import annotations

import math
import os
import threading
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

from .errors import DomainError, NonConvergenceError, ToleranceNotMetError
from .functions import FunctionHandle

__all__ = [
    "JacobiRule",
    "QuadBudget",
    "jacobi_rule",
    "singular_convolution",
    "weighted_integral",
    "adaptive_integral",
    "default_budget",
]

EPS = float(np.finfo(float).eps)
# geometric ratio of graded panels and the number of levels added per stage
GRADING_RATIO = 0.2
LEVEL_STEP = 4
# plain Jacobi rules of order n/4, n/2 and n before graded composites
JACOBI_STAGES = 3


# {{{ Gauss-Jacobi rules


@dataclass(frozen=True)
class JacobiRule:
    """Gauss rule on [0, 1] for the weight ``(1 - t)^p t^q``.

    ``complements`` holds ``1 - nodes`` computed without cancellation.
    """

    n: int
    p: float
    q: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    complements: np.ndarray = field(repr=False)

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, fn(self.nodes)))


def _golub_welsch(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in [-1, 1] and normalized weights for (1-x)^alpha (1+x)^beta."""
    k = np.arange(n, dtype=float)
    ab = alpha + beta
    diag = np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (beta**2 - alpha**2) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (beta - alpha) / (ab + 2)
    k = np.arange(1, n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.sqrt(
            4 * k * (k + alpha) * (k + beta) * (k + ab)
            / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1))
        )
    if n > 1:
        # the factor (1 + alpha + beta) cancels in the k = 1 entry
        off[0] = math.sqrt(4 * (1 + alpha) * (1 + beta) / ((2 + ab) ** 2 * (3 + ab)))
    try:
        x, v = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:
        raise NonConvergenceError(f"Golub-Welsch eigen-solve failed for n = {n}") from exc
    return x, v[0, :] ** 2


_RULE_CACHE: dict[tuple, JacobiRule] = {}
_RULE_LOCK = threading.Lock()


def jacobi_rule(n: int, p: float, q: float = 0.0) -> JacobiRule:
    """Gauss-Jacobi rule of order *n* for ``(1 - t)^p t^q`` on [0, 1].

    Exact for polynomials of degree ``2n - 1``. Rules are cached; the cache
    is safe for concurrent use.
    """
    n = int(n)
    p, q = float(p), float(q)
    if n < 1:
        raise DomainError(f"rule order must be positive, got {n}")
    if not (p > -1 and q > -1):
        raise DomainError(f"Jacobi exponents must exceed -1, got p = {p}, q = {q}")
    key = (n, p, q)
    rule = _RULE_CACHE.get(key)
    if rule is not None:
        return rule

    x, w = _golub_welsch(n, p, q)
    # the mirrored problem gives accurate small distances to t = 1
    xr, _ = _golub_welsch(n, q, p)
    nodes = 0.5 * (1.0 + x)
    complements = 0.5 * (1.0 + xr[::-1])
    nodes = np.where(nodes <= 0.5, nodes, 1.0 - complements)
    complements = np.where(nodes <= 0.5, 1.0 - nodes, complements)
    weights = w * math.exp(betaln(p + 1.0, q + 1.0))
    for arr in (nodes, weights, complements):
        arr.setflags(write=False)
    rule = JacobiRule(n, p, q, nodes, weights, complements)
    with _RULE_LOCK:
        _RULE_CACHE.setdefault(key, rule)
    return _RULE_CACHE[key]


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    rule = jacobi_rule(n, 0.0, 0.0)
    return rule.nodes, rule.weights


# }}}


# {{{ budgets


@dataclass(frozen=True)
class QuadBudget:
    """Quadrature controls: base rule order, tolerance and grading depth.

    The tolerance is mixed: a result ``Q`` is accepted when its error
    estimate is below ``tol * max(1, |Q|)``.
    """

    order: int = 64
    tol: float = 1e-10
    max_subdivisions: int = 40

    def __post_init__(self) -> None:
        if self.order < 2:
            raise DomainError(f"quadrature order must be >= 2, got {self.order}")
        if not self.tol > 0:
            raise DomainError(f"quadrature tolerance must be positive, got {self.tol}")
        if self.max_subdivisions < 0:
            raise DomainError("max_subdivisions must be non-negative")

    def with_tol(self, tol: float) -> QuadBudget:
        return replace(self, tol=float(tol))


def default_budget() -> QuadBudget:
    """The default budget, honouring the ``GFC_QUAD_TOL`` environment variable."""
    env = os.environ.get("GFC_QUAD_TOL")
    if env:
        try:
            return QuadBudget(tol=float(env))
        except ValueError as exc:
            raise DomainError(f"GFC_QUAD_TOL must be a positive number, got {env!r}") from exc
    return QuadBudget()


# }}}


# {{{ reference rule ladder


@dataclass(frozen=True)
class _RefRule:
    # sum(w * phi(t)) ~ int_0^1 (1-t)^p t^q phi(t) dt; tc = 1 - t exactly
    t: np.ndarray
    tc: np.ndarray
    w: np.ndarray


_LADDER_CACHE: dict[tuple, _RefRule] = {}
_LADDER_LOCK = threading.Lock()


def _graded_side(levels: int, npanel: int, ex_near: float, ex_far: float):
    """Panels on [0, 1/2] graded toward 0, for weight u^ex_near (1-u)^ex_far.

    Returns distances ``u`` from the graded end, their complements ``1 - u``
    and the weights.
    """
    r = GRADING_RATIO
    edges = 0.5 * r ** np.arange(levels + 1)
    us, ws = [], []
    inner = jacobi_rule(npanel, 0.0, ex_near)
    c = edges[-1]
    u = c * inner.nodes
    us.append(u)
    ws.append(c ** (1.0 + ex_near) * inner.weights * (1.0 - u) ** ex_far)
    x, w = _gauss_legendre(npanel)
    for k in range(levels):
        lo, hi = edges[k + 1], edges[k]
        u = lo + (hi - lo) * x
        us.append(u)
        ws.append((hi - lo) * w * u**ex_near * (1.0 - u) ** ex_far)
    u = np.concatenate(us)
    return u, 1.0 - u, np.concatenate(ws)


def _reference_rule(order: int, p: float, q: float, stage: int, max_subdivisions: int) -> _RefRule:
    key = (order, p, q, stage, max_subdivisions)
    rule = _LADDER_CACHE.get(key)
    if rule is not None:
        return rule
    if stage <= 2:
        jr = jacobi_rule(max(order >> (2 - stage), 2), p, q)
        rule = _RefRule(jr.nodes, jr.complements, jr.weights)
    else:
        levels = _stage_levels(stage, max_subdivisions)
        npanel = max(order // 2, 8)
        # lower half graded toward t = 0 (weight t^q), upper half toward t = 1
        u0, u0c, w0 = _graded_side(levels, npanel, q, p)
        u1, u1c, w1 = _graded_side(levels, npanel, p, q)
        rule = _RefRule(
            np.concatenate([u0, u1c]),
            np.concatenate([u0c, u1]),
            np.concatenate([w0, w1]),
        )
    with _LADDER_LOCK:
        _LADDER_CACHE.setdefault(key, rule)
    return _LADDER_CACHE[key]


def _stage_levels(stage: int, max_subdivisions: int) -> int:
    return min(LEVEL_STEP * (stage - JACOBI_STAGES + 1), max(max_subdivisions // 2, 1))


def _n_stages(budget: QuadBudget) -> int:
    per_side = max(budget.max_subdivisions // 2, 1)
    return JACOBI_STAGES + max(1, math.ceil(per_side / LEVEL_STEP))


# }}}


# {{{ the vectorized engine


Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class IntegralResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray


def weighted_integral(
    phi: Integrand,
    lo: np.ndarray,
    hi: np.ndarray,
    p: float,
    q: float,
    budget: QuadBudget,
    breakpoints: Sequence[float] = (),
) -> IntegralResult:
    """Evaluate ``int_lo^hi (hi-s)^p (s-lo)^q phi(idx, s, hi-s, s-lo) ds`` per interval.

    ``phi`` receives the indices of the intervals being processed (shape
    ``(m,)``) and arrays of shape ``(m, K)`` holding the nodes and their
    distances to both ends, computed without cancellation. Breakpoints inside
    an interval split it into smooth pieces.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    m = lo.size
    values = np.zeros(m)
    errors = np.zeros(m)
    converged = np.ones(m, dtype=bool)
    length = hi - lo
    if np.any(length < 0):
        raise DomainError("integration intervals must satisfy lo <= hi")

    bp = np.asarray(sorted(breakpoints), dtype=float)
    split = np.zeros(m, dtype=bool)
    if bp.size:
        for i in range(m):
            inside = (bp > lo[i]) & (bp < hi[i])
            split[i] = bool(np.any(inside))

    todo = np.nonzero((length > 0) & ~split)[0]
    if todo.size:
        v, e, c = _ladder(phi, lo, hi, p, q, budget, todo)
        values[todo], errors[todo], converged[todo] = v, e, c
    seg = np.nonzero(split)[0]
    if seg.size:
        v, e, c = _segmented(phi, seg, lo, hi, p, q, budget, bp)
        values[seg], errors[seg], converged[seg] = v[seg], e[seg], c[seg]
    return IntegralResult(values, errors, converged)


def _apply(phi, rule: _RefRule, lo, hi, p, q, idx):
    """Rule applied to intervals ``idx``; returns the sums and the sums of |terms|."""
    length = (hi - lo)[idx][:, None]
    t, tc = rule.t[None, :], rule.tc[None, :]
    d_lo = length * t
    d_hi = length * tc
    s = np.where(t <= 0.5, lo[idx][:, None] + d_lo, hi[idx][:, None] - d_hi)
    vals = phi(idx, s, d_hi, d_lo)
    scale = length[:, 0] ** (1.0 + p + q)
    # fixed summation order keeps results reproducible
    return scale * (vals @ rule.w), scale * (np.abs(vals) @ np.abs(rule.w))


def _noise_floor(lo, hi, p, q, idx, absolute):
    """Error floor from representing the nodes in absolute coordinates.

    On a short interval far from the origin a node ``s`` only carries
    ``eps |s| / (hi - lo)`` relative information about its distance to the
    ends, which limits how well integrands singular there can be evaluated.
    """
    length = (hi - lo)[idx]
    coord = np.maximum(np.abs(lo[idx]), np.abs(hi[idx]))
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(length > 0, coord / length, 0.0)
    return 8.0 * EPS * (1.0 + cond) * (2.0 + abs(p) + abs(q)) * absolute


def _ladder(phi, lo, hi, p, q, budget: QuadBudget, idx: np.ndarray):
    nst = _n_stages(budget)
    best_v = np.zeros(idx.size)
    best_e = np.full(idx.size, np.inf)
    floor = np.zeros(idx.size)
    prev = None
    active = np.arange(idx.size)

    def accept(sel):
        target = np.maximum(budget.tol * np.maximum(1.0, np.abs(best_v[sel])), floor[sel])
        return np.isfinite(best_v[sel]) & (best_e[sel] <= target)

    for stage in range(nst):
        rule = _reference_rule(budget.order, p, q, stage, budget.max_subdivisions)
        v, absolute = _apply(phi, rule, lo, hi, p, q, idx[active])
        floor[active] = np.maximum(floor[active], _noise_floor(lo, hi, p, q, idx[active], absolute))
        if prev is not None:
            with np.errstate(invalid="ignore"):
                e = np.abs(v - prev)
            better = e <= best_e[active]
            best_v[active[better]] = v[better]
            best_e[active[better]] = e[better]
            keep = ~accept(active)
            active, prev = active[keep], v[keep]
        else:
            best_v[active] = v
            prev = v
        if active.size == 0:
            break
    converged = accept(np.arange(idx.size))
    return best_v, best_e, converged


def _segmented(phi, split: np.ndarray, lo, hi, p, q, budget: QuadBudget, bp: np.ndarray):
    """Intervals *split* cut at their interior breakpoints, all pieces batched.

    Only the first piece keeps the (s - lo)^q weight and only the last keeps
    (hi - s)^p; elsewhere the factors are smooth (or nearly singular, which
    the graded stages of the ladder resolve) and are folded into phi.
    """
    owner, cs, ds, first, last = [], [], [], [], []
    for i in split:
        cuts = np.concatenate([[lo[i]], bp[(bp > lo[i]) & (bp < hi[i])], [hi[i]]])
        n = cuts.size - 1
        owner += [i] * n
        cs.append(cuts[:-1])
        ds.append(cuts[1:])
        first += [k == 0 for k in range(n)]
        last += [k == n - 1 for k in range(n)]
    owner = np.asarray(owner)
    c = np.concatenate(cs)
    d = np.concatenate(ds)
    first = np.asarray(first)
    last = np.asarray(last)
    m = lo.size
    values = np.zeros(m)
    errors = np.zeros(m)
    converged = np.ones(m, dtype=bool)
    for is_first, is_last in ((True, False), (False, False), (False, True)):
        sel = np.nonzero((first == is_first) & (last == is_last))[0]
        if sel.size == 0:
            continue

        def sub(idx, s, d_hi_loc, d_lo_loc, is_first=is_first, is_last=is_last):
            o = owner[idx]
            g_hi = d_hi_loc if is_last else (hi[o] - d[idx])[:, None] + d_hi_loc
            g_lo = d_lo_loc if is_first else (c[idx] - lo[o])[:, None] + d_lo_loc
            f = phi(o, s, g_hi, g_lo)
            if not is_last:
                f = f * g_hi**p
            if not is_first:
                f = f * g_lo**q
            return f

        v, e, ok = _ladder(sub, c, d, p if is_last else 0.0, q if is_first else 0.0, budget, sel)
        np.add.at(values, owner[sel], v)
        np.add.at(errors, owner[sel], e)
        np.logical_and.at(converged, owner[sel], ok)
    return values, errors, converged


# }}}


# {{{ scalar front ends


def singular_convolution(
    G: FunctionHandle | Callable[[np.ndarray], np.ndarray],
    p: float,
    lower: float,
    upper: float,
    budget: QuadBudget | None = None,
) -> float:
    """``int_lower^upper (upper - s)^p G(s) ds`` for ``p > -1``.

    If *G* is a handle with an edge exponent ``q`` at *lower*, the factor
    ``(s - lower)^q`` is absorbed into the rule as well.
    """
    budget = budget or default_budget()
    if not p > -1:
        raise DomainError(f"singular exponent must exceed -1, got {p}")
    if not lower < upper:
        raise DomainError("singular_convolution needs lower < upper")
    q = 0.0
    breakpoints: Sequence[float] = ()
    if isinstance(G, FunctionHandle):
        q = G.edge_exponent(lower)
        breakpoints = G.breakpoints
        evalf = G.eval
    else:
        evalf = G  # type: ignore[assignment]

    def phi(_idx, s, _d_hi, d_lo):
        val = np.asarray(evalf(s), dtype=float)
        return val / d_lo**q if q != 0.0 else val

    res = weighted_integral(phi, np.array([lower]), np.array([upper]), p, q, budget, breakpoints)
    value, err = float(res.values[0]), float(res.errors[0])
    if not res.converged[0]:
        raise ToleranceNotMetError(
            f"singular_convolution: estimate {value!r} with error {err:.3e} "
            f"exceeds tolerance {budget.tol:.1e}",
            estimate=value,
            error=err,
        )
    return value


def adaptive_integral(
    integrand: Callable[[float], float],
    interval: tuple[float, float],
    budget: QuadBudget | None = None,
    singular_endpoint: str | None = None,
) -> float:
    """General adaptive integration (independent oracle).

    A singular endpoint (``"lower"``, ``"upper"`` or ``"both"``) is moved to
    the origin, where QUADPACK's extrapolating integrator resolves algebraic
    endpoint behaviour well.
    """
    budget = budget or default_budget()
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise DomainError("adaptive_integral needs a < b")
    if singular_endpoint not in (None, "lower", "upper", "both"):
        raise DomainError(f"unknown singular endpoint {singular_endpoint!r}")

    if singular_endpoint == "upper":
        # reflect so that the singular end sits at the origin; nodes closer to
        # b than its floating-point spacing are moved to the nearest double
        below = math.nextafter(b, -math.inf)
        return adaptive_integral(lambda v: integrand(min(b - v, below)), (0.0, b - a), budget, "lower")
    if singular_endpoint == "both":
        mid = 0.5 * (a + b)
        return adaptive_integral(integrand, (a, mid), budget, "lower") + adaptive_integral(
            integrand, (mid, b), budget, "upper"
        )

    tol = budget.tol
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total, err = integrate.quad(integrand, a, b, epsabs=0.1 * tol, epsrel=0.1 * tol, limit=500)
    if not (err <= tol * max(1.0, abs(total))):
        raise ToleranceNotMetError(
            f"adaptive_integral: estimate {total!r} with error {err:.3e} exceeds tolerance {tol:.1e}",
            estimate=total,
            error=err,
        )
    return total


# }}}
