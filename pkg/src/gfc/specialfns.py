"""Gamma, lower incomplete gamma and the two-parameter Mittag-Leffler function.

All functions accept scalars or arrays and return the same kind of object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError, NonConvergenceError, PoleError, RangeOverflowError

__all__ = [
    "MLParams",
    "gamma",
    "rgamma",
    "lower_incomplete_gamma",
    "mittag_leffler",
    "ML_SERIES_RADIUS",
    "ML_ASYMPTOTIC_ONSET",
    "ML_POSITIVE_ASYMPTOTIC_ONSET",
]

EPS = np.finfo(float).eps
GAMMA_OVERFLOW = 171.6243769563027

# Regime switch points for E_{a,b}(z), expressed in r = |z|^(1/a), the modulus
# of the dominant pole of s^(a-b) / (s^a - z).
ML_SERIES_RADIUS = 6.0
ML_ASYMPTOTIC_ONSET = 6.0
ML_POSITIVE_ASYMPTOTIC_ONSET = 40.0
# Requested relative accuracy of each regime before falling back to the next.
ML_BUDGET = 1.0e-11
ML_MAX_TERMS = 20000
ML_ASYMPTOTIC_TERMS = 300
ML_CONTOUR_POINTS = (16, 20, 24, 28, 32, 36, 40, 44, 48)


def _wrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


# {{{ gamma


def gamma(x):
    """Euler's Gamma function.

    Raises :class:`PoleError` at non-positive integers and
    :class:`RangeOverflowError` beyond the double precision range.
    """
    xa = np.asarray(x, dtype=float)
    if np.any((xa <= 0) & (xa == np.round(xa))):
        bad = xa[(xa <= 0) & (xa == np.round(xa))].flat[0]
        raise PoleError(f"Gamma has a pole at x = {bad:g}")
    if np.any(xa > GAMMA_OVERFLOW):
        raise RangeOverflowError(f"Gamma overflows for x > {GAMMA_OVERFLOW}")
    return _wrap(x, sp.gamma(xa))


def rgamma(x):
    """Reciprocal Gamma function, entire (zero at the poles of Gamma)."""
    return _wrap(x, sp.rgamma(np.asarray(x, dtype=float)))


# }}}


# {{{ lower incomplete gamma


def _gamma_series(s, x):
    # gamma(s, x) = x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term.copy()
    n = 0
    active = np.ones(x.shape, dtype=bool)
    while np.any(active):
        n += 1
        if n > 10000:
            raise NonConvergenceError("incomplete gamma series did not converge")
        term = term * x / (s + n)
        total = total + np.where(active, term, 0.0)
        active &= np.abs(term) > EPS * np.abs(total) * 0.25
    return total * np.exp(s * np.log(x) - x)


def _upper_gamma_cf(s, x):
    # Gamma(s, x) by the modified Lentz algorithm for the Legendre continued fraction
    tiny = 1.0e-300
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    i = 0
    while np.any(active):
        i += 1
        if i > 10000:
            raise NonConvergenceError("incomplete gamma continued fraction did not converge")
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > EPS
    return np.exp(s * np.log(x) - x) * h


def lower_incomplete_gamma(s, x):
    r"""Lower incomplete gamma function :math:`\gamma(s, x) = \int_0^x t^{s-1} e^{-t} dt`.

    Uses the ascending series for ``x < s + 1`` and the continued fraction
    for the complement otherwise.
    """
    sa, xa = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(sa <= 0):
        raise DomainError("lower_incomplete_gamma requires s > 0")
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("lower_incomplete_gamma requires x >= 0")

    out = np.zeros(xa.shape)
    series = (xa > 0) & (xa < sa + 1.0)
    cfrac = xa >= sa + 1.0
    if np.any(series):
        out[series] = _gamma_series(sa[series], xa[series])
    if np.any(cfrac):
        sc = sa[cfrac]
        out[cfrac] = sp.gamma(sc) - _upper_gamma_cf(sc, xa[cfrac])
    return float(out) if out.ndim == 0 else out


# }}}


# {{{ Mittag-Leffler


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(
                f"Mittag-Leffler parameters must be positive: "
                f"alpha = {self.alpha}, beta = {self.beta}"
            )


def _ml_series(a: float, b: float, z: np.ndarray):
    """Truncated power series by Horner's rule; returns (value, relative error).

    The truncation order is fixed by the largest |z|, so every element gets a
    tail below ``eps`` times the largest term.
    """
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if zmax == 0.0:
        return np.full(z.shape, rgamma(b)), np.zeros(z.shape)
    k = np.arange(ML_MAX_TERMS + 1, dtype=float)
    logmag = k * math.log(zmax) - sp.gammaln(a * k + b)
    peak = int(np.argmax(logmag))
    below = np.nonzero(logmag[peak:] < logmag[peak] + math.log(0.01 * EPS))[0]
    if below.size == 0:
        raise NonConvergenceError("Mittag-Leffler series exceeded the term cap")
    n = peak + int(below[0])
    coef = sp.rgamma(a * k[: n + 1] + b)
    value = np.full(z.shape, coef[n])
    absum = np.full(z.shape, abs(coef[n]))
    az = np.abs(z)
    for c in coef[n - 1 :: -1]:
        value = value * z + c
        absum = absum * az + abs(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = 4.0 * (n + 1) * EPS * absum / np.abs(value)
    err = np.where(np.isfinite(err), err, np.inf)
    return value, err


def _ml_poles(a: float, z: np.ndarray):
    """Poles of s^(a-b)/(s^a - z) on the principal sheet, with their weights.

    Returns a list of (s_j, weight) with ``s_j`` complex arrays; poles on the
    boundary of the sheet (|arg s| = pi) carry weight 1/2.
    """
    r = np.abs(z) ** (1.0 / a)
    phase0 = np.where(z < 0, np.pi, 0.0)
    poles = []
    jmax = int(math.ceil(a)) + 1
    for j in range(-jmax, jmax + 1):
        theta = (phase0 + 2.0 * np.pi * j) / a
        inside = np.abs(theta) < np.pi * (1.0 - 1.0e-14)
        boundary = np.abs(np.abs(theta) - np.pi) <= np.pi * 1.0e-14
        weight = np.where(inside, 1.0, np.where(boundary, 0.5, 0.0))
        if np.any(weight > 0):
            poles.append((r * np.exp(1j * theta), weight))
    return poles


def _ml_residues(a, b, poles, z):
    total = np.zeros(z.shape, dtype=complex)
    for s, w in poles:
        if np.any((w > 0) & (s.real > 700.0)):
            raise RangeOverflowError("Mittag-Leffler function overflows")
        with np.errstate(all="ignore"):
            contrib = np.where(w > 0, w * s ** (1.0 - b) * np.exp(s), 0.0)
        total += contrib
    return total / a


def _ml_asymptotic(a: float, b: float, z: np.ndarray):
    """Exponential (pole) terms plus the optimally truncated algebraic tail."""
    exp_part = _ml_residues(a, b, _ml_poles(a, z), z).real

    # for integer a and b the algebraic part is a finite sum
    terminating = float(a).is_integer() and float(b).is_integer()
    kmax = int(math.ceil(b / a)) if terminating else ML_ASYMPTOTIC_TERMS
    k = np.arange(1, kmax + 1)
    logz = np.log(np.abs(z))[:, None]
    sign = np.where(z < 0, -1.0, 1.0)[:, None] ** k
    with np.errstate(over="ignore", under="ignore"):
        # |1/Gamma| grows factorially for negative arguments: work in logs
        rg = sp.rgamma(b - a * k)
        mags = np.exp(-k * logz + np.log(np.abs(rg) + 1e-300)) * (rg != 0)
        mags = np.minimum(mags, 1e300)
    terms = -sign * np.sign(rg) * mags
    partial = np.concatenate([np.zeros((z.size, 1)), np.cumsum(terms, axis=1)], axis=1)
    absum = np.concatenate([np.zeros((z.size, 1)), np.cumsum(mags, axis=1)], axis=1)

    if terminating:
        value = partial[:, -1] + exp_part
        trunc = np.zeros(z.shape)
        used = absum[:, -1]
    else:
        # 1/Gamma(b - a k) vanishes periodically in k, so the size of the first
        # omitted term is judged by the envelope over one period
        w = int(math.ceil(1.0 / a)) + 1
        padded = np.concatenate([mags, np.full((z.size, w), np.inf)], axis=1)
        env = np.lib.stride_tricks.sliding_window_view(padded, w, axis=1)[:, : kmax + 1].max(axis=2)
        scale = np.abs(partial + exp_part[:, None])
        ok = env <= 0.25 * EPS * scale
        first_ok = np.where(ok.any(axis=1), ok.argmax(axis=1), -1)
        best = np.argmin(env, axis=1)
        kstar = np.where(first_ok >= 0, first_ok, best)
        rows = np.arange(z.size)
        value = partial[rows, kstar] + exp_part
        trunc = env[rows, kstar]
        used = absum[rows, kstar]

    with np.errstate(divide="ignore", invalid="ignore"):
        err = (trunc + 8.0 * EPS * (used + np.abs(exp_part))) / np.abs(value)
    err = np.where(np.isfinite(err), err, np.inf)
    return value, err


def _ml_contour_once(a, b, z, npts):
    # Bromwich integral of s^(a-b)/(s^a - z) at t = 1 on the parabola
    # s = mu (1 + i u)^2, trapezoidal rule on u >= 0 with conjugate symmetry
    h = 3.0 / npts
    mu = np.pi * npts / 12.0
    u = np.arange(npts + 1) * h
    s = mu * (1.0 + 1j * u) ** 2
    ds = 2j * mu * (1.0 + 1j * u)
    w = np.full(npts + 1, 2.0)
    w[0] = 1.0

    zz = z[:, None]
    with np.errstate(all="ignore"):
        f = np.exp(s) * s ** (a - b) / (s**a - zz) * ds * w
    value = (h / (2j * np.pi) * f.sum(axis=1)).real
    # rounding errors of the npts terms add like a random walk
    roundoff = h / (2.0 * np.pi) * np.abs(f).max(axis=1) * EPS * math.sqrt(npts + 1)

    # poles to the right of the parabola are not enclosed by it
    poles = []
    for sp_, wt in _ml_poles(a, z):
        right = sp_.real > mu - sp_.imag**2 / (4.0 * mu)
        poles.append((sp_, np.where(right, wt, 0.0)))
    value = value + _ml_residues(a, b, poles, z).real
    return value, roundoff


def _ml_contour(a: float, b: float, z: np.ndarray):
    best_v = np.full(z.shape, np.nan)
    best_e = np.full(z.shape, np.inf)
    prev, _ = _ml_contour_once(a, b, z, ML_CONTOUR_POINTS[0])
    for npts in ML_CONTOUR_POINTS[1:]:
        idx = np.nonzero(best_e > ML_BUDGET)[0]
        if idx.size == 0:
            break
        v, roundoff = _ml_contour_once(a, b, z[idx], npts)
        with np.errstate(divide="ignore", invalid="ignore"):
            e = (np.abs(v - prev[idx]) + roundoff) / np.abs(v)
        e = np.where(np.isfinite(e), e, np.inf)
        prev[idx] = v
        better = e < best_e[idx]
        best_v[idx[better]] = v[better]
        best_e[idx[better]] = e[better]
    return best_v, best_e


def mittag_leffler(params: MLParams | tuple[float, float], z):
    r"""Two-parameter Mittag-Leffler function
    :math:`E_{\alpha,\beta}(z) = \sum_k z^k / \Gamma(\alpha k + \beta)` for real ``z``.

    Small arguments use the power series; large arguments the asymptotic
    expansion (including the exponential pole contributions); the band in
    between inverts the Laplace transform :math:`s^{\alpha-\beta}/(s^\alpha - z)`
    on a parabolic contour. Each regime carries an a-posteriori error estimate
    and hands over to the next one if it misses its budget.
    """
    if not isinstance(params, MLParams):
        params = MLParams(*params)
    a, b = float(params.alpha), float(params.beta)

    za = np.atleast_1d(np.asarray(z, dtype=float)).astype(float)
    if np.any(~np.isfinite(za)):
        raise DomainError("Mittag-Leffler argument must be finite")
    flat = za.ravel()
    out = np.full(flat.shape, np.nan)
    err = np.full(flat.shape, np.inf)
    r = np.abs(flat) ** (1.0 / a)

    zero = flat == 0.0
    out[zero] = rgamma(b)
    err[zero] = 0.0

    def attempt(mask, method):
        idx = np.nonzero(mask & (err > ML_BUDGET))[0]
        if idx.size == 0:
            return
        v, e = method(a, b, flat[idx])
        better = e < err[idx]
        out[idx[better]] = v[better]
        err[idx[better]] = e[better]

    pos = flat > 0
    neg = flat < 0
    attempt(pos & (r < ML_POSITIVE_ASYMPTOTIC_ONSET), _ml_series)
    attempt(pos, _ml_asymptotic)
    attempt(pos, _ml_series)

    attempt(neg & (r >= ML_ASYMPTOTIC_ONSET), _ml_asymptotic)
    attempt(neg & (r <= ML_SERIES_RADIUS), _ml_series)
    attempt(neg & (r < ML_ASYMPTOTIC_ONSET), _ml_asymptotic)
    attempt(neg, _ml_contour)
    attempt(neg & (r <= 4 * ML_SERIES_RADIUS), _ml_series)

    if np.any(err > 10.0 * ML_BUDGET):
        i = int(np.argmax(err))
        raise NonConvergenceError(
            f"Mittag-Leffler E_({a:g},{b:g})({flat[i]:g}): no regime met the error "
            f"budget (best relative error estimate {err[i]:.2e})"
        )
    out = out.reshape(za.shape)
    return float(out[0]) if np.ndim(z) == 0 else out


def _ml_regime(params: MLParams, z: float, regime: str) -> tuple[float, float]:
    """Evaluate a single regime; used by the regime-consistency checks."""
    a, b = params.alpha, params.beta
    fn = {"series": _ml_series, "asymptotic": _ml_asymptotic, "contour": _ml_contour}[regime]
    v, e = fn(a, b, np.array([float(z)]))
    return float(v[0]), float(e[0])


# }}}
