import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gfc.econ import (
    MarginalSpec,
    SeriesFormatError,
    TimeSeries,
    gf_elasticity,
    load_series,
    marginal_rows,
    memory_marginal,
    normalized_marginal,
    parse_series,
    rows_to_csv,
    rows_to_json,
    standard_marginal,
)
from gfc.errors import DomainError, MonotonicityError
from gfc.kernels import default_catalog, power_law_pair, tempered_pair
from gfc.specialfns import gamma

T = np.linspace(0.0, 2.0, 401)
X = 1.0 + T + 0.25 * T**2


def series(Y, t=T, X=X):
    return TimeSeries.from_arrays(t, X, Y)


def test_load_examples(tmp_path):
    s = parse_series("t,X,Y\n0,1,2\n1,2,3\n2,4,5\n")
    assert len(s) == 3
    with pytest.raises(MonotonicityError, match="row 3"):
        parse_series("t,X,Y\n0,1,2\n1,3,3\n2,2,5\n")
    with pytest.raises(SeriesFormatError) as info:
        parse_series("t,X,Y\n0,1,2\n1,2,3\n1,4,5\n")
    assert info.value.line == 4
    with pytest.raises(SeriesFormatError) as info:
        parse_series("t,X,Y\n0,1,2\n1,x,3\n2,4,5\n")
    assert info.value.line == 3
    with pytest.raises(SeriesFormatError):
        parse_series("time,X,Y\n0,1,2\n")
    p = tmp_path / "d.csv"
    p.write_text("t,X,Y\n0,1,1\n1,2,4\n2,3,9\n3,4,16\n")
    assert load_series(p).interval == (0.0, 3.0)


def test_standard_marginal_examples():
    assert standard_marginal(series(X), 1.3) == pytest.approx(1.0, abs=1e-12)
    s = TimeSeries.from_arrays(T, T + 1.0, T**2)
    assert standard_marginal(s, 1.5) == pytest.approx(3.0, rel=1e-5)
    s = series(X**3)
    t = 1.1
    x = 1 + t + t * t / 4
    assert standard_marginal(s, t) == pytest.approx(3 * x**2, rel=1e-4)


@pytest.mark.parametrize("alpha, beta", [(0.5, 1.5), (0.3, 2.0), (0.7, 1.0)])
def test_fractional_power_closed_form(alpha, beta):
    s = series((X - X[0]) ** beta)
    for t in (0.7, 1.9):
        x = 1 + t + t * t / 4 - 1.0
        ref = gamma(beta + 1) / gamma(beta - alpha + 1) * x ** (beta - alpha)
        got = memory_marginal(s, MarginalSpec("fractional", alpha), t)
        assert got == pytest.approx(ref, rel=1e-5)


def test_fractional_linear_is_exact():
    s = series(X - X[0])
    t = 1.5
    got = memory_marginal(s, MarginalSpec("fractional", 0.5), t)
    assert got == pytest.approx((t + t * t / 4) ** 0.5 / gamma(1.5), rel=1e-10)


def test_fractional_against_quadpack():
    s = series(np.sin(2 * T) + X**2)
    t, alpha = 1.5, 0.5
    xi, dy = s.x_interp, s.y_interp.derivative()
    # u = t - v^2 removes the endpoint singularity; the knots become breakpoints in v
    knots = np.sqrt(t - T[(T > 0) & (T < t)])

    def smooth(v):
        u = t - v * v
        r = (xi(t) - xi(u)) / (v * v) if v > 0 else xi.derivative()(t)
        return float(2.0 * r**-alpha * dy(u))

    edges = np.unique(np.concatenate([[0.0, math.sqrt(t)], knots]))
    ref = sum(integrate.quad(smooth, lo, hi, epsabs=1e-14, epsrel=1e-11)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    got = memory_marginal(s, MarginalSpec("fractional", alpha), t)
    assert got == pytest.approx(ref / gamma(1 - alpha), rel=1e-9)


def test_alpha_one_is_standard():
    s = series(np.sin(T) + X)
    for t in (0.5, 1.7):
        assert memory_marginal(s, MarginalSpec("fractional", 1.0), t) == pytest.approx(
            standard_marginal(s, t), rel=1e-12)
    near = memory_marginal(s, MarginalSpec("fractional", 0.9999), 1.7)
    assert near == pytest.approx(standard_marginal(s, 1.7), rel=1e-2)


def test_normalization_examples():
    s = series(X)
    for pair in default_catalog(L=4.0):
        v = normalized_marginal(s, MarginalSpec("general", pair=pair), 1.2)
        assert v == pytest.approx(1.0, abs=1e-10)
    s2 = series(2 * X)
    assert normalized_marginal(s2, MarginalSpec("fractional", 0.5), 1.2) == pytest.approx(2.0, abs=1e-9)
    s3 = series((X - X[0]) ** 2)
    t = 1.2
    x = t + t * t / 4
    ref = (gamma(3) / gamma(2.5) * x**1.5) / (x**0.5 / gamma(1.5))
    got = memory_marginal(s3, MarginalSpec("fractional", 0.5, normalization="ratio"), t)
    assert got == pytest.approx(ref, rel=1e-5)


def test_general_matches_fractional():
    s = series(np.exp(0.3 * T) * X)
    for alpha in (0.3, 0.6):
        pair = power_law_pair(alpha, L=4.0)
        for t in (0.4, 1.8):
            g = memory_marginal(s, MarginalSpec("general", pair=pair), t)
            f = memory_marginal(s, MarginalSpec("fractional", alpha), t)
            assert g == pytest.approx(f, rel=1e-8, abs=1e-8)


def test_constants_are_annihilated():
    s = series(np.full(T.shape, 3.0))
    assert memory_marginal(s, MarginalSpec("fractional", 0.4), 1.0) == 0.0
    assert memory_marginal(s, MarginalSpec("general", pair=tempered_pair(0.5, 1.0, L=4.0)), 1.0) == 0.0
    assert gf_elasticity(s, power_law_pair(0.5, L=4.0), 1.0) == 0.0


def test_window_start():
    s = series(X**2)
    full = memory_marginal(s, MarginalSpec("fractional", 0.5), 1.5)
    short = memory_marginal(s, MarginalSpec("fractional", 0.5, window_start=1.0), 1.5)
    assert short != full
    with pytest.raises(DomainError):
        memory_marginal(s, MarginalSpec("fractional", 0.5, window_start=1.6), 1.5)


def test_elasticity():
    C, k = 3.0, 0.7
    s = series(C * X**k)
    t = 1.5
    assert gf_elasticity(s, power_law_pair(0.999, L=4.0), t) == pytest.approx(k, rel=0.01)
    lx = math.log(1 + t + t * t / 4)
    ref = k * lx**0.5 / gamma(1.5)
    assert gf_elasticity(s, power_law_pair(0.5, L=4.0), t) == pytest.approx(ref, rel=1e-5)
    bad = TimeSeries.from_arrays(T, X, X - 2.0)
    with pytest.raises(DomainError, match="row"):
        gf_elasticity(bad, power_law_pair(0.5, L=4.0), t)


@settings(max_examples=6)
@given(st.floats(0.3, 1.5), st.sampled_from([0.3, 0.6]))
def test_reparametrization_invariance(p, alpha):
    # same (X, Y) samples on a warped clock tau = (e^{pt} - 1)/p
    Y = np.log(X) + X**1.5
    s1 = series(Y)
    tau = np.expm1(p * T) / p
    s2 = TimeSeries.from_arrays(tau, X, Y)
    spec = MarginalSpec("fractional", alpha)
    # compare at a sample, where both clocks see the same X
    i = 280
    v1 = memory_marginal(s1, spec, T[i])
    v2 = memory_marginal(s2, spec, tau[i])
    assert v1 == pytest.approx(v2, rel=1e-4)


def test_rows_csv_json():
    s = series(X**2)
    spec = MarginalSpec("fractional", 0.5)
    rows = marginal_rows(s, spec, [0.5, 1.0])
    text = rows_to_csv(rows)
    assert text.startswith("t,value,err_estimate\n0.5,") and text.endswith("\n")
    assert float(text.splitlines()[1].split(",")[1]) == rows[0][1]
    doc = json.loads(rows_to_json(rows, spec))
    assert doc["spec"]["alpha"] == 0.5 and len(doc["rows"]) == 2


def test_spec_validation():
    with pytest.raises(DomainError):
        MarginalSpec("fractional", 1.5)
    with pytest.raises(DomainError):
        MarginalSpec("general")
    with pytest.raises(DomainError):
        MarginalSpec("fractional", 0.5, normalization="log")
