import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from gfc.errors import DomainError, MonotonicityError
from gfc.exprfn import differentiate, eval_expr, parse
from gfc.functions import ExprFunction, TabulatedFunction
from gfc.monotone import (
    Substitution,
    builtin_map,
    g_monomial,
    inverse_at,
    make_monotone_map,
    substitute,
    tabulated_map,
)


def test_make_map_examples():
    g = make_monotone_map("x", (0.0, 1.0))
    np.testing.assert_array_equal(g.gprime(np.linspace(0, 1, 5)), 1.0)
    h = make_monotone_map("ln(x/1)", (1.0, 4.0))
    assert h.gprime(2.0) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(MonotonicityError) as info:
        make_monotone_map("sin(x)", (0.0, 4.0))
    assert info.value.position is not None and info.value.position > math.pi / 2 - 0.01


def test_map_interval_validation():
    with pytest.raises(DomainError):
        make_monotone_map("x", (1.0, 1.0))


def test_inverse_examples():
    assert inverse_at(make_monotone_map("x^2", (0.0, 2.0)), 1.0) == pytest.approx(1.0, abs=1e-12)
    assert inverse_at(make_monotone_map("ln(x)", (1.0, 4.0)), math.log(3.0)) == pytest.approx(3.0, abs=1e-11)
    m = make_monotone_map("x + sin(x)/2", (0.0, 3.0))
    x = inverse_at(m, 2.0)
    oracle = brentq(lambda v: v + math.sin(v) / 2 - 2.0, 0.0, 3.0, xtol=1e-15)
    assert abs(x - oracle) <= 1e-12
    with pytest.raises(DomainError):
        inverse_at(m, 10.0)


@pytest.mark.parametrize("expr, interval", [("x^3 + x", (-1.0, 2.0)), ("exp(x)", (0.0, 3.0)),
                                            ("x + sin(x)/2", (0.0, 3.0)), ("sqrt(x)", (0.01, 4.0))])
def test_inverse_round_trip(expr, interval):
    m = make_monotone_map(expr, interval)
    y = np.random.default_rng(7).uniform(m.ga, m.gb, 100)
    x = m.inverse(y)
    assert np.all(np.abs(m.g(x) - y) <= m.inverse_tolerance * (1 + np.abs(y)))


def test_inverse_accepts_2d_arrays():
    m = make_monotone_map("x + x^3", (0.0, 1.0))
    y = np.linspace(m.ga, m.gb, 12).reshape(3, 4)
    x = m.inverse(y)
    assert x.shape == (3, 4)
    np.testing.assert_allclose(m.g(x), y, atol=1e-12)


def test_substitution_examples():
    f = ExprFunction("x^2")
    shift = builtin_map("shift", (2.0, 5.0))
    assert substitute(Substitution(shift), f)(3.5) == pytest.approx(1.5**2, rel=1e-15)
    m = make_monotone_map("x^3 + x", (0.0, 2.0))
    fwd = Substitution(m)
    back = substitute(fwd.inverted, f)
    composed = substitute(fwd, back)
    assert composed(1.3) == pytest.approx(1.69, abs=1e-12)
    ln = builtin_map("hadamard", (1.0, 5.0))
    exp_of_ln = Substitution(ln)(ExprFunction("exp(x)"))
    np.testing.assert_allclose(exp_of_ln(np.linspace(1, 5, 9)), np.linspace(1, 5, 9), rtol=1e-14)


def test_inverse_then_forward_on_samples():
    m = make_monotone_map("x + x^2/3", (0.0, 2.0))
    f = ExprFunction("cos(3*x) + x")
    h = substitute(Substitution(m, "inverse"), substitute(Substitution(m), f))
    x = np.random.default_rng(3).uniform(0, 2, 100)
    assert np.max(np.abs(h(x) - f(x))) <= 1e-12


def test_builtin_maps():
    assert builtin_map("identity", (0.0, 1.0)).g(0.3) == 0.3
    had = builtin_map("hadamard", (1.0, math.e))
    assert (had.ga, had.gb) == (0.0, pytest.approx(1.0, rel=1e-15))
    assert builtin_map("power", (0.0, 1.0), sigma=2.0).g(0.5) == 0.25
    with pytest.raises(DomainError):
        builtin_map("hadamard", (0.0, 1.0))
    with pytest.raises(DomainError):
        builtin_map("power", (0.0, 1.0), sigma=-1.0)
    with pytest.raises(DomainError):
        builtin_map("power", (-1.0, 1.0), sigma=2.0)


@pytest.mark.parametrize("name, interval, params", [("hadamard", (1.0, 3.0), {}), ("power", (0.0, 2.0), {"sigma": 0.5}),
                                                    ("power", (0.5, 2.0), {"sigma": 3.0})])
def test_builtin_inverse_and_delta(name, interval, params):
    m = builtin_map(name, interval, **params)
    x = np.linspace(*interval, 50)[1:]
    np.testing.assert_allclose(m.inverse(m.g(x)), x, rtol=1e-13)
    u = x - 1e-9 * x
    exact = m.gprime(x) * 1e-9 * x  # first-order, good to ~1e-9 relative
    np.testing.assert_allclose(m.delta(x, u), exact, rtol=1e-7)


def test_generic_delta_is_accurate_for_close_points():
    m = make_monotone_map("x + x^3", (0.0, 1.0))
    x = np.array([0.5, 0.9])
    d = np.array([1e-12, 1e-9])
    ref = d * (1 + x**2 + (x - d) ** 2 + x * (x - d))  # (x^3 - u^3) / (x - u) expanded
    np.testing.assert_allclose(m.delta(x, x - d, d), ref, rtol=1e-13)


def test_tabulated_map_delta_across_knots():
    t = np.linspace(0, 1, 11)
    X = TabulatedFunction(t, np.exp(t) + t)
    g = tabulated_map(X)
    x = np.array([0.3001, 0.45, 0.8, 0.95])
    u = x - np.array([2e-4, 1e-3, 5e-3, 3e-2])
    assert np.max(np.abs(g.delta(x, u) - (X(x) - X(u)))) <= 1e-14


@given(st.sampled_from(["sin({u})", "({u})^3", "exp(-({u}))", "ln(1 + {u})"]),
       st.sampled_from([("x^2 + x", (0.1, 2.0)), ("ln(x)", (1.0, 3.0)), ("x + sin(x)/2", (0.0, 3.0))]),
       st.floats(0.0, 1.0))
def test_commutation_with_substitution(F_text, g_spec, s):
    # (1/g'(u)) d/du F(g(u)) = F'(g(u)), derivatives taken symbolically
    g_text, interval = g_spec
    m = make_monotone_map(g_text, interval)
    u = interval[0] + s * (interval[1] - interval[0])
    composed = parse(F_text.format(u=f"({g_text})"))
    lhs = eval_expr(differentiate(composed), np.array([u]))[0] / m.gprime(u)
    rhs = eval_expr(differentiate(parse(F_text.format(u="x"))), np.array([m.g(u)]))[0]
    assert abs(lhs - rhs) <= 1e-8 * (1 + abs(rhs))


def test_g_monomial_and_reflection():
    m = builtin_map("power", (0.0, 1.0), sigma=2.0)
    f = g_monomial(m, 0.7)
    assert f(0.5) == pytest.approx(0.25**0.7, rel=1e-15)
    assert f.edge_exponent(0.0) == pytest.approx(1.4)
    fr = g_monomial(m, 0.7, "right")
    assert fr(0.5) == pytest.approx(0.75**0.7, rel=1e-14)
    r = m.reflected()
    x = np.linspace(0.1, 0.9, 5)
    np.testing.assert_allclose(r.g(x), -m.g(1 - x), rtol=1e-15)
    np.testing.assert_allclose(r.inverse(r.g(x)), x, rtol=1e-13)
