import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta, roots_jacobi

from gfc.errors import DomainError, ToleranceNotMetError
from gfc.quadrature import (
    QuadBudget,
    adaptive_integral,
    default_budget,
    jacobi_rule,
    singular_convolution,
    weighted_integral,
)


def test_rule_examples():
    assert jacobi_rule(8, 0.0).weights.sum() == pytest.approx(1.0, abs=1e-14)
    r = jacobi_rule(8, -0.5)
    assert r.weights.sum() == pytest.approx(2.0, abs=1e-13)
    assert r.integrate(lambda t: t) == pytest.approx(4.0 / 3.0, abs=1e-13)


@pytest.mark.parametrize("n", [2, 5, 16, 64])
@pytest.mark.parametrize("p", [-0.9, -0.5, -0.1, 0.0])
def test_rule_invariants(n, p):
    r = jacobi_rule(n, p)
    assert np.all(r.weights > 0)
    assert np.all((r.nodes > 0) & (r.nodes < 1))
    np.testing.assert_allclose(r.nodes + r.complements, 1.0, atol=1e-15)
    assert abs(r.weights.sum() - 1 / (p + 1)) <= 1e-12 * (1 / (p + 1))


@pytest.mark.parametrize("n", [3, 8, 20])
@pytest.mark.parametrize("p, q", [(-0.5, 0.0), (-0.3, -0.7), (0.0, 0.4), (-0.95, 0.0)])
def test_rule_exact_for_monomials(n, p, q):
    r = jacobi_rule(n, p, q)
    for k in range(2 * n):
        exact = beta(k + q + 1, p + 1)
        assert abs(r.integrate(lambda t: t**k) - exact) <= 1e-11 * exact


def test_rule_against_scipy_nodes():
    # same rule through a different algorithm: nodes of (1-x)^a (1+x)^b on [-1, 1]
    x, _ = roots_jacobi(12, -0.4, 0.3)
    r = jacobi_rule(12, -0.4, 0.3)
    np.testing.assert_allclose(np.sort(2 * r.nodes - 1), np.sort(x), atol=1e-14)


def test_rule_validation():
    with pytest.raises(DomainError):
        jacobi_rule(4, -1.0)
    with pytest.raises(DomainError):
        jacobi_rule(0, 0.0)
    with pytest.raises(DomainError):
        QuadBudget(order=1)
    with pytest.raises(DomainError):
        QuadBudget(tol=0.0)


def test_singular_convolution_examples():
    assert singular_convolution(lambda s: np.ones_like(s), -0.5, 0.0, 1.0) == pytest.approx(2.0, abs=1e-13)
    assert singular_convolution(lambda s: s, -0.5, 0.0, 1.0) == pytest.approx(4 / 3, abs=1e-13)
    assert singular_convolution(np.exp, 0.0, 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-13)


def test_singular_convolution_reports_failure():
    rough = lambda s: np.abs(np.sin(1e4 * s))  # noqa: E731
    with pytest.raises(ToleranceNotMetError) as info:
        singular_convolution(rough, -0.5, 0.0, 1.0, QuadBudget(order=8, tol=1e-14, max_subdivisions=2))
    assert info.value.estimate is not None and info.value.error > 0


def test_adaptive_examples():
    assert adaptive_integral(lambda s: s**-0.5, (0.0, 1.0), singular_endpoint="lower") == pytest.approx(2.0, abs=1e-9)
    v = adaptive_integral(lambda s: (s * (1 - s)) ** -0.5, (0.0, 1.0), singular_endpoint="both")
    assert v == pytest.approx(math.pi, abs=1e-9)
    assert adaptive_integral(math.cos, (0.0, 1.0)) == pytest.approx(math.sin(1.0), abs=1e-13)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.floats(0.5, 8.0), st.floats(-0.9, 0.0),
       st.floats(0.1, 2.0))
def test_singular_convolution_agrees_with_adaptive(coefs, freq, p, upper):
    budget = QuadBudget(tol=1e-10)

    def G(s):
        return np.polyval(coefs, s) + np.sin(freq * s)

    fast = singular_convolution(G, p, 0.0, upper, budget)
    # oracle in the distance v = upper - s, so the singular factor is exact
    slow = adaptive_integral(lambda v: v**p * float(G(np.array(upper - v))), (0.0, upper),
                             QuadBudget(tol=1e-11), singular_endpoint="lower")
    assert abs(fast - slow) <= 10 * budget.tol * max(1.0, abs(slow))


@pytest.mark.parametrize("p, q", [(-0.5, 0.0), (-0.3, -0.6), (0.0, 0.0)])
def test_budget_monotone(p, q):
    def phi(_i, s, dh, dl):
        return np.exp(np.sin(7 * s)) / (1 + 25 * s**2)

    bounds = []
    for tol in [1e-4, 5e-5, 2.5e-5, 1e-6, 1e-8, 1e-10, 1e-12]:
        res = weighted_integral(phi, np.array([0.0]), np.array([1.3]), p, q, QuadBudget(order=8, tol=tol))
        bounds.append(float(res.errors[0]))
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_weighted_integral_breakpoints():
    # |s - 0.3| is only piecewise smooth; splitting at the kink makes it exact
    def phi(_i, s, dh, dl):
        return np.abs(s - 0.3)

    res = weighted_integral(phi, np.array([0.0, 0.1]), np.array([1.0, 0.2]), 0.0, 0.0, QuadBudget(order=4), (0.3,))
    np.testing.assert_allclose(res.values, [0.045 + 0.245, 0.015], atol=1e-15)
    assert res.converged.all()


def test_default_budget_env(monkeypatch):
    monkeypatch.setenv("GFC_QUAD_TOL", "1e-7")
    assert default_budget().tol == 1e-7
    monkeypatch.setenv("GFC_QUAD_TOL", "abc")
    with pytest.raises(DomainError):
        default_budget()
    monkeypatch.delenv("GFC_QUAD_TOL")
    assert default_budget() == QuadBudget()
