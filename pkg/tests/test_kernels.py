import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfc.errors import DomainError
from gfc.kernels import (
    DIMENSIONLESS,
    INVERSE_LENGTH,
    catalog_json,
    convolve_kernels,
    default_catalog,
    make_pair,
    mittag_leffler_pair,
    power_kernel,
    power_law_pair,
    sonin_certify,
    sonin_grid,
    swapped_pair,
    tempered_pair,
)
from gfc.specialfns import gamma


@pytest.fixture(scope="module")
def catalog():
    return default_catalog()


def test_power_pair_examples():
    pair = power_law_pair(0.5)
    x = np.array([0.1, 0.7])
    np.testing.assert_allclose(pair.M(x), x**-0.5 / math.sqrt(math.pi), rtol=1e-15)
    np.testing.assert_allclose(pair.K(x), x**-0.5 / math.sqrt(math.pi), rtol=1e-15)
    r = sonin_certify(power_law_pair(0.5, certify=False), grid_size=1, tol=1e-12, L=0.7)
    assert abs(r.residuals[0]) <= 1e-13
    p9 = power_law_pair(0.9)
    assert p9.M.exponent == pytest.approx(-0.1) and p9.K.exponent == pytest.approx(-0.9)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_power_pair_certifies(alpha, lam):
    r = sonin_certify(power_law_pair(alpha, lam, certify=False), tol=1e-8)
    assert r.passed and len(r.grid) == 64


def test_tempered_reduces_to_power_as_lambda_vanishes():
    t = tempered_pair(0.5, 1e-12, certify=False)
    p = power_law_pair(0.5, 1e-12, certify=False)
    x = np.array([0.01, 0.3, 1.0])
    np.testing.assert_allclose(t.M(x), p.M(x), rtol=1e-10)
    np.testing.assert_allclose(t.K(x), p.K(x), rtol=1e-10)


def test_tempered_pair_certified(catalog):
    pair = tempered_pair(0.5, 1.0)
    assert pair.report.sup_norm <= 1e-8
    assert tempered_pair(0.3, 2.0).M.exponent == pytest.approx(-0.7)


def test_tempered_certified_reading_is_recorded():
    pair = tempered_pair(0.3, 2.0)
    assert pair.variant == "printed"
    alt = float(pair.provenance.rsplit("=", 1)[1])
    assert alt > 0.1


def test_ml_pair_reading():
    pair = mittag_leffler_pair(0.5, 0.5)
    assert pair.variant == "Gamma(1-beta)"
    assert "Gamma(2-beta)" in pair.provenance and "failed" in pair.provenance
    assert pair.report.sup_norm <= 1e-7


@pytest.mark.parametrize("a, b, lam", [(0.5, 0.5, 1.0), (0.4, 0.7, 1.0), (0.3, 0.6, 2.5)])
def test_ml_kernel_against_series(a, b, lam):
    pair = mittag_leffler_pair(a, b, lam, certify=False)
    mpmath.mp.dps = 30
    for x in [1e-6, 0.01, 0.2, 0.7, 1.0]:
        z = -mpmath.mpf(lam * x) ** a
        series = mpmath.nsum(lambda k: z**k / mpmath.gamma(a * k + b), [0, mpmath.inf])
        ref = float(mpmath.mpf(lam * x) ** (b - 1) * series)
        assert abs(pair.M(x) - ref) <= 1e-12 * abs(ref)


def test_ml_collapse_and_small_x():
    pair = mittag_leffler_pair(0.6, 0.6, certify=False)
    x = 1e-9
    assert pair.M(x) == pytest.approx(x ** (0.6 - 1) / gamma(0.6), rel=1e-5)


def test_ml_parameter_domain():
    with pytest.raises(DomainError):
        mittag_leffler_pair(0.7, 0.5)
    with pytest.raises(DomainError):
        power_law_pair(1.0)
    with pytest.raises(DomainError):
        tempered_pair(0.5, -1.0)


def sonin_oracle(pair, x):
    """int_0^x M(x - z) K(z) dz by tanh-sinh quadrature (independent of the Jacobi rules)."""
    mpmath.mp.dps = 20
    f = lambda z: float(pair.M(float(x - z))) * float(pair.K(float(z)))  # noqa: E731
    return float(mpmath.quad(f, [0, x / 2, x]))


@pytest.mark.parametrize("idx", range(12))
def test_catalog_sonin_oracle(catalog, idx):
    pair = catalog[idx]
    for x in (0.05, 0.6):
        assert abs(sonin_oracle(pair, x) - 1.0) <= 1e-6


def test_catalog_invariants(catalog):
    families = {p.family.replace("swapped ", "") for p in catalog}
    assert {"power", "tempered", "mittag-leffler"} <= families
    for pair in catalog:
        assert pair.residual <= 1e-7
        assert -1 < pair.M.exponent <= 0
        assert pair.M.dimension == DIMENSIONLESS and pair.K.dimension == INVERSE_LENGTH


def test_catalog_membership_regular_part_limit(catalog):
    # x^{-p} k(x) has a finite limit at 0 that the regular part approaches
    for pair in catalog:
        for k in (pair.M, pair.K):
            G = k.regular
            lim = G(np.array([0.0]))[0]
            gaps = [abs(G(np.array([h]))[0] - lim) for h in (1e-2, 1e-4, 1e-8)]
            assert math.isfinite(lim) and lim != 0.0
            assert gaps[2] <= gaps[1] <= gaps[0] + 1e-15
            assert gaps[2] <= 0.1 * abs(lim)


def test_wrong_pair_fails():
    p = power_law_pair(0.5, certify=False)
    r = sonin_certify((p.M, p.K.scaled(1.1)), tol=1e-7)
    assert r.verdict == "fail"
    np.testing.assert_allclose(r.residuals, 0.1, atol=1e-9)


def test_sonin_grid_includes_small_x():
    xs = sonin_grid(1.0)
    assert xs[0] == pytest.approx(2.0**-30) and xs[-1] == 1.0 and len(xs) == 64


def test_swap_examples():
    pair = power_law_pair(0.3, 2.0, certify=False)
    sw = swapped_pair(pair)
    ref = power_law_pair(0.7, 2.0, certify=False)
    x = np.linspace(0.01, 1, 7)
    np.testing.assert_allclose(sw.M(x), ref.M(x), rtol=1e-14)
    np.testing.assert_allclose(sw.K(x), ref.K(x), rtol=1e-14)
    assert sonin_certify(sw).passed


@pytest.mark.parametrize("idx", range(0, 12, 2))
def test_double_swap_involution(catalog, idx):
    pair = catalog[idx]
    back = swapped_pair(swapped_pair(pair))
    x = np.geomspace(1e-6, 1, 20)
    assert np.max(np.abs(back.M(x) - pair.M(x)) / np.abs(pair.M(x))) <= 1e-14
    assert np.max(np.abs(back.K(x) - pair.K(x)) / np.abs(pair.K(x))) <= 1e-14
    assert back.family == pair.family


def test_convolve_power_kernels():
    h = convolve_kernels(power_kernel(0.3), power_kernel(0.3))
    assert h.exponent == pytest.approx(0.3 + 0.3 - 1)
    x = np.array([0.1, 0.5, 1.0])
    np.testing.assert_allclose(h(x), x ** (0.6 - 1) / gamma(0.6), rtol=1e-9)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_convolution_exponent_bookkeeping(a1, a2):
    k = convolve_kernels(power_kernel(a1), power_kernel(a2))
    assert k.exponent == pytest.approx((a1 - 1) + (a2 - 1) + 1)


def test_convolve_pair_gives_one(catalog):
    for pair in catalog[4:6]:
        one = convolve_kernels(pair.M, pair.K)
        np.testing.assert_allclose(one(np.array([0.1, 0.4, 1.0])), 1.0, atol=1e-9)


def test_make_pair_and_json(catalog):
    assert make_pair("swapped-power", alpha=0.3).family == "swapped power"
    assert make_pair("ml", alpha=0.5, beta=0.5).variant == "Gamma(1-beta)"
    with pytest.raises(DomainError):
        make_pair("power", alpha=0.5, bogus=1.0)
    with pytest.raises(DomainError):
        make_pair("gaussian")
    entries = json.loads(catalog_json(catalog))
    assert len(entries) == 12
    assert {"name", "parameters", "p_M", "p_K", "certified_variant", "residual"} <= set(entries[0])
    assert any(e["provenance"].startswith("swapped") for e in entries)
