import json
import math

import numpy as np
import pytest

from gfc.errors import DomainError
from gfc.functions import ExprFunction
from gfc.kernels import default_catalog, mittag_leffler_pair, power_kernel, power_law_pair, tempered_pair
from gfc.monotone import builtin_map, g_monomial, make_monotone_map
from gfc.quadrature import QuadBudget
from gfc.verify import (
    check_ft1,
    check_ft2,
    check_reduction_suite,
    check_semigroup,
    function_battery,
    reports_json,
    run_suite,
)

IDENT = builtin_map("identity", (0.0, 1.0))
LOG = builtin_map("hadamard", (1.0, math.e))
LIGHT = QuadBudget(order=32, tol=1e-9)


def test_ft1_power_pair_square():
    f = ExprFunction("x^2", (0.0, 1.0))
    for kind in ("RL", "Caputo"):
        r = check_ft1(power_law_pair(0.5), IDENT, f, kind, tol=1e-6)
        assert r.verdict == "pass" and not r.inconclusive


def test_ft1_ml_pair_log_map_sin():
    pair = mittag_leffler_pair(0.5, 0.5)
    f = ExprFunction("sin(x)", LOG.interval)
    for side in ("left", "right"):
        r = check_ft1(pair, LOG, f, "RL", side=side, tol=1e-5)
        assert r.verdict == "pass", r.sup_norm


def test_ft1_mismatched_pair_fails_loudly():
    M = power_law_pair(0.6, certify=False).M
    K = power_law_pair(0.5, certify=False).K
    r = check_ft1((M, K), IDENT, ExprFunction("1 + x", (0.0, 1.0)), "RL", tol=1e-5)
    assert r.verdict == "fail" and r.sup_norm >= 0.01


def test_ft2_caputo_closed_form():
    g = make_monotone_map("x^2", (0.0, 1.0))
    r = check_ft2(power_law_pair(0.5), g, g_monomial(g, 0.7), "Caputo", tol=1e-6)
    assert r.verdict == "pass"


def test_ft2_constant_is_exact():
    r = check_ft2(tempered_pair(0.5, 1.0), IDENT, 2.0, "Caputo", tol=0.0)
    assert r.sup_norm == 0.0 and r.verdict == "pass"


@pytest.mark.parametrize("side", ["left", "right"])
def test_ft2_rl_range_restricted_and_general(side):
    pair = tempered_pair(0.5, 1.0)
    h = ExprFunction("cos(x)", (0.0, 1.0))
    r = check_ft2(pair, IDENT, h, "RL", side, tol=1e-5)
    assert r.verdict == "pass" and "range-restricted" in r.identity
    # on a general f the residual is measured, not asserted: f(anchor) != 0 leaves a memory term
    g = check_ft2(pair, IDENT, h, "RL", side, tol=1e-5, range_restricted=False)
    assert g.config["range_restricted"] is False
    assert np.isfinite(g.sup_norm)


def test_ft2_right_caputo_target_sign():
    r = check_ft2(power_law_pair(0.4), IDENT, ExprFunction("exp(x)", (0.0, 1.0)), "Caputo", "right",
                  tol=1e-6)
    assert r.verdict == "pass"
    assert r.details["residual_vs_reversed_sign_target"] > 0.1


def test_semigroup_power_closed_form():
    f = ExprFunction("1", (0.0, 1.0))
    r = check_semigroup(power_kernel(0.3), power_kernel(0.4), IDENT, f, tol=1e-7)
    assert r.verdict == "pass"
    r = check_semigroup(power_kernel(0.3, 2.0), power_kernel(0.4, 2.0), LOG, ExprFunction("1", LOG.interval),
                        tol=1e-7)
    assert r.verdict == "pass"


def test_semigroup_commutes_for_general_pairs():
    p1, p2 = tempered_pair(0.5, 1.0), mittag_leffler_pair(0.5, 0.5)
    f = ExprFunction("1 + x", (0.0, 1.0))
    r12 = check_semigroup(p1, p2, IDENT, f, tol=1e-5)
    r21 = check_semigroup(p2, p1, IDENT, f, tol=1e-5)
    assert r12.verdict == "pass" and r21.verdict == "pass"
    assert np.max(np.abs(np.subtract(r12.residuals, r21.residuals))) <= 1e-9


def test_reduction_suite():
    reports = check_reduction_suite()
    assert {r.identity[0] for r in reports} == set("ABCD")
    for r in reports:
        assert r.verdict == "pass", (r.identity, r.sup_norm)
    b = [r for r in reports if "alpha=0.999" in r.identity]
    assert len(b) == 2 and all(r.tolerance == 0.02 for r in b)


def test_reports_are_deterministic():
    pair = mittag_leffler_pair(0.5, 0.5)
    f = ExprFunction("exp(x)", (0.0, 1.0))
    r1 = check_ft1(pair, IDENT, f, "Caputo")
    r2 = check_ft1(pair, IDENT, f, "Caputo")
    assert r1.residuals == r2.residuals
    assert r1.to_dict()["fingerprint"] == r2.to_dict()["fingerprint"]
    r3 = check_ft1(pair, IDENT, f, "RL")
    assert r3.to_dict()["fingerprint"] != r1.to_dict()["fingerprint"]


def test_ft1_converges_with_tolerance():
    pair = tempered_pair(0.5, 1.0)
    f = ExprFunction("sin(3*x) + 1", (0.0, 1.0))
    sups = [check_ft1(pair, IDENT, f, "RL", budget=QuadBudget(tol=t)).sup_norm for t in (1e-6, 1e-8, 1e-10)]
    assert sups[1] <= 2 * sups[0] and sups[2] <= 2 * sups[1]
    assert sups[2] <= 1e-8


def test_battery_contents():
    names = [n for n, _ in function_battery(IDENT)]
    assert names[:4] == ["g-monomial^0.3", "g-monomial^0.7", "g-monomial^1", "g-monomial^2"]
    assert {"sin", "exp", "tabulated"} <= set(names)


def test_run_suite_small():
    cat = [power_law_pair(0.5)]
    reports = run_suite("ft1", cat, [IDENT], functions=["x^2"], budget=LIGHT, grid_n=4)
    assert len(reports) == 4 and all(r.verdict == "pass" for r in reports)
    data = json.loads(reports_json(reports))
    assert data[0]["verdict"] == "pass" and len(data[0]["fingerprint"]) == 16
    with pytest.raises(DomainError):
        run_suite("everything")


def test_catalog_ft2_caputo_on_a_battery_member():
    for pair in default_catalog()[::3]:
        r = check_ft2(pair, LOG, ExprFunction("exp(x)", LOG.interval), "Caputo", "left", budget=LIGHT,
                      grid=np.linspace(1.2, 2.6, 4))
        assert r.verdict == "pass", (pair.family, r.sup_norm)
