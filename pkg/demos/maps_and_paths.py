"""Operators with respect to a map g, evaluated along two independent routes.

The direct route integrates in x; the conjugated one substitutes s = g(u) and
goes through the numeric inverse of g. They should agree to quadrature error.
"""

import math

import numpy as np

from gfc import (ExprFunction, builtin_map, gfd_caputo, gfd_rl, gfi, make_monotone_map, power_kernel,
                 tempered_pair)
from gfc.monotone import g_monomial
from gfc.specialfns import gamma

pair = tempered_pair(0.5, 1.5, L=2.0)
g = make_monotone_map("x + x^3/3", (0.0, 1.0))
f = ExprFunction("exp(-x) * cos(4*x)", (0.0, 1.0))
xs = np.linspace(0.1, 1.0, 4)

for name, op, k in (("GFI", gfi, pair.M), ("Caputo", gfd_caputo, pair.K), ("RL", gfd_rl, pair.K)):
    d = op(k, g, f, xs, path="direct")
    c = op(k, g, f, xs, path="conjugated")
    print(f"{name:7s} max |direct - conjugated| = {np.max(np.abs(d.values - c.values)):.1e}")

# Hadamard map: the Caputo derivative of a log-power has a closed form.
h = builtin_map("hadamard", (1.0, math.e))
alpha, beta = 0.4, 0.9
xs = np.array([1.5, 2.0, 2.7])
got = gfd_caputo(power_kernel(1 - alpha), h, g_monomial(h, beta), xs).values
ref = gamma(beta + 1) / gamma(beta - alpha + 1) * np.log(xs) ** (beta - alpha)
print("Hadamard closed form, relative error:", np.abs(got / ref - 1).max())
