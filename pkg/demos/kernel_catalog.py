"""Certify the built-in Sonin pairs and show what the certifier decided.

Run with ``python demos/kernel_catalog.py``.
"""

import numpy as np

from gfc import default_catalog, mittag_leffler_pair, sonin_certify, tempered_pair
from gfc.kernels import convolve_kernels

catalog = default_catalog()
print(f"{'pair':46s} {'p_M':>7s} {'p_K':>7s} {'residual':>10s}  reading")
for pair in catalog:
    print(f"{pair.label:46s} {pair.M.exponent:7.3f} {pair.K.exponent:7.3f} {pair.residual:10.2e}  "
          f"{pair.variant}")

# The ML pair has an ambiguous normalising constant; both readings were tried.
ml = mittag_leffler_pair(0.5, 0.5)
print("\nMittag-Leffler provenance:", ml.provenance)

# A tempered pair at lambda = 2, where the two argument conventions differ.
tp = tempered_pair(0.3, 2.0)
print("tempered(0.3, 2):", tp.provenance)

# M * K should be the constant 1 on (0, L].
one = convolve_kernels(tp.M, tp.K)
xs = np.array([1e-6, 1e-3, 0.1, 0.5, 1.0])
print("(M*K)(x) - 1 =", one(xs) - 1.0)

# A non-Sonin pair fails loudly.
bad = sonin_certify((tp.M, tp.K.scaled(1.05)))
print(f"scaled K: verdict {bad.verdict}, sup residual {bad.sup_norm:.3f}")
