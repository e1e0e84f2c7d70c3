"""General fractional integrals and derivatives with respect to a monotone map.

Kernels are Sonin pairs ``(M, K)`` with ``int_0^x M(x-z) K(z) dz = 1``; the
operators act on a function ``f`` through an increasing map ``g``.
"""

from .errors import (
    CertificationError,
    DomainError,
    DomainFault,
    GFCError,
    MissingDerivativeError,
    MonotonicityError,
    NonConvergenceError,
    ParseError,
    PoleError,
    RangeOverflowError,
    ToleranceNotMetError,
    UnknownIdentifierError,
)
from .exprfn import differentiate, eval_expr, parse, simplify, to_string
from .functions import (
    CallableFunction,
    ExprFunction,
    FunctionHandle,
    TabulatedFunction,
    as_function,
)
from .kernels import (
    KernelPair,
    SingularKernel,
    default_catalog,
    make_pair,
    mittag_leffler_pair,
    power_kernel,
    power_law_pair,
    sonin_certify,
    swapped_pair,
    tempered_pair,
)
from .monotone import MonotoneMap, builtin_map, g_monomial, make_monotone_map, tabulated_map
from .operators import (
    OperatorRequest,
    OperatorResult,
    erdelyi_kober,
    evaluate_operator,
    gfd_caputo,
    gfd_rl,
    gfi,
)
from .quadrature import QuadBudget, adaptive_integral, default_budget, jacobi_rule, weighted_integral
from .reports import ResidualReport
from .specialfns import gamma, lower_incomplete_gamma, mittag_leffler, rgamma

__version__ = "0.1.0"

__all__ = [
    "CertificationError",
    "DomainError",
    "DomainFault",
    "GFCError",
    "MissingDerivativeError",
    "MonotonicityError",
    "NonConvergenceError",
    "ParseError",
    "PoleError",
    "RangeOverflowError",
    "ToleranceNotMetError",
    "UnknownIdentifierError",
    "differentiate",
    "eval_expr",
    "parse",
    "simplify",
    "to_string",
    "CallableFunction",
    "ExprFunction",
    "FunctionHandle",
    "TabulatedFunction",
    "as_function",
    "KernelPair",
    "SingularKernel",
    "default_catalog",
    "make_pair",
    "mittag_leffler_pair",
    "power_kernel",
    "power_law_pair",
    "sonin_certify",
    "swapped_pair",
    "tempered_pair",
    "MonotoneMap",
    "builtin_map",
    "g_monomial",
    "make_monotone_map",
    "tabulated_map",
    "OperatorRequest",
    "OperatorResult",
    "erdelyi_kober",
    "evaluate_operator",
    "gfd_caputo",
    "gfd_rl",
    "gfi",
    "QuadBudget",
    "adaptive_integral",
    "default_budget",
    "jacobi_rule",
    "weighted_integral",
    "ResidualReport",
    "gamma",
    "lower_incomplete_gamma",
    "mittag_leffler",
    "rgamma",
]
