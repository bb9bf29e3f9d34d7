"""Higher-order product formulas for exp(-i (H_1 + ... + H_N) t).

Construct, verify, search for and benchmark splitting methods built from
fundamental units ``(exp(a A_1) ... exp(a A_N)) ** alpha``.
"""
from .methods import (
    LABELS,
    Method,
    MethodSyntaxError,
    Unit,
    inverse_count,
    method_order,
    parse_method,
    print_method,
    sigma_all,
)
from .bench import builtin, builtin_methods

__version__ = "0.1.0"

__all__ = [
    "LABELS",
    "Method",
    "MethodSyntaxError",
    "Unit",
    "builtin",
    "builtin_methods",
    "inverse_count",
    "method_order",
    "parse_method",
    "print_method",
    "sigma_all",
]
