"""Exact formal Laurent-Puiseux series of symbolic functions.

>>> import sympy as sp
>>> from formalps import formal_power_series, render
>>> x = sp.Symbol('x')
>>> render(formal_power_series(sp.exp(x), x))
'Sum(x^k/k!, k=0..infinity)'
"""

from .errors import (
    BranchFailedError,
    DomainError,
    EssentialSingularityError,
    FPSError,
    LimitUndecidedError,
    NoDEFoundError,
    ParseError,
    UnknownFunctionError,
)
from .expr import declare_function, register_function
from .oracle import truncated_series
from .parser import parse_expression, parse_point
from .pipeline import formal_power_series
from .recurrence import RE, convert_de_to_re
from .series import (
    FPSResult,
    PowerSum,
    eval_coefficient,
    partial_sum,
    render,
    stream_coefficients,
)
from .simple_de import SimpleDE, find_lowest_de, find_simple_de

__all__ = [
    "BranchFailedError",
    "DomainError",
    "EssentialSingularityError",
    "FPSError",
    "FPSResult",
    "LimitUndecidedError",
    "NoDEFoundError",
    "ParseError",
    "PowerSum",
    "RE",
    "SimpleDE",
    "UnknownFunctionError",
    "convert_de_to_re",
    "declare_function",
    "eval_coefficient",
    "find_lowest_de",
    "find_simple_de",
    "formal_power_series",
    "parse_expression",
    "parse_point",
    "partial_sum",
    "register_function",
    "render",
    "stream_coefficients",
    "truncated_series",
]
