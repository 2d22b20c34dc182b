"""Symbolic expression engine: parsing, differentiation, canonical form, probing."""
from .core import (
    ONE,
    ZERO,
    Apply,
    DomainError,
    Expr,
    Var,
    as_expr,
    as_var,
    coords,
    cos,
    diff,
    exp,
    ln,
    power,
    sin,
    sqrt,
    substitute,
    t,
    x,
    y,
)
from .numeric import (
    PROVEN_ZERO,
    EvalDomainError,
    EvalZeroDivisionError,
    EvaluationError,
    NonZero,
    Point,
    ProbablyZero,
    ProbeExhaustionError,
    ProbeSettings,
    ProvenZero,
    ZeroVerdict,
    evaluate,
    evaluate_batch,
    get_settings,
    is_zero,
    lambdify,
    set_settings,
    weakest,
)
from .parsing import ParseError, parse

__all__ = [name for name in dir() if not name.startswith("_")]
