"""Symbolic expression core."""
from odekit.expr.calculus import differentiate, expand, integrate, strip_abs
from odekit.expr.nodes import (
    ONE, S, X, Y, ZERO, AbsLn, Const, Cos, Exp, Expr, Integral, Ln, Pow, Prod, Sin,
    Sum, Var, as_expr, compile_function, depends_on, evaluate, free_variables,
    simplify, substitute, to_text,
)
from odekit.expr.parser import parse, parse_raw
from odekit.expr.poly import (
    PartialFractionTerm, Polynomial, RationalFunction, partial_fractions,
    partial_fractions_from_poles, poly_from_roots, poly_roots, to_polynomial,
)

__all__ = [
    "AbsLn", "Const", "Cos", "Exp", "Expr", "Integral", "Ln", "ONE", "PartialFractionTerm",
    "Polynomial", "Pow", "Prod", "RationalFunction", "S", "Sin", "Sum", "Var", "X", "Y",
    "ZERO", "as_expr", "compile_function", "depends_on", "differentiate", "evaluate",
    "expand", "free_variables", "integrate", "parse", "parse_raw", "partial_fractions",
    "partial_fractions_from_poles", "poly_from_roots", "poly_roots", "simplify",
    "strip_abs", "substitute", "to_polynomial", "to_text",
]
