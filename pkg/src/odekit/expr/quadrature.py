"""Quadrature backing the ``Integral`` expression node.

Composite Gauss-Legendre on equal panels is the primary rule: for a fixed
panel count the result is a smooth function of the limits, so the node can
be differentiated by finite differences.  Adaptive Simpson is the fallback.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from odekit.errors import DomainError

TOLERANCE = 1e-10
MAX_DEPTH = 50
MAX_EVALS = 20000
GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(20)
PANEL_COUNTS = (4, 8, 16, 32, 64, 128)
AGREEMENT = 1e-13


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = TOLERANCE, max_depth: int = MAX_DEPTH,
                     max_evals: int = MAX_EVALS) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    More than ``max_evals`` integrand evaluations (a singular interval, in
    practice) is reported as a DomainError.
    """
    if a == b:
        return 0.0
    budget = [max_evals]

    def g(t):
        budget[0] -= 1
        if budget[0] < 0:
            raise DomainError(f"quadrature did not converge on [{a!r}, {b!r}]")
        return f(t)

    fa, fb = g(a), g(b)
    m = 0.5 * (a + b)
    fm = g(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(g, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0:
        if abs(delta) > 1e3 * tol:
            raise DomainError(f"quadrature did not converge on [{a!r}, {b!r}]")
        return left + right + delta / 15.0
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def gauss_legendre(f: Callable[[float], float], a: float, b: float, panels: int) -> float:
    """Composite 20-point Gauss-Legendre rule with ``panels`` equal panels."""
    width = (b - a) / panels
    total = 0.0
    for k in range(panels):
        mid = a + (k + 0.5) * width
        total += sum(w * f(mid + 0.5 * width * t) for t, w in zip(GAUSS_NODES, GAUSS_WEIGHTS))
    return 0.5 * width * total


def gauss_legendre_vector(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    """Same rule as ``gauss_legendre`` with ``f`` applied to all nodes at once."""
    width = (b - a) / panels
    mids = a + (np.arange(panels) + 0.5) * width
    t = (mids[:, None] + 0.5 * width * GAUSS_NODES[None, :]).ravel()
    values = f(t).reshape(panels, -1)
    return float(0.5 * width * math.fsum(values @ GAUSS_WEIGHTS))


def smooth_quadrature(f: Callable[[float], float], a: float, b: float, vector_f=None,
                      start: int = PANEL_COUNTS[0]) -> tuple:
    """Gauss-Legendre with panel doubling from ``start`` until two counts agree.

    Returns (value, panels); panels is 0 when the counts never agree and
    adaptive Simpson produced the value.  ``vector_f``, when given,
    evaluates the integrand on an array of nodes.
    """
    if a == b:
        return 0.0, start
    rule = gauss_legendre if vector_f is None else gauss_legendre_vector
    g = f if vector_f is None else vector_f
    counts = [n for n in PANEL_COUNTS if n >= start] or [start]
    prev = rule(g, a, b, max(1, counts[0] // 2))
    for n in counts:
        cur = rule(g, a, b, n)
        if abs(cur - prev) <= AGREEMENT * max(1.0, abs(cur)):
            return cur, n
        prev = cur
    return adaptive_simpson(f, a, b), 0


# panel count per (integrand, var, lower): reusing one count keeps the
# integral a smooth function of its upper limit across nearby evaluations
_PANELS: dict = {}


@lru_cache(maxsize=65536)
def integrate_expression(integrand, var: str, lower: float, upper: float) -> float:
    """Cached definite integral of a one-variable expression."""
    from odekit.expr.nodes import evaluate

    def f(t):
        return evaluate(integrand, {var: t})

    try:
        vector_f = _vectorize(integrand, var)
    except TypeError:
        vector_f = None
    key = (integrand, var, lower)
    value, panels = smooth_quadrature(f, lower, upper, vector_f, _PANELS.get(key, PANEL_COUNTS[0]))
    if panels:
        _PANELS[key] = max(panels, _PANELS.get(key, 0))
    if not math.isfinite(value):
        raise DomainError("non-finite quadrature result")
    return value


def _vectorize(e, var: str) -> Callable[[np.ndarray], np.ndarray]:
    """Array evaluator for ``e``; TypeError for nodes it does not cover."""
    from odekit.expr.nodes import AbsLn, Const, Cos, Exp, Ln, Pow, Prod, Sin, Sum, Var

    if isinstance(e, Const):
        return lambda t: np.full_like(t, e.value)
    if isinstance(e, Var):
        if e.name != var:
            raise TypeError(e.name)
        return lambda t: t
    if isinstance(e, (Sum, Prod)):
        parts = [_vectorize(c, var) for c in (e.terms if isinstance(e, Sum) else e.factors)]
        combine = np.add if isinstance(e, Sum) else np.multiply

        def h(t):
            out = parts[0](t)
            for g in parts[1:]:
                out = combine(out, g(t))
            return out

        return h
    if isinstance(e, Pow):
        return _vector_pow(_vectorize(e.base, var), e.exponent)
    unary = {Exp: np.exp, Sin: np.sin, Cos: np.cos}
    if type(e) in unary:
        g, op = _vectorize(e.arg, var), unary[type(e)]
        return lambda t: op(g(t))
    if isinstance(e, (Ln, AbsLn)):
        g, absolute = _vectorize(e.arg, var), isinstance(e, AbsLn)

        def log(t):
            u = g(t)
            u = np.abs(u) if absolute else u
            if np.any(u <= 0.0):
                raise DomainError("ln of non-positive value")
            return np.log(u)

        return log
    raise TypeError(type(e).__name__)


def _vector_pow(g, n):
    def h(t):
        base = g(t)
        if n < 0 and np.any(base == 0.0):
            raise DomainError("zero raised to a negative power")
        if n.denominator == 1:
            return base ** float(n.numerator)
        if np.any(base < 0.0):
            if n.denominator % 2 == 0:
                raise DomainError(f"negative base raised to {n}")
            mag = np.abs(base) ** float(n)
            return np.where(base < 0.0, -mag if n.numerator % 2 else mag, mag)
        return base ** float(n)

    return h
