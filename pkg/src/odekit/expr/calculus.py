"""Symbolic differentiation, expansion and the closed-form integration table."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from odekit.errors import UnsupportedIntegral
from odekit.expr.nodes import (
    ONE, ZERO, AbsLn, Const, Cos, Exp, Expr, Integral, Ln, Pow, Prod, Sin, Sum,
    Var, depends_on, simplify, substitute, to_text,
)

MAX_EXPAND_POWER = 16


def differentiate(e: Expr, v: str = "x") -> Expr:
    """Partial derivative of ``e`` with respect to variable ``v``, simplified."""
    return simplify(_d(e, v))


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Sum):
        return Sum(tuple(_d(t, v) for t in e.terms))
    if isinstance(e, Prod):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _d(f, v)
            if df == ZERO:
                continue
            parts.append(Prod(fs[:i] + (df,) + fs[i + 1:]))
        return Sum(tuple(parts)) if parts else ZERO
    if isinstance(e, Pow):
        n = e.exponent
        return Prod((Const(float(n)), Pow(e.base, n - 1), _d(e.base, v)))
    if isinstance(e, Exp):
        return Prod((e, _d(e.arg, v)))
    if isinstance(e, (Ln, AbsLn)):
        return Prod((_d(e.arg, v), Pow(e.arg, Fraction(-1))))
    if isinstance(e, Sin):
        return Prod((Cos(e.arg), _d(e.arg, v)))
    if isinstance(e, Cos):
        return Prod((Const(-1.0), Sin(e.arg), _d(e.arg, v)))
    if isinstance(e, Integral):
        if e.var == v:
            return e.integrand
        if depends_on(e.integrand, v):
            raise NotImplementedError("differentiation under the integral sign")
        return ZERO
    raise TypeError(f"unknown node {e!r}")


def expand(e: Expr) -> Expr:
    """Distribute products over sums and expand small positive integer powers of sums."""
    return simplify(_expand(simplify(e)))


def _terms(e: Expr) -> tuple:
    return e.terms if isinstance(e, Sum) else (e,)


def _expand(e: Expr) -> Expr:
    if isinstance(e, Sum):
        return simplify(Sum(tuple(_expand(t) for t in e.terms)))
    if isinstance(e, Prod):
        groups = [_terms(_expand(f)) for f in e.factors]
        return simplify(Sum(tuple(Prod(combo) for combo in itertools.product(*groups))))
    if isinstance(e, Pow):
        base = _expand(e.base)
        n = e.exponent
        if isinstance(base, Sum) and n.denominator == 1 and 1 < n <= MAX_EXPAND_POWER:
            out = base
            for _ in range(int(n) - 1):
                out = _expand(Prod((out, base)))
            return out
        return simplify(Pow(base, n))
    return e


# -- integration ---------------------------------------------------------------

def integrate(e: Expr, v: str = "x") -> Expr:
    """Antiderivative of ``e`` with respect to ``v`` from the built-in table.

    Supported: polynomials and c*v^n (n rational, v^-1 -> ln|v|), powers of a
    linear argument, and sums of products v^n * exp(a v + b) * trig(k v + c)...
    with any number of sin/cos factors of linear arguments.  Anything else
    raises UnsupportedIntegral.
    """
    e = expand(e)
    pieces = [_integrate_term(t, v) for t in _terms(e)]
    return simplify(Sum(tuple(pieces)))


def _linear(arg: Expr, v: str):
    """Slope of ``arg`` in ``v`` if it is linear, else None."""
    slope = differentiate(arg, v)
    if isinstance(slope, Const):
        return slope.value
    return None


def _integrate_term(t: Expr, v: str) -> Expr:
    if not depends_on(t, v):
        return simplify(Prod((t, Var(v))))
    factors = t.factors if isinstance(t, Prod) else (t,)
    coef = [f for f in factors if not depends_on(f, v)]
    vf = [f for f in factors if depends_on(f, v)]
    coef_expr = simplify(Prod(tuple(coef))) if coef else ONE

    if len(vf) == 1 and isinstance(vf[0], Pow) and not isinstance(vf[0].base, (Var, Sin, Cos)):
        base, n = vf[0].base, vf[0].exponent
        a = _linear(base, v)
        if a is None:
            raise UnsupportedIntegral(f"cannot integrate {to_text(t)} d{v}")
        if n == -1:
            return simplify(Prod((coef_expr, Const(1.0 / a), AbsLn(base))))
        return simplify(Prod((coef_expr, Const(1.0 / (a * float(n + 1))), Pow(base, n + 1))))

    power = Fraction(0)
    exp_arg = None
    exp_rate = 0.0
    trig = []
    for f in vf:
        if isinstance(f, Var):
            power += 1
        elif isinstance(f, Pow) and isinstance(f.base, Var):
            power += f.exponent
        elif isinstance(f, Exp):
            a = _linear(f.arg, v)
            if a is None or exp_arg is not None:
                raise UnsupportedIntegral(f"cannot integrate {to_text(t)} d{v}")
            exp_arg, exp_rate = f.arg, a
        elif isinstance(f, (Sin, Cos)):
            trig.append(_trig_factor(f, v, t))
        elif (isinstance(f, Pow) and isinstance(f.base, (Sin, Cos))
              and f.exponent.denominator == 1 and f.exponent > 0):
            trig.extend([_trig_factor(f.base, v, t)] * int(f.exponent))
        else:
            raise UnsupportedIntegral(f"cannot integrate {to_text(t)} d{v}")

    if exp_arg is None and not trig:
        if power == -1:
            return simplify(Prod((coef_expr, AbsLn(Var(v)))))
        return simplify(Prod((coef_expr, Const(1.0 / float(power + 1)), Pow(Var(v), power + 1))))
    if power.denominator != 1 or power < 0:
        raise UnsupportedIntegral(f"cannot integrate {to_text(t)} d{v}")

    out = []
    for c, kind, rate, arg in _reduce_trig(trig):
        out.append(Prod((coef_expr, c, _exp_poly_trig(int(power), exp_arg, exp_rate, kind, rate, arg, v))))
    return simplify(Sum(tuple(out)))


def _trig_factor(f: Expr, v: str, t: Expr):
    k = _linear(f.arg, v)
    if k is None:
        raise UnsupportedIntegral(f"cannot integrate {to_text(t)} d{v}")
    return ("sin" if isinstance(f, Sin) else "cos", k, f.arg)


def _reduce_trig(trig: list) -> list:
    """Product-to-sum: turn a product of sin/cos factors into (coef, kind, rate, arg) terms."""
    acc = [(ONE, None, 0.0, None)]
    for kind2, k2, b in trig:
        nxt = []
        for c, kind1, k1, a in acc:
            if kind1 is None:
                nxt.append((c, kind2, k2, b))
                continue
            diff = simplify(Sum((a, Prod((Const(-1.0), b)))))
            tot = simplify(Sum((a, b)))
            half = simplify(Prod((Const(0.5), c)))
            neg_half = simplify(Prod((Const(-0.5), c)))
            if kind1 == "cos" and kind2 == "cos":
                nxt += [(half, "cos", k1 - k2, diff), (half, "cos", k1 + k2, tot)]
            elif kind1 == "sin" and kind2 == "sin":
                nxt += [(half, "cos", k1 - k2, diff), (neg_half, "cos", k1 + k2, tot)]
            elif kind1 == "sin":
                nxt += [(half, "sin", k1 + k2, tot), (half, "sin", k1 - k2, diff)]
            else:
                nxt += [(half, "sin", k1 + k2, tot), (neg_half, "sin", k1 - k2, diff)]
        acc = []
        for c, kind, k, arg in nxt:
            if kind is not None and k == 0.0:
                # argument no longer depends on the variable: a constant factor
                c = simplify(Prod((c, Sin(arg) if kind == "sin" else Cos(arg))))
                kind, arg = None, None
            acc.append((c, kind, k, arg))
    return acc


def _exp_poly_trig(n: int, exp_arg, a: float, kind, k: float, arg, v: str) -> Expr:
    """Antiderivative of v^n e^(exp_arg) trig(arg) with exp slope a and trig slope k."""
    lam = complex(a, k if kind is not None else 0.0)
    x = Var(v)
    if lam == 0:
        return simplify(Prod((Const(1.0 / (n + 1)), Pow(x, Fraction(n + 1)))))
    re_terms, im_terms = [], []
    for j in range(n + 1):
        cj = (-1) ** j * math.factorial(n) / math.factorial(n - j) / lam ** (j + 1)
        mono = Pow(x, Fraction(n - j))
        if cj.real != 0.0:
            re_terms.append(Prod((Const(cj.real), mono)))
        if cj.imag != 0.0:
            im_terms.append(Prod((Const(cj.imag), mono)))
    s_re = Sum(tuple(re_terms)) if re_terms else ZERO
    s_im = Sum(tuple(im_terms)) if im_terms else ZERO
    env = Exp(exp_arg) if exp_arg is not None else ONE
    if kind is None:
        body = s_re
    elif kind == "cos":
        body = Sum((Prod((Cos(arg), s_re)), Prod((Const(-1.0), Sin(arg), s_im))))
    else:
        body = Sum((Prod((Sin(arg), s_re)), Prod((Cos(arg), s_im))))
    return simplify(Prod((env, body)))


def strip_abs(e: Expr) -> Expr:
    """Drop absolute values inside exponentials: exp(c*ln|u|) -> u^c.

    Valid up to a constant sign on any interval where u keeps its sign, which is
    all an integrating factor or Abel normalisation needs.
    """
    e = simplify(e)
    if isinstance(e, Exp):
        arg = e.arg
        terms = _terms(arg)
        keep, powers = [], []
        for t in terms:
            c, inner = _abs_ln_term(t)
            if inner is None:
                keep.append(t)
            else:
                powers.append(Pow(inner, _fraction(c)))
        if not powers:
            return e
        rest = Exp(Sum(tuple(keep))) if keep else ONE
        return simplify(Prod(tuple(powers) + (rest,)))
    if isinstance(e, (Sum, Prod)):
        kids = tuple(strip_abs(c) for c in (e.terms if isinstance(e, Sum) else e.factors))
        return simplify(type(e)(kids))
    if isinstance(e, Pow):
        return simplify(Pow(strip_abs(e.base), e.exponent))
    return e


def _abs_ln_term(t: Expr):
    if isinstance(t, AbsLn):
        return 1.0, t.arg
    if isinstance(t, Prod) and len(t.factors) == 2 and isinstance(t.factors[0], Const) \
            and isinstance(t.factors[1], AbsLn):
        return t.factors[0].value, t.factors[1].arg
    return None, None


def _fraction(c: float) -> Fraction:
    from odekit.expr.parser import to_fraction

    return to_fraction(c)


__all__ = ["differentiate", "expand", "integrate", "strip_abs", "substitute"]
