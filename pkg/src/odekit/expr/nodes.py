"""Immutable expression trees, conservative simplification and printing.

Every node is a frozen dataclass, so structural equality and hashing come for
free.  Arithmetic operators on nodes build the raw tree and simplify it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Mapping, Union

from odekit.errors import DomainError, UnboundVariableError

Number = Union[int, float, Fraction]


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return simplify(Sum((self, as_expr(other))))

    def __radd__(self, other):
        return simplify(Sum((as_expr(other), self)))

    def __sub__(self, other):
        return simplify(Sum((self, Prod((Const(-1.0), as_expr(other))))))

    def __rsub__(self, other):
        return simplify(Sum((as_expr(other), Prod((Const(-1.0), self)))))

    def __mul__(self, other):
        return simplify(Prod((self, as_expr(other))))

    def __rmul__(self, other):
        return simplify(Prod((as_expr(other), self)))

    def __truediv__(self, other):
        return simplify(Prod((self, Pow(as_expr(other), Fraction(-1)))))

    def __rtruediv__(self, other):
        return simplify(Prod((as_expr(other), Pow(self, Fraction(-1)))))

    def __neg__(self):
        return simplify(Prod((Const(-1.0), self)))

    def __pow__(self, n):
        return simplify(Pow(self, Fraction(n)))

    def __str__(self):
        return to_text(self)

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    @property
    def variables(self) -> frozenset:
        return free_variables(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def __post_init__(self):
        if not isinstance(self.exponent, Fraction):
            object.__setattr__(self, "exponent", Fraction(self.exponent))


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Ln(Expr):
    arg: Expr


@dataclass(frozen=True)
class AbsLn(Expr):
    """ln|arg|, the form integration of 1/u produces."""

    arg: Expr


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr


@dataclass(frozen=True)
class Integral(Expr):
    """Definite integral of ``integrand`` from ``lower`` to the variable ``var``.

    Used when no closed form exists in the integration table.  The node is
    evaluated by adaptive quadrature; its derivative with respect to ``var``
    is the integrand itself.
    """

    integrand: Expr
    var: str
    lower: float


FUNCTIONS = (Exp, Ln, AbsLn, Sin, Cos)
_FUNC_NAMES = {Exp: "exp", Ln: "ln", Sin: "sin", Cos: "cos"}

X = Var("x")
Y = Var("y")
S = Var("s")
ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Var(value)
    if isinstance(value, Real):
        return Const(float(value))
    raise TypeError(f"cannot convert {value!r} to an expression")


def free_variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, (Sum, Prod)):
        out = frozenset()
        for c in children(e):
            out |= free_variables(c)
        return out
    if isinstance(e, Integral):
        return free_variables(e.integrand) | {e.var}
    return free_variables(children(e)[0])


def children(e: Expr) -> tuple:
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Prod):
        return e.factors
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, FUNCTIONS):
        return (e.arg,)
    if isinstance(e, Integral):
        return (e.integrand,)
    return ()


def depends_on(e: Expr, name: str) -> bool:
    return name in free_variables(e)


# -- evaluation ---------------------------------------------------------------

def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` in IEEE double precision.

    Raises DomainError for points outside the domain and UnboundVariableError
    for free variables missing from ``bindings``.
    """
    value = _eval(e, bindings)
    if not math.isfinite(value):
        raise DomainError(f"non-finite value {value!r} evaluating {to_text(e)}")
    return value


def _eval(e: Expr, b: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(b[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Sum):
        return math.fsum(_eval(t, b) for t in e.terms)
    if isinstance(e, Prod):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, b)
        return out
    if isinstance(e, Pow):
        return _pow(_eval(e.base, b), e.exponent)
    if isinstance(e, Exp):
        try:
            return math.exp(_eval(e.arg, b))
        except OverflowError:
            raise DomainError(f"overflow in {to_text(e)}") from None
    if isinstance(e, Ln):
        u = _eval(e.arg, b)
        if u <= 0.0:
            raise DomainError(f"ln of non-positive value {u!r}")
        return math.log(u)
    if isinstance(e, AbsLn):
        u = _eval(e.arg, b)
        if u == 0.0:
            raise DomainError("ln|0|")
        return math.log(abs(u))
    if isinstance(e, Sin):
        return math.sin(_eval(e.arg, b))
    if isinstance(e, Cos):
        return math.cos(_eval(e.arg, b))
    if isinstance(e, Integral):
        from odekit.expr.quadrature import adaptive_simpson, integrate_expression

        upper = _eval(Var(e.var), b)
        if free_variables(e.integrand) <= {e.var}:
            return integrate_expression(e.integrand, e.var, e.lower, upper)
        inner = dict(b)

        def integrand(t):
            inner[e.var] = t
            return evaluate(e.integrand, inner)

        return adaptive_simpson(integrand, e.lower, upper)
    raise TypeError(f"unknown node {e!r}")


def _pow(base: float, n: Fraction) -> float:
    if base == 0.0 and n < 0:
        raise DomainError("zero raised to a negative power")
    if n.denominator == 1:
        try:
            return base ** int(n)
        except OverflowError:
            raise DomainError("overflow in power") from None
    if base < 0.0:
        if n.denominator % 2 == 1:
            return -((-base) ** float(n)) if n.numerator % 2 else (-base) ** float(n)
        raise DomainError(f"negative base {base!r} raised to {n}")
    return base ** float(n)


def compile_function(e: Expr, *names: str) -> Callable[..., float]:
    """Return a positional-argument evaluator ``f(*values)`` for ``e``."""

    def f(*values):
        return evaluate(e, dict(zip(names, values)))

    return f


# -- canonical ordering ---------------------------------------------------------

def sort_key(e: Expr) -> tuple:
    if isinstance(e, Const):
        return (0, e.value)
    if isinstance(e, Var):
        return (1, e.name)
    if isinstance(e, Pow):
        return (2, sort_key(e.base), float(e.exponent))
    if isinstance(e, Prod):
        fs = e.factors
        coef = fs[0].value if isinstance(fs[0], Const) else 1.0
        rest = fs[1:] if isinstance(fs[0], Const) else fs
        return (3, tuple(sort_key(f) for f in rest), coef)
    if isinstance(e, Sum):
        return (4, tuple(sort_key(t) for t in e.terms))
    if isinstance(e, FUNCTIONS):
        return (5, type(e).__name__, sort_key(e.arg))
    if isinstance(e, Integral):
        return (6, sort_key(e.integrand), e.var, e.lower)
    raise TypeError(e)


# -- simplification ---------------------------------------------------------------

def simplify(e: Expr) -> Expr:
    """Flatten, fold constants, collect like terms and powers; never factor.

    The result is canonical enough that ``simplify`` is idempotent.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Sum):
        return _simplify_sum([simplify(t) for t in e.terms])
    if isinstance(e, Prod):
        return _simplify_prod([simplify(f) for f in e.factors])
    if isinstance(e, Pow):
        return _simplify_pow(simplify(e.base), e.exponent)
    if isinstance(e, Integral):
        return Integral(simplify(e.integrand), e.var, float(e.lower))
    return _simplify_func(type(e), simplify(e.arg))


def _simplify_func(kind, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        u = arg.value
        if kind is Exp:
            try:
                return Const(math.exp(u))
            except OverflowError:
                return Exp(arg)
        if kind is Ln and u > 0:
            return Const(math.log(u))
        if kind is AbsLn and u != 0:
            return Const(math.log(abs(u)))
        if kind is Sin:
            return Const(math.sin(u))
        if kind is Cos:
            return Const(math.cos(u))
        return kind(arg)
    if kind is Exp and isinstance(arg, Ln):
        return arg.arg
    if kind is Ln and isinstance(arg, Exp):
        return arg.arg
    return kind(arg)


def _simplify_pow(base: Expr, n: Fraction) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        b = base.value
        if (b > 0) or (b == 0 and n > 0) or (b < 0 and n.denominator == 1):
            try:
                return Const(b ** (int(n) if n.denominator == 1 else float(n)))
            except (OverflowError, ZeroDivisionError):
                pass
        return Pow(base, n)
    if isinstance(base, Exp):
        return _simplify_func(Exp, _simplify_prod([Const(float(n)), base.arg]))
    if n.denominator == 1:
        if isinstance(base, Pow):
            return _simplify_pow(base.base, base.exponent * n)
        if isinstance(base, Prod):
            return _simplify_prod([_simplify_pow(f, n) for f in base.factors])
    return Pow(base, n)


def _split_coefficient(term: Expr) -> tuple:
    """Split a simplified term into (numeric coefficient, remainder or None)."""
    if isinstance(term, Const):
        return term.value, None
    if isinstance(term, Prod) and isinstance(term.factors[0], Const):
        rest = term.factors[1:]
        return term.factors[0].value, rest[0] if len(rest) == 1 else Prod(rest)
    return 1.0, term


def _with_coefficient(c: float, rest: Expr) -> Expr:
    if c == 1.0:
        return rest
    if isinstance(rest, Prod):
        return Prod((Const(c),) + rest.factors)
    return Prod((Const(c), rest))


def _simplify_sum(terms: list) -> Expr:
    flat = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    constant = []
    buckets: dict = {}
    order = []
    for t in flat:
        c, rest = _split_coefficient(t)
        if rest is None:
            constant.append(c)
            continue
        if rest not in buckets:
            buckets[rest] = []
            order.append(rest)
        buckets[rest].append(c)
    out = []
    for rest in order:
        c = math.fsum(buckets[rest])
        if c != 0.0:
            out.append(_with_coefficient(c, rest))
    out.sort(key=sort_key)
    c0 = math.fsum(constant)
    if c0 != 0.0:
        out.append(Const(c0))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def _simplify_prod(factors: list) -> Expr:
    flat = []
    for f in factors:
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    coef = 1.0
    exp_args = []
    powers: dict = {}
    order = []
    for f in flat:
        if isinstance(f, Const):
            coef *= f.value
            continue
        if isinstance(f, Exp):
            exp_args.append(f.arg)
            continue
        if isinstance(f, Pow):
            base, n = f.base, f.exponent
        else:
            base, n = f, Fraction(1)
        if base not in powers:
            powers[base] = Fraction(0)
            order.append(base)
        powers[base] += n
    if coef == 0.0:
        return ZERO
    out = []
    for base in order:
        p = _simplify_pow(base, powers[base])
        if isinstance(p, Const):
            coef *= p.value
        elif isinstance(p, Prod):
            # distributing an integer power can expose constants
            for g in p.factors:
                if isinstance(g, Const):
                    coef *= g.value
                else:
                    out.append(g)
        else:
            out.append(p)
    if exp_args:
        merged = _simplify_func(Exp, _simplify_sum(exp_args))
        if isinstance(merged, Const):
            coef *= merged.value
        else:
            out.append(merged)
    if coef == 0.0:
        return ZERO
    out.sort(key=sort_key)
    if not out:
        return Const(coef)
    if coef != 1.0:
        out.insert(0, Const(coef))
    if len(out) == 1:
        return out[0]
    return Prod(tuple(out))


def substitute(e: Expr, name: str, value) -> Expr:
    """Replace every occurrence of variable ``name`` by ``value`` and simplify."""
    return simplify(_subst(e, name, as_expr(value)))


def _subst(e: Expr, name: str, value: Expr) -> Expr:
    if isinstance(e, Var):
        return value if e.name == name else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Sum):
        return Sum(tuple(_subst(t, name, value) for t in e.terms))
    if isinstance(e, Prod):
        return Prod(tuple(_subst(f, name, value) for f in e.factors))
    if isinstance(e, Pow):
        return Pow(_subst(e.base, name, value), e.exponent)
    if isinstance(e, Integral):
        if e.var == name:
            if isinstance(value, Var):
                return Integral(e.integrand if value.name == name else _subst(e.integrand, name, value), value.name, e.lower)
            raise ValueError("cannot substitute a non-variable for an integration variable")
        return Integral(_subst(e.integrand, name, value), e.var, e.lower)
    return type(e)(_subst(e.arg, name, value))


# -- printing ------------------------------------------------------------------

def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _is_negative_term(t: Expr) -> bool:
    if isinstance(t, Const):
        return t.value < 0
    return isinstance(t, Prod) and isinstance(t.factors[0], Const) and t.factors[0].value < 0


def _negate_term(t: Expr) -> Expr:
    if isinstance(t, Const):
        return Const(-t.value)
    c, rest = t.factors[0].value, t.factors[1:]
    rest_expr = rest[0] if len(rest) == 1 else Prod(rest)
    return _with_coefficient(-c, rest_expr)


def to_text(e: Expr) -> str:
    """Render ``e`` in the input grammar, so that ``parse(to_text(e))`` rebuilds it."""
    if isinstance(e, Const):
        return _num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        parts = [to_text(e.terms[0])]
        for t in e.terms[1:]:
            if _is_negative_term(t):
                parts.append(" - " + _factor_text(_negate_term(t), in_sum=True))
            else:
                parts.append(" + " + _factor_text(t, in_sum=True))
        return "".join(parts)
    if isinstance(e, Prod):
        fs = list(e.factors)
        prefix = ""
        if isinstance(fs[0], Const) and fs[0].value == -1.0:
            prefix = "-"
            fs = fs[1:]
        parts = [_factor_text(f) for f in fs]
        if isinstance(fs[0], Const):
            parts[0] = _num(fs[0].value)
        return prefix + "*".join(parts)
    if isinstance(e, Pow):
        n = e.exponent
        if n.denominator == 1:
            ntext = str(n.numerator)
        else:
            ntext = f"({n.numerator}/{n.denominator})"
        return f"{_base_text(e.base)}^{ntext}"
    if isinstance(e, AbsLn):
        return f"ln(abs({to_text(e.arg)}))"
    if isinstance(e, Integral):
        return f"integral({to_text(e.integrand)}, {e.var}, {_num(e.lower)})"
    return f"{_FUNC_NAMES[type(e)]}({to_text(e.arg)})"


def _factor_text(f: Expr, in_sum: bool = False) -> str:
    if isinstance(f, Sum):
        return f"({to_text(f)})"
    if not in_sum and isinstance(f, Const) and f.value < 0:
        return f"({to_text(f)})"
    return to_text(f)


def _base_text(b: Expr) -> str:
    if isinstance(b, (Var,) + FUNCTIONS):
        return to_text(b)
    if isinstance(b, Const) and b.value >= 0 and "e" not in repr(b.value):
        return to_text(b)
    return f"({to_text(b)})"
