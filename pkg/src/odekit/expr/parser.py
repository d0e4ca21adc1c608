"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := exp | ln | sin | cos | sqrt

``ln(abs(u))`` is read as ln|u| so that printed integration results parse back.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, NamedTuple

from odekit.errors import ParseError
from odekit.expr.nodes import (
    AbsLn, Const, Cos, Exp, Expr, Ln, Pow, Prod, Sin, Sum, Var, simplify,
)

DEFAULT_VARIABLES = frozenset({"x", "y", "s"})
_FUNCS = {"exp": Exp, "ln": Ln, "sin": Sin, "cos": Cos}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: frozenset):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, _byte_offset(self.text, tok.offset), self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            found = self.tok.text or "end of input"
            self.error(f"expected {op!r}, found {found!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            if self.accept("+"):
                terms.append(self.term())
            elif self.accept("-"):
                terms.append(Prod((Const(-1.0), self.term())))
            else:
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while True:
            if self.accept("*"):
                factors.append(self.unary())
            elif self.accept("/"):
                factors.append(Pow(self.unary(), Fraction(-1)))
            else:
                break
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def unary(self) -> Expr:
        if self.accept("-"):
            return Prod((Const(-1.0), self.unary()))
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        caret = self.tok
        if self.accept("^"):
            exponent = simplify(self.unary())
            return _make_power(base, exponent, lambda msg: self.error(msg, caret))
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in _FUNCS or name == "sqrt":
                self.expect("(")
                if name == "ln" and self._at_abs():
                    self.i += 2
                    inner = self.expr()
                    self.expect(")")
                    self.expect(")")
                    return AbsLn(inner)
                arg = self.expr()
                self.expect(")")
                if name == "sqrt":
                    return Pow(arg, Fraction(1, 2))
                return _FUNCS[name](arg)
            if name in self.variables:
                return Var(name)
            self.error(f"unknown identifier {name!r}", tok)
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)

    def _at_abs(self) -> bool:
        t0, t1 = self.tokens[self.i], self.tokens[self.i + 1]
        return t0.kind == "ident" and t0.text == "abs" and t1.text == "("


def _make_power(base: Expr, exponent: Expr, fail) -> Expr:
    if isinstance(exponent, Const):
        return Pow(base, to_fraction(exponent.value))
    b = simplify(base)
    if isinstance(b, Const) and b.value > 0:
        # c^u with symbolic u is exp(u ln c)
        return Exp(Prod((Const(math.log(b.value)), exponent)))
    fail("exponent must be a constant unless the base is a positive number")


def to_fraction(value: float) -> Fraction:
    """Exact rational for ``value``, preferring small denominators (0.333.. -> 1/3)."""
    exact = Fraction(value)
    small = exact.limit_denominator(10**6)
    # folding a/b as a*(1/b) can land an ulp or two off the nearest float
    if abs(float(small) - value) <= 4 * math.ulp(value):
        return small
    return exact


def parse(text: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into a simplified expression.

    ``variables`` defaults to {x, y, s}; pass extra names (e.g. ``C``) to admit
    symbolic constants.
    """
    names = DEFAULT_VARIABLES if variables is None else frozenset(variables) | DEFAULT_VARIABLES
    return simplify(_Parser(text, names).parse())


def parse_raw(text: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse without simplifying; the tree mirrors the grammar derivation."""
    names = DEFAULT_VARIABLES if variables is None else frozenset(variables) | DEFAULT_VARIABLES
    return _Parser(text, names).parse()
