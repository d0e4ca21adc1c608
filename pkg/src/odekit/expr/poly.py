"""Dense polynomials, rational functions, root finding and partial fractions."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from odekit.errors import ImproperFractionError, RootFindingError
from odekit.expr.nodes import Const, Expr, Pow, Prod, Sum, Var, depends_on, to_text

MAX_ITERATIONS = 500
CONVERGENCE = 1e-13
CLUSTER_TOL = 1e-8
GROUP_RADIUS = 1e-2


def _trim(coeffs) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class Polynomial:
    """Polynomial with coefficients in ascending degree order.

    Coefficients may be complex; the zero polynomial has no coefficients.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _trim(coeffs)

    @classmethod
    def from_roots(cls, roots: Iterable, leading=1.0) -> "Polynomial":
        out = cls([leading])
        for r in roots:
            out = out * cls([-r, 1.0])
        return out

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0.0

    def is_real(self) -> bool:
        return all(not isinstance(c, complex) or c.imag == 0 for c in self.coeffs)

    def real(self) -> "Polynomial":
        return Polynomial([c.real if isinstance(c, complex) else c for c in self.coeffs])

    def __call__(self, z):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0.0,) * (n - len(self.coeffs))
        b = other.coeffs + (0.0,) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Polynomial()
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = other.degree
        if len(rem) - 1 < dd:
            return Polynomial(), Polynomial(rem)
        quot = [0.0] * (len(rem) - dd)
        lead = other.leading
        for k in range(len(rem) - dd - 1, -1, -1):
            q = rem[k + dd] / lead
            quot[k] = q
            for j, b in enumerate(other.coeffs):
                rem[k + j] -= q * b
        return Polynomial(quot), Polynomial(rem[:dd])

    def derivative(self, order: int = 1) -> "Polynomial":
        c = list(self.coeffs)
        for _ in range(order):
            c = [k * c[k] for k in range(1, len(c))]
        return Polynomial(c)

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ZeroDivisionError("zero polynomial has no leading coefficient")
        lead = self.leading
        return Polynomial(c / lead for c in self.coeffs)

    def taylor(self, at) -> list:
        """Coefficients of p(at + t) in ascending powers of t."""
        c = list(self.coeffs)
        n = len(c)
        # repeated synthetic division
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                c[j] += at * c[j + 1]
        return c

    def to_expr(self, var: str = "s") -> Expr:
        from odekit.expr.nodes import simplify

        v = Var(var)
        terms = [Prod((Const(float(c)), Pow(v, Fraction(k)))) for k, c in enumerate(self.coeffs)]
        return simplify(Sum(tuple(terms)))


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    return Polynomial([p])


@dataclass(frozen=True)
class RationalFunction:
    """numerator / denominator with a monic denominator."""

    numerator: Polynomial
    denominator: Polynomial

    def __post_init__(self):
        if self.denominator.is_zero:
            raise ZeroDivisionError("denominator is identically zero")
        lead = self.denominator.leading
        if lead != 1:
            object.__setattr__(self, "numerator", Polynomial(c / lead for c in self.numerator.coeffs))
            object.__setattr__(self, "denominator", self.denominator.monic())

    @property
    def is_proper(self) -> bool:
        return self.numerator.degree < self.denominator.degree

    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)


@dataclass(frozen=True)
class PartialFractionTerm:
    """residue / (s - pole)^multiplicity"""

    residue: complex
    pole: complex
    multiplicity: int

    def __call__(self, s):
        return self.residue / (s - self.pole) ** self.multiplicity


# -- roots --------------------------------------------------------------------

def _sort_key(z: complex):
    return (round(z.real, 12), round(z.imag, 12))


def poly_roots(p: Polynomial) -> list:
    """Roots of ``p`` as ``(root, multiplicity)`` pairs sorted by real then imaginary part.

    Degree <= 2 uses closed forms; higher degrees use Durand-Kerner iteration
    followed by a Newton polish.  Repeated roots are recognised by clustering.
    """
    if p.is_zero:
        raise RootFindingError("the zero polynomial has no isolated roots")
    if p.degree < 1:
        raise RootFindingError("constant polynomial has no roots")
    real = p.is_real()
    q = p.monic()
    # strip roots at zero exactly
    zeros = 0
    while q.coeffs[0] == 0:
        q = Polynomial(q.coeffs[1:])
        zeros += 1
    if q.degree == 0:
        roots = []
    elif q.degree == 1:
        roots = [-q.coeffs[0] + 0j]
    elif q.degree == 2:
        roots = _quadratic_roots(q)
    else:
        roots = _durand_kerner(q)
        roots = _refine_multiple(q, roots)
    if real:
        roots = _enforce_conjugates(roots)
    roots = [complex(r) for r in roots] + [0j] * zeros
    return _cluster(roots)


def _quadratic_roots(q: Polynomial) -> list:
    c, b, _ = q.coeffs
    d = b * b - 4 * c
    if isinstance(d, complex) or d < 0:
        sq = cmath.sqrt(d)
        return [(-b + sq) / 2, (-b - sq) / 2]
    if d == 0:
        return [complex(-b / 2)] * 2
    # numerically stable pair
    sq = math.sqrt(d)
    r1 = -(b + math.copysign(sq, b)) / 2
    r2 = c / r1 if r1 != 0 else -b - r1
    return [complex(r1), complex(r2)]


def _durand_kerner(q: Polynomial) -> list:
    n = q.degree
    radius = 1.0 + max(abs(c) for c in q.coeffs[:-1])
    seed = complex(0.4, 0.9)
    z = [seed ** k * radius / 2 for k in range(n)]
    for _ in range(MAX_ITERATIONS):
        delta = 0.0
        new = list(z)
        for i in range(n):
            denom = 1.0 + 0j
            for j in range(n):
                if j != i:
                    denom *= new[i] - new[j]
            if denom == 0:
                denom = 1e-300 + 0j
            step = q(new[i]) / denom
            new[i] -= step
            delta = max(delta, abs(step) / max(1.0, abs(new[i])))
        z = new
        if delta < CONVERGENCE:
            break
    # one Newton polish per root
    dq = q.derivative()
    out = []
    for r in z:
        d = dq(r)
        if d != 0:
            cand = r - q(r) / d
            if abs(q(cand)) <= abs(q(r)):
                r = cand
        out.append(r)
    scale = 1.0 + max(abs(c) for c in q.coeffs)
    worst = max(abs(q(r)) for r in out)
    if worst > 1e-6 * scale * max(1.0, max(abs(r) for r in out)) ** n:
        raise RootFindingError(f"Durand-Kerner did not converge (|p(root)| = {worst:.3e})")
    return out


def _refine_multiple(q: Polynomial, roots: list) -> list:
    """Snap near-coincident roots onto a common value when p^(m-1) vanishes there.

    A root of multiplicity m comes out of the iteration spread by about
    eps^(1/m), so candidates are gathered within a wide radius and the largest
    group whose lower derivatives all vanish at the refined centre is accepted.
    """
    n = len(roots)
    used = [False] * n
    out = list(roots)
    for i in range(n):
        if used[i]:
            continue
        near = sorted((j for j in range(n) if j != i and not used[j]
                       and abs(roots[j] - roots[i]) <= GROUP_RADIUS * (1 + abs(roots[i]))),
                      key=lambda j: abs(roots[j] - roots[i]))
        for m in range(len(near) + 1, 1, -1):
            group = [i] + near[:m - 1]
            r = _refine_group(q, sum(roots[k] for k in group) / m, m)
            if r is not None:
                for k in group:
                    out[k] = r
                    used[k] = True
                break
    return out


def _refine_group(q: Polynomial, centre: complex, m: int):
    """Newton on p^(m-1) from ``centre``; the result if p, ..., p^(m-1) vanish there."""
    dm = q.derivative(m - 1)
    ddm = dm.derivative()
    r = centre
    for _ in range(50):
        d = ddm(r)
        if d == 0:
            break
        step = dm(r) / d
        r -= step
        if abs(step) <= 1e-16 * (1 + abs(r)):
            break
    for k in range(m):
        pk = q.derivative(k)
        scale = sum(abs(c) * (1 + abs(r)) ** e for e, c in enumerate(pk.coeffs)) or 1.0
        if abs(pk(r)) > 1e-9 * scale:
            return None
    return r


def _enforce_conjugates(roots: list) -> list:
    out = []
    pending = []
    for r in roots:
        if abs(r.imag) <= 1e-10 * (1 + abs(r.real)):
            out.append(complex(r.real, 0.0))
        else:
            pending.append(r)
    uppers = [r for r in pending if r.imag > 0]
    lowers = [r for r in pending if r.imag < 0]
    if len(uppers) != len(lowers):
        raise RootFindingError("complex roots of a real polynomial are not in conjugate pairs")
    for u in uppers:
        best = min(range(len(lowers)), key=lambda k: abs(lowers[k] - u.conjugate()))
        w = lowers.pop(best)
        avg = (u + w.conjugate()) / 2
        out += [avg, avg.conjugate()]
    return out


def _cluster(roots: list) -> list:
    roots = sorted(roots, key=_sort_key)
    clusters: list = []
    for r in roots:
        for c in clusters:
            if abs(c[0] - r) <= CLUSTER_TOL:
                c[1].append(r)
                break
        else:
            clusters.append((r, [r]))
    out = [(sum(members) / len(members), len(members)) for _, members in clusters]
    return sorted(out, key=lambda rm: _sort_key(rm[0]))


def poly_from_roots(roots: Sequence) -> Polynomial:
    """Monic polynomial with the given roots (``(root, multiplicity)`` pairs or bare roots)."""
    flat = []
    for r in roots:
        if isinstance(r, tuple):
            flat += [r[0]] * r[1]
        else:
            flat.append(r)
    p = Polynomial.from_roots(flat)
    if p.is_real() or all(abs(c.imag) < 1e-12 * (1 + abs(c)) for c in p.coeffs if isinstance(c, complex)):
        p = Polynomial([complex(c).real for c in p.coeffs])
    return p


# -- partial fractions ----------------------------------------------------------

def partial_fractions(r: RationalFunction) -> list:
    """Decompose a proper rational function into residue/(s - pole)^k terms."""
    if not r.is_proper:
        raise ImproperFractionError(
            f"numerator degree {r.numerator.degree} >= denominator degree {r.denominator.degree}"
        )
    poles = poly_roots(r.denominator)
    terms = partial_fractions_from_poles(r.numerator, poles, r.denominator.leading)
    if r.numerator.is_real() and r.denominator.is_real():
        terms = _conjugate_residues(terms)
    return terms


def _conjugate_residues(terms: list) -> list:
    """Make residues of conjugate poles exact conjugates (real input)."""
    upper = {(t.pole, t.multiplicity): t.residue for t in terms if t.pole.imag > 0}
    out = []
    for t in terms:
        if t.pole.imag < 0:
            key = (t.pole.conjugate(), t.multiplicity)
            if key in upper:
                t = PartialFractionTerm(upper[key].conjugate(), t.pole, t.multiplicity)
        elif t.pole.imag == 0:
            t = PartialFractionTerm(complex(t.residue.real, 0.0), t.pole, t.multiplicity)
        out.append(t)
    return out


def partial_fractions_from_poles(numerator: Polynomial, poles: list, leading=1.0) -> list:
    """Partial fractions of numerator / (leading * prod (s - p)^m) for known poles."""
    terms = []
    if numerator.is_zero:
        return terms
    for i, (p, m) in enumerate(poles):
        others = Polynomial([leading])
        for j, (pj, mj) in enumerate(poles):
            if j != i:
                for _ in range(mj):
                    others = others * Polynomial([-pj, 1.0])
        nt = numerator.taylor(p)
        qt = others.taylor(p)
        # series division g = n/q around p, m terms
        g = []
        for k in range(m):
            acc = nt[k] if k < len(nt) else 0.0
            for j in range(1, k + 1):
                if j < len(qt):
                    acc -= qt[j] * g[k - j]
            g.append(acc / qt[0])
        for k in range(m):
            res = complex(g[k])
            if res != 0:
                terms.append(PartialFractionTerm(res, complex(p), m - k))
    return terms


def evaluate_terms(terms: Sequence, s) -> complex:
    return sum(t(s) for t in terms)


# -- expression <-> polynomial ----------------------------------------------------

def to_polynomial(e: Expr, var: str = "x") -> Polynomial:
    """Coefficients of ``e`` as a polynomial in ``var``; ValueError if it is not one."""
    from odekit.expr.calculus import expand

    e = expand(e)
    coeffs: dict = {}
    for t in (e.terms if isinstance(e, Sum) else (e,)):
        c, k = _monomial(t, var)
        coeffs[k] = coeffs.get(k, 0.0) + c
    if not coeffs:
        return Polynomial()
    return Polynomial([coeffs.get(k, 0.0) for k in range(max(coeffs) + 1)])


def _monomial(t: Expr, var: str):
    factors = t.factors if isinstance(t, Prod) else (t,)
    c = 1.0
    k = 0
    for f in factors:
        if isinstance(f, Const):
            c *= f.value
        elif isinstance(f, Var) and f.name == var:
            k += 1
        elif isinstance(f, Pow) and isinstance(f.base, Var) and f.base.name == var \
                and f.exponent.denominator == 1 and f.exponent > 0:
            k += int(f.exponent)
        elif not depends_on(f, var):
            raise ValueError(f"symbolic coefficient {to_text(f)} in polynomial")
        else:
            raise ValueError(f"{to_text(t)} is not a polynomial term in {var}")
    return c, k
