"""Second-order linear equations.

Constant coefficients a y'' + b y' + c y = f(x): auxiliary roots, complementary
solutions, undetermined coefficients and Laplace transforms.  Normal form
y'' + P y' + Q y = R: Wronskians, Abel's formula, reduction of order,
variation of parameters and power series at x = 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from odekit.errors import (
    DependentBasis, EvaluationError, UnsupportedForcing, UnsupportedIntegral,
    UnsupportedProblem, VanishingKnownSolution, VerificationError,
)
from odekit.expr import (
    ONE, ZERO, Const, Cos, Exp, Expr, Integral, Polynomial, Pow, Prod, Sin, Sum,
    Var, X, as_expr, depends_on, differentiate, evaluate, expand, integrate,
    partial_fractions_from_poles, poly_roots, simplify, strip_abs, substitute,
    to_polynomial,
)
from odekit.numeric import first_order_residual, linear_residual, sample_points

WORKING_INTERVAL = (0.01, 1.0)
PARTICULAR_TOL = 1e-9
VARIATION_TOL = 1e-8
LAPLACE_TOL = 1e-8
IMAG_TOL = 1e-10
MAX_FORCING_DEGREE = 6
MAX_SERIES_TERMS = 64


# -- problem types --------------------------------------------------------------

@dataclass(frozen=True)
class ConstCoeffProblem:
    """a y'' + b y' + c y = forcing, optional ic = (x0, y0, dy0)."""

    a: float
    b: float
    c: float
    forcing: Expr = ZERO
    ic: Optional[tuple] = None

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("a = 0: the equation is first order")
        object.__setattr__(self, "forcing", simplify(as_expr(self.forcing)))


@dataclass(frozen=True)
class VarCoeffProblem:
    """y'' + P y' + Q y = R with an optional known homogeneous solution."""

    P: Expr
    Q: Expr
    R: Expr = ZERO
    known: Optional[Expr] = None

    def __post_init__(self):
        for name in ("P", "Q", "R"):
            object.__setattr__(self, name, simplify(as_expr(getattr(self, name))))
        if self.known is not None:
            object.__setattr__(self, "known", simplify(as_expr(self.known)))

    @classmethod
    def from_const(cls, p: ConstCoeffProblem) -> "VarCoeffProblem":
        return cls(Const(p.b / p.a), Const(p.c / p.a), simplify(Prod((Const(1.0 / p.a), p.forcing))))


@dataclass(frozen=True)
class DistinctReal:
    m1: float
    m2: float


@dataclass(frozen=True)
class RepeatedReal:
    m: float


@dataclass(frozen=True)
class ComplexPair:
    alpha: float
    beta: float


AuxiliaryRoots = Union[DistinctReal, RepeatedReal, ComplexPair]


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated power series sum a_n x^n, n = 0..N, about x = 0."""

    coefficients: tuple
    truncation: int
    center: float = 0.0

    def __call__(self, x: float) -> float:
        acc = 0.0
        for a in reversed(self.coefficients):
            acc = acc * (x - self.center) + a
        return acc

    def to_expr(self) -> Expr:
        return simplify(Sum(tuple(Prod((Const(a), Pow(X, Fraction(n))))
                                  for n, a in enumerate(self.coefficients) if a != 0.0)))


# -- helpers ----------------------------------------------------------------------

def _points(interval=WORKING_INTERVAL, n: int = 64) -> list:
    return sample_points(interval[0], interval[1], n)


def working_interval(exprs: Sequence[Expr] = ()) -> tuple:
    """[0.01, 1], shifted right while any coefficient fails to evaluate on it."""
    a, b = WORKING_INTERVAL
    for _ in range(10):
        try:
            for x in sample_points(a, b, 16):
                for e in exprs:
                    evaluate(e, {"x": x})
            return a, b
        except EvaluationError:
            a, b = a + 1.0, b + 1.0
    return WORKING_INTERVAL


def _numeric_constant(e: Expr, interval=WORKING_INTERVAL, tol: float = 1e-12) -> Optional[float]:
    """The value of ``e`` if it is constant in x on the interval, else None."""
    values = []
    for x in sample_points(interval[0], interval[1], 16):
        try:
            values.append(evaluate(e, {"x": x}))
        except EvaluationError:
            return None
    ref = values[0]
    if all(abs(v - ref) <= tol * max(1.0, abs(ref)) for v in values):
        return ref
    return None


def _snap(value: float, tol: float = 1e-10) -> float:
    """Round to a nearby small-denominator rational when within ``tol``."""
    frac = Fraction(value).limit_denominator(1000)
    if abs(float(frac) - value) <= tol * max(1.0, abs(value)):
        return float(frac)
    return value


def _apply(p: ConstCoeffProblem, y: Expr) -> Expr:
    d1 = differentiate(y, "x")
    d2 = differentiate(d1, "x")
    return simplify(Sum((Prod((Const(p.a), d2)), Prod((Const(p.b), d1)), Prod((Const(p.c), y)))))


def const_residual(p: ConstCoeffProblem, y: Expr, interval=WORKING_INTERVAL) -> float:
    """Residual of y against a y'' + b y' + c y = f, relative to the size of the terms."""
    return linear_residual(y, Const(p.b / p.a), Const(p.c / p.a),
                           simplify(Prod((Const(1.0 / p.a), p.forcing))), _points(interval), relative=True)


# -- constant coefficients ----------------------------------------------------------

def auxiliary_roots(a: float, b: float, c: float) -> AuxiliaryRoots:
    """Roots of a m^2 + b m + c = 0 classified by the sign of the discriminant."""
    if a == 0:
        raise ValueError("a = 0: the equation is first order")
    d = b * b - 4 * a * c
    tol = 1e-12 * (b * b + 4 * abs(a * c) + 1)
    if d > tol:
        sq = math.sqrt(d)
        # avoid cancellation in the smaller root
        q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else 0.5 * sq
        r1 = q / a
        r2 = c / q if q != 0 else -r1
        m1, m2 = max(r1, r2), min(r1, r2)
        return DistinctReal(m1, m2)
    if d >= -tol:
        return RepeatedReal(-b / (2 * a))
    return ComplexPair(-b / (2 * a), math.sqrt(-d) / (2 * abs(a)))


def basis(roots: AuxiliaryRoots) -> tuple:
    """Two independent homogeneous solutions for the root case."""
    if isinstance(roots, DistinctReal):
        return _exp(roots.m1), _exp(roots.m2)
    if isinstance(roots, RepeatedReal):
        return _exp(roots.m), simplify(Prod((X, _exp(roots.m))))
    env = _exp(roots.alpha)
    arg = simplify(Prod((Const(roots.beta), X)))
    return simplify(Prod((env, Cos(arg)))), simplify(Prod((env, Sin(arg))))


def _exp(m: float) -> Expr:
    return simplify(Exp(Prod((Const(m), X))))


def complementary_solution(roots: AuxiliaryRoots) -> Expr:
    """A y1 + B y2 for distinct roots, (C x + D) e^{mx} for a repeated root, and
    e^{alpha x}(C cos beta x + D sin beta x) for a complex pair."""
    y1, y2 = basis(roots)
    if isinstance(roots, DistinctReal):
        k1, k2 = Var("A"), Var("B")
    elif isinstance(roots, RepeatedReal):
        k1, k2 = Var("D"), Var("C")
    else:
        k1, k2 = Var("C"), Var("D")
    return simplify(Sum((Prod((k1, y1)), Prod((k2, y2)))))


def _forcing_families(f: Expr) -> dict:
    """Group forcing terms by (k, b): x^n e^{kx} cos/sin(bx) families -> max degree n."""
    families: dict = {}
    f = expand(f)
    if f == ZERO:
        return families
    for t in (f.terms if isinstance(f, Sum) else (f,)):
        n, k, b = 0, 0.0, 0.0
        for fac in (t.factors if isinstance(t, Prod) else (t,)):
            if not depends_on(fac, "x"):
                continue
            if fac == X:
                n += 1
            elif isinstance(fac, Pow) and fac.base == X and fac.exponent.denominator == 1 and fac.exponent > 0:
                n += int(fac.exponent)
            elif isinstance(fac, Exp) and _slope(fac.arg) is not None:
                k += _slope(fac.arg)
            elif isinstance(fac, (Sin, Cos)) and _slope(fac.arg) is not None and b == 0.0:
                b = abs(_slope(fac.arg))
            else:
                raise UnsupportedForcing(f"forcing term {t} is outside the trial-function table")
        if n > MAX_FORCING_DEGREE:
            raise UnsupportedForcing(f"polynomial degree {n} exceeds {MAX_FORCING_DEGREE}")
        key = (k, b)
        families[key] = max(families.get(key, 0), n)
    return families


def _slope(arg: Expr) -> Optional[float]:
    s = differentiate(arg, "x")
    return s.value if isinstance(s, Const) else None


def _root_multiplicity(a: float, b: float, c: float, lam: complex) -> int:
    scale = abs(a) * abs(lam) ** 2 + abs(b) * abs(lam) + abs(c) + 1.0
    if abs(a * lam * lam + b * lam + c) > 1e-10 * scale:
        return 0
    if abs(2 * a * lam + b) > 1e-10 * (abs(a) * abs(lam) + abs(b) + 1.0):
        return 1
    return 2


def trial_functions(p: ConstCoeffProblem) -> list:
    """Trial terms for the forcing, each multiplied by x^s where s is the resonance order."""
    trial = []
    for (k, b), n in sorted(_forcing_families(p.forcing).items()):
        s = _root_multiplicity(p.a, p.b, p.c, complex(k, b))
        env = _exp(k) if k != 0 else ONE
        waves = [ONE] if b == 0 else [Cos(simplify(Prod((Const(b), X)))), Sin(simplify(Prod((Const(b), X))))]
        for j in range(n + 1):
            for w in waves:
                trial.append(simplify(Prod((Pow(X, Fraction(j + s)), env, w))))
    return trial


def undetermined_coefficients(p: ConstCoeffProblem, interval=WORKING_INTERVAL) -> Expr:
    """Particular solution from the trial-function table.

    The unknown coefficients are fixed by requiring L[y_p] = f at collocation
    points, a linear system solved by least squares.
    """
    trial = trial_functions(p)
    if not trial:
        return ZERO
    images = [_apply(p, t) for t in trial]
    xs = sample_points(interval[0], interval[1], max(3 * len(trial), 16))
    A = np.array([[evaluate(im, {"x": x}) for im in images] for x in xs])
    rhs = np.array([evaluate(p.forcing, {"x": x}) for x in xs])
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    yp = simplify(Sum(tuple(Prod((Const(_snap(float(c))), t)) for c, t in zip(coef, trial) if abs(c) > 1e-14)))
    res = const_residual(p, yp, interval)
    if not res < PARTICULAR_TOL:
        raise VerificationError("undetermined coefficients failed the residual check", res)
    return yp


def fit_initial_values(y1: Expr, y2: Expr, yp: Expr, ic: tuple) -> Expr:
    """A y1 + B y2 + yp with A, B chosen to meet y(x0) = y0, y'(x0) = dy0."""
    x0, y0, dy0 = ic
    at = {"x": x0}
    d = [differentiate(e, "x") for e in (y1, y2, yp)]
    m = np.array([[evaluate(y1, at), evaluate(y2, at)], [evaluate(d[0], at), evaluate(d[1], at)]])
    v = np.array([y0 - evaluate(yp, at), dy0 - evaluate(d[2], at)])
    A, B = np.linalg.solve(m, v)
    return simplify(Sum((Prod((Const(_snap(float(A))), y1)), Prod((Const(_snap(float(B))), y2)), yp)))


def solve_const_coeff(p: ConstCoeffProblem, method: str = "undetermined") -> Expr:
    """General solution (constants A, B / C, D) or, with ic, the particular solution.

    ``method`` is ``undetermined`` (falls back to variation of parameters on
    unsupported forcing) or ``variation``.
    """
    roots = auxiliary_roots(p.a, p.b, p.c)
    y1, y2 = basis(roots)
    if method == "variation":
        yp = variation_of_parameters(VarCoeffProblem.from_const(p), y1, y2)
    else:
        try:
            yp = undetermined_coefficients(p)
        except UnsupportedForcing:
            yp = variation_of_parameters(VarCoeffProblem.from_const(p), y1, y2)
    if p.ic is None:
        return simplify(Sum((complementary_solution(roots), yp)))
    return fit_initial_values(y1, y2, yp, p.ic)


# -- Wronskian and Abel ----------------------------------------------------------------

def _det(m: list) -> Expr:
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return Sum((Prod((m[0][0], m[1][1])), Prod((Const(-1.0), m[0][1], m[1][0]))))
    terms = []
    for j in range(len(m)):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        terms.append(Prod((Const((-1.0) ** j), m[0][j], _det(minor))))
    return Sum(tuple(terms))


def wronskian(ys: Sequence[Expr], interval=WORKING_INTERVAL) -> Expr:
    """Determinant of [y_i^(k)] for up to three functions.

    A determinant that evaluates to the same value everywhere on the interval
    (e.g. cos^2 + sin^2) is returned as that constant.
    """
    ys = [simplify(as_expr(y)) for y in ys]
    n = len(ys)
    if not 1 <= n <= 3:
        raise ValueError("wronskian supports one to three functions")
    rows = [ys]
    for _ in range(n - 1):
        rows.append([differentiate(e, "x") for e in rows[-1]])
    w = expand(_det(rows))
    if not isinstance(w, Const):
        value = _numeric_constant(w, interval)
        if value is not None:
            w = Const(_snap(value, 1e-12) if abs(value) > 1e-12 else 0.0)
    return w


def abel_wronskian(P1: Expr) -> Expr:
    """exp(-integral P1), the Wronskian up to its constant factor."""
    return simplify(Exp(Prod((Const(-1.0), integrate(as_expr(P1), "x")))))


# -- reduction of order and variation of parameters ---------------------------------------

def _abel_form(W: Expr, P1: Expr, interval) -> Expr:
    """Rewrite W as c * exp(-integral P1) when the two agree up to a constant."""
    if isinstance(W, Const):
        return W
    try:
        abel = strip_abs(abel_wronskian(P1))
    except UnsupportedIntegral:
        return W
    c = _numeric_constant(simplify(Prod((W, Pow(abel, Fraction(-1))))), interval, tol=1e-10)
    return W if c is None else simplify(Prod((Const(c), abel)))


def _antiderivative(e: Expr, lower: float) -> Expr:
    """Closed form when the table has one, otherwise a quadrature-backed integral."""
    try:
        return integrate(e, "x")
    except UnsupportedIntegral:
        return Integral(simplify(e), "x", float(lower))


def reduce_order(p: VarCoeffProblem) -> Expr:
    """Second solution y2 = y1 * integral(exp(-integral P) / y1^2)."""
    y1 = p.known
    if y1 is None:
        raise UnsupportedProblem("reduction of order needs a known solution y1")
    interval = working_interval([p.P, p.Q])
    xs = _points(interval)
    res1 = linear_residual(y1, p.P, p.Q, ZERO, xs, relative=True)
    if not res1 < PARTICULAR_TOL:
        raise VerificationError("y1 does not solve the homogeneous equation", res1)
    values = [evaluate(y1, {"x": x}) for x in xs]
    near_zero = min(abs(v) for v in values) <= 1e-12 * max(1.0, max(abs(v) for v in values))
    if near_zero or any(u * v < 0 for u, v in zip(values, values[1:])):
        raise VanishingKnownSolution("y1 vanishes on the working interval")
    w = strip_abs(abel_wronskian(p.P))
    inner = _antiderivative(simplify(Prod((w, Pow(y1, Fraction(-2))))), interval[0])
    y2 = expand(Prod((y1, inner)))
    res2 = linear_residual(y2, p.P, p.Q, ZERO, xs, relative=True)
    if not res2 < PARTICULAR_TOL:
        raise VerificationError("second solution fails the residual check", res2)
    return y2


def variation_of_parameters(p: VarCoeffProblem, y1: Expr, y2: Expr) -> Expr:
    """y_p = v1 y1 + v2 y2 with v1' = -y2 R / W and v2' = y1 R / W."""
    if p.R == ZERO:
        return ZERO
    interval = working_interval([p.P, p.Q, p.R])
    xs = _points(interval)
    W = wronskian([y1, y2], interval)
    if min(abs(evaluate(W, {"x": x})) for x in xs) < 1e-10:
        raise DependentBasis("Wronskian vanishes on the working interval")
    W = _abel_form(W, p.P, interval)
    inv_w = Pow(W, Fraction(-1))
    v1 = _antiderivative(simplify(Prod((Const(-1.0), y2, p.R, inv_w))), interval[0])
    v2 = _antiderivative(simplify(Prod((y1, p.R, inv_w))), interval[0])
    yp = expand(Sum((Prod((v1, y1)), Prod((v2, y2)))))
    res = linear_residual(yp, p.P, p.Q, p.R, xs, relative=True)
    if not res < VARIATION_TOL:
        raise VerificationError("variation of parameters failed the residual check", res)
    return yp


# -- Laplace transform -----------------------------------------------------------------

def _exponential_terms(f: Expr) -> list:
    """Write f as sum c * x^n * e^{lam x} with complex lam: [(c, n, lam)]."""
    out = []
    f = expand(f)
    if f == ZERO:
        return out
    for t in (f.terms if isinstance(f, Sum) else (f,)):
        parts = [(complex(1.0), 0, complex(0.0))]
        for fac in (t.factors if isinstance(t, Prod) else (t,)):
            if not depends_on(fac, "x"):
                v = evaluate(fac, {})
                parts = [(c * v, n, lam) for c, n, lam in parts]
                continue
            if fac == X or (isinstance(fac, Pow) and fac.base == X and fac.exponent.denominator == 1
                            and fac.exponent > 0):
                k = 1 if fac == X else int(fac.exponent)
                parts = [(c, n + k, lam) for c, n, lam in parts]
                continue
            if isinstance(fac, (Exp, Sin, Cos)) and _slope(fac.arg) is not None:
                w = _slope(fac.arg)
                phase = evaluate(substitute(fac.arg, "x", 0.0), {})
                if isinstance(fac, Exp):
                    pieces = [(cmath.exp(phase), complex(w))]
                elif isinstance(fac, Cos):
                    pieces = [(0.5 * cmath.exp(1j * phase), 1j * w), (0.5 * cmath.exp(-1j * phase), -1j * w)]
                else:
                    pieces = [(-0.5j * cmath.exp(1j * phase), 1j * w), (0.5j * cmath.exp(-1j * phase), -1j * w)]
                parts = [(c * pc, n, lam + pl) for c, n, lam in parts for pc, pl in pieces]
                continue
            raise UnsupportedForcing(f"forcing term {t} has no rational Laplace image in the table")
        out.extend(parts)
    return out


def _merge_poles(poles: list, tol: float = 1e-9) -> list:
    merged: list = []
    for p, m in poles:
        for i, (q, k) in enumerate(merged):
            if abs(p - q) <= tol * max(1.0, abs(q)):
                merged[i] = (q, k + m)
                break
        else:
            merged.append((p, m))
    return merged


def laplace_image(coeffs: Sequence[float], forcing: Expr, initial: Sequence[float]):
    """Y(s) as (numerator, poles, leading) for sum coeffs[k] y^(k) = forcing.

    ``coeffs`` is ascending (coeffs[k] multiplies the k-th derivative) and
    ``initial`` lists y(0), y'(0), ... up to order - 1.
    """
    order = len(coeffs) - 1
    if order < 1 or coeffs[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if len(initial) != order:
        raise ValueError(f"need {order} initial values")
    char = Polynomial(coeffs)
    # L{y^(k)} = s^k Y - sum_{i=1..k} s^{k-i} y^(i-1)(0)
    ic_poly = Polynomial()
    for k in range(1, order + 1):
        for i in range(1, k + 1):
            mono = [0.0] * (k - i) + [coeffs[k] * initial[i - 1]]
            ic_poly = ic_poly + Polynomial(mono)
    forcing_terms = _exponential_terms(simplify(as_expr(forcing)))
    forcing_poles = _merge_poles([(lam, n + 1) for _, n, lam in forcing_terms])
    forcing_poles = [(q, max(n + 1 for _, n, lam in forcing_terms if abs(lam - q) <= 1e-9 * max(1.0, abs(q))))
                     for q, _ in forcing_poles]

    def product(poles, skip=None):
        out = Polynomial([1.0])
        for q, m in poles:
            power = m - (skip[1] if skip is not None and q == skip[0] else 0)
            for _ in range(power):
                out = out * Polynomial([-q, 1.0])
        return out

    numerator = ic_poly * product(forcing_poles)
    for c, n, lam in forcing_terms:
        q = next(q for q, _ in forcing_poles if abs(lam - q) <= 1e-9 * max(1.0, abs(q)))
        numerator = numerator + Polynomial([c * math.factorial(n)]) * product(forcing_poles, (q, n + 1))
    char_poles = poly_roots(char)
    poles = _merge_poles(list(char_poles) + forcing_poles)
    return numerator, poles, coeffs[-1]


def _clean(z: complex, scale: float = 1.0, tol: float = 1e-13) -> complex:
    re = 0.0 if abs(z.real) <= tol * scale else z.real
    im = 0.0 if abs(z.imag) <= tol * scale else z.imag
    return complex(re, im)


def laplace_solve_ivp(coeffs: Sequence[float], forcing: Expr = ZERO, initial: Sequence[float] = (0.0,)) -> Expr:
    """Solve sum coeffs[k] y^(k) = forcing with initial values at 0 by Laplace transform.

    Y(s) is decomposed into partial fractions and inverted termwise;
    conjugate poles combine into e^{alpha x}(A cos beta x + B sin beta x).
    """
    numerator, poles, lead = laplace_image(coeffs, forcing, initial)
    terms = partial_fractions_from_poles(numerator, poles, lead)
    scale = max([abs(t.residue) for t in terms] + [1.0])
    pieces = []
    complex_terms = []
    for t in terms:
        r = _clean(t.residue, scale)
        p = _clean(t.pole, max(1.0, abs(t.pole)))
        k = t.multiplicity
        complex_terms.append((r, p, k))
        if r == 0 or p.imag < 0:
            continue
        mono = Prod((Const(1.0 / math.factorial(k - 1)), Pow(X, Fraction(k - 1))))
        env = _exp(_snap(p.real, 1e-12)) if p.real != 0 else ONE
        if p.imag == 0:
            pieces.append(Prod((Const(_snap(r.real)), mono, env)))
        else:
            arg = simplify(Prod((Const(_snap(p.imag, 1e-12)), X)))
            wave = Sum((Prod((Const(_snap(2 * r.real)), Cos(arg))), Prod((Const(_snap(-2 * r.imag)), Sin(arg)))))
            pieces.append(Prod((mono, env, wave)))
    y = simplify(Sum(tuple(pieces))) if pieces else ZERO

    for x in _points((0.0, 1.0), 16):
        total = sum(r * x ** (k - 1) / math.factorial(k - 1) * cmath.exp(p * x) for r, p, k in complex_terms)
        if abs(total.imag) > IMAG_TOL * max(1.0, abs(total)):
            raise VerificationError("inverse transform has a nonzero imaginary part", abs(total.imag))

    order = len(coeffs) - 1
    xs = _points()
    f = simplify(as_expr(forcing))
    if order == 1:
        rhs = simplify(Prod((Const(1.0 / coeffs[1]), Sum((f, Prod((Const(-coeffs[0]), Var("y"))))))))
        res = first_order_residual(y, rhs, xs, relative=True)
    elif order == 2:
        res = linear_residual(y, Const(coeffs[1] / coeffs[2]), Const(coeffs[0] / coeffs[2]),
                              simplify(Prod((Const(1.0 / coeffs[2]), f))), xs, relative=True)
    else:
        raise UnsupportedProblem("Laplace solver handles orders 1 and 2")
    if not res < LAPLACE_TOL:
        raise VerificationError("Laplace solution failed the residual check", res)
    return y


def laplace_solve(p: ConstCoeffProblem) -> Expr:
    if p.ic is None:
        raise UnsupportedProblem("Laplace transform needs initial values")
    x0, y0, dy0 = p.ic
    if x0 != 0:
        raise UnsupportedProblem("initial values must be given at x = 0")
    return laplace_solve_ivp((p.c, p.b, p.a), p.forcing, (y0, dy0))


# -- power series --------------------------------------------------------------------

def power_series_solve(P: Expr, Q: Expr, a0: float, a1: float, N: int, R: Expr = ZERO) -> SeriesSolution:
    """Coefficients of y = sum a_n x^n for y'' + P y' + Q y = R with polynomial P, Q, R.

    a_{n+2} = (r_n - sum_j p_j (n+1-j) a_{n+1-j} - sum_j q_j a_{n-j}) / ((n+1)(n+2))
    """
    if not 1 <= N <= MAX_SERIES_TERMS:
        raise ValueError(f"truncation must be in 1..{MAX_SERIES_TERMS}")
    try:
        p, q, r = (to_polynomial(simplify(as_expr(e)), "x") for e in (P, Q, R))
    except ValueError as exc:
        raise UnsupportedProblem(f"coefficients must be polynomials in x: {exc}") from exc
    pc = [complex(c).real for c in p.coeffs]
    qc = [complex(c).real for c in q.coeffs]
    rc = [complex(c).real for c in r.coeffs]
    a = [float(a0), float(a1)]
    for n in range(0, N - 1):
        acc = rc[n] if n < len(rc) else 0.0
        acc -= sum(pc[j] * (n + 1 - j) * a[n + 1 - j] for j in range(min(len(pc), n + 1)))
        acc -= sum(qc[j] * a[n - j] for j in range(min(len(qc), n + 1)))
        a.append(acc / ((n + 1) * (n + 2)))
    return SeriesSolution(tuple(a[:N + 1]), N)


def series_residual_coefficients(s: SeriesSolution, P: Expr, Q: Expr, R: Expr = ZERO) -> list:
    """Coefficients of L[y_N] - R in powers of x; degrees <= N - 2 should vanish."""
    y = Polynomial(s.coefficients)
    p, q, r = (to_polynomial(simplify(as_expr(e)), "x") for e in (P, Q, R))
    out = y.derivative(2) + p * y.derivative(1) + q * y - r
    return [complex(c).real for c in out.coeffs]
