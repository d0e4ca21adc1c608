"""Closed-form solvers for first-order equations F(x, y) dx + G(x, y) dy = 0.

Classes, tried in this order: separable, linear, exact, Bernoulli, homogeneous,
Riccati (only with a known particular solution).  Every solution is checked by
substituting it back into the equation numerically.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from odekit.errors import (
    BadParticular, EvaluationError, NotExact, NotRiccati, Unclassified,
    UnsupportedIntegral, VerificationError, ZeroSolutionRegion,
)
from odekit.expr import (
    ONE, ZERO, AbsLn, Const, Exp, Expr, Integral, Ln, Pow, Prod, Sum, Var, X, Y,
    depends_on, differentiate, evaluate, expand, integrate, simplify, strip_abs,
    substitute,
)
from odekit.numeric import derivative, first_order_residual, sample_points

RESIDUAL_TOL = 1e-9
IC_TOL = 1e-12
GENERAL_CONSTANTS = (-1.0, 0.0, 1.0, 2.0)
C = Var("C")


# -- classes ----------------------------------------------------------------------

@dataclass(frozen=True)
class Separable:
    """dy/dx = f(x) / g(y)"""

    f: Expr
    g: Expr


@dataclass(frozen=True)
class LinearNormal:
    """dy/dx + p(x) y = q(x)"""

    p: Expr
    q: Expr


@dataclass(frozen=True)
class DifferentialForm:
    """F dx + G dy = 0, exact when dF/dy = dG/dx."""

    F: Expr
    G: Expr


@dataclass(frozen=True)
class Bernoulli:
    """dy/dx + p(x) y = q(x) y^n with integer n >= 2"""

    p: Expr
    q: Expr
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"Bernoulli exponent must be an integer >= 2, got {self.n!r}")


@dataclass(frozen=True)
class HomogeneousForm:
    """M dx + N dy = 0 with M and N homogeneous of the same degree."""

    M: Expr
    N: Expr
    degree: int


@dataclass(frozen=True)
class Riccati:
    """dy/dx = p(x) + q(x) y + r(x) y^2 with a known particular solution y1."""

    p: Expr
    q: Expr
    r: Expr
    y1: Expr


FirstOrderClass = Union[Separable, LinearNormal, DifferentialForm, Bernoulli, HomogeneousForm, Riccati]


@dataclass(frozen=True)
class AnalyticSolution:
    """Result of an analytic solver.

    ``expression`` is y(x) (containing the constant ``C`` for a general
    solution) or None when only the implicit relation ``implicit(x, y) = C``
    is available.
    """

    expression: Optional[Expr]
    kind: str
    method: str
    implicit: Optional[Expr] = None
    residual: float = math.nan
    interval: tuple = (0.01, 1.0)
    notes: tuple = ()

    @property
    def explicit(self) -> bool:
        return self.expression is not None

    def at(self, constant: float) -> Expr:
        """The member of a general family with C fixed."""
        if self.expression is None:
            raise ValueError("no explicit solution")
        return substitute(self.expression, "C", constant)


# -- helpers -------------------------------------------------------------------------

def rhs_of(F: Expr, G: Expr) -> Expr:
    """dy/dx for F dx + G dy = 0."""
    return simplify(Prod((Const(-1.0), F, Pow(G, Fraction(-1)))))


def form_of(rhs: Expr) -> tuple:
    """(F, G) with F dx + G dy = 0 equivalent to dy/dx = rhs."""
    return simplify(rhs), Const(-1.0)


def working_interval(x0: float, exprs: Sequence[Expr] = (), ys: Sequence[float] = (1.0,)) -> tuple:
    """[x0 + 0.01, x0 + 1], moved right past points where the coefficients fail to evaluate."""
    a, b = x0 + 0.01, x0 + 1.0
    for _ in range(10):
        try:
            for x in sample_points(a, b, 16):
                for e in exprs:
                    for yv in ys:
                        evaluate(e, {"x": x, "y": yv})
            return a, b
        except EvaluationError:
            a, b = a + 1.0, b + 1.0
    return x0 + 0.01, x0 + 1.0


def _points(interval: tuple, n: int = 64) -> list:
    return sample_points(interval[0], interval[1], n)


def _verify(y: Expr, rhs: Expr, interval: tuple, kind: str, ic=None) -> float:
    """Residual of an explicit solution; raises VerificationError on failure."""
    xs = _points(interval)
    if kind == "particular":
        res = first_order_residual(y, rhs, xs, relative=True)
        if not res < RESIDUAL_TOL:
            raise VerificationError("solution does not satisfy the equation", res)
        if ic is not None:
            x0, y0 = ic
            try:
                miss = abs(evaluate(y, {"x": x0}) - y0)
            except EvaluationError:
                miss = 0.0  # initial point on a removable singularity of the closed form
            if miss > IC_TOL * max(1.0, abs(y0)):
                raise VerificationError("initial condition not met", miss)
        return res
    worst, checked = 0.0, 0
    for c in GENERAL_CONSTANTS:
        member = substitute(y, "C", c)
        try:
            res = first_order_residual(member, rhs, xs, relative=True)
        except EvaluationError:
            continue
        checked += 1
        if not res < RESIDUAL_TOL:
            raise VerificationError(f"general solution fails for C={c}", res)
        worst = max(worst, res)
    if not checked:
        raise VerificationError("general solution could not be evaluated for any test constant", math.inf)
    return worst


def _numerically_zero(e: Expr, names=("x", "y"), tol: float = 1e-10, seed: int = 7) -> bool:
    rng = random.Random(seed)
    seen = 0
    for _ in range(32):
        point = {n: rng.uniform(0.3, 2.0) for n in names}
        try:
            v = evaluate(e, point)
        except EvaluationError:
            continue
        seen += 1
        if abs(v) > tol:
            return False
    return seen > 0


def _linear_slope(e: Expr, var: str):
    slope = differentiate(e, var)
    if isinstance(slope, Const) and slope.value != 0.0:
        return slope.value
    return None


def solve_for_y(lhs: Expr, value: Expr, point=None, general: bool = False, var: str = "y") -> Optional[Expr]:
    """Solve lhs(x, var) = value for ``var`` when lhs is a(x)*core(L(var)) + b(x).

    ``core`` is one of L, L^p, ln L, ln|L|, exp L with L linear in ``var``.
    ``point`` = (x0, y0) picks the branch (sign of L) for absolute values and even
    roots.  With ``general`` the logarithmic cases return C*exp(...) so the
    constant multiplies the solution instead of shifting it.
    Returns None when the relation cannot be inverted with these rules.
    """
    lhs = simplify(lhs)
    terms = lhs.terms if isinstance(lhs, Sum) else (lhs,)
    dep = [t for t in terms if depends_on(t, var)]
    rest = [t for t in terms if not depends_on(t, var)]
    if len(dep) != 1:
        return None
    term = dep[0]
    factors = term.factors if isinstance(term, Prod) else (term,)
    cores = [f for f in factors if depends_on(f, var)]
    coef = [f for f in factors if not depends_on(f, var)]
    if len(cores) != 1:
        return None
    core = cores[0]
    a = simplify(Prod(tuple(coef))) if coef else ONE
    b = simplify(Sum(tuple(rest))) if rest else ZERO
    target = simplify(Prod((Sum((value, Prod((Const(-1.0), b)))), Pow(a, Fraction(-1)))))

    if isinstance(core, Var):
        inner, kind = core, "linear"
    elif isinstance(core, Pow):
        inner, kind = core.base, "pow"
    elif isinstance(core, (AbsLn, Ln)):
        inner, kind = core.arg, "log"
    elif isinstance(core, Exp):
        inner, kind = core.arg, "exp"
    else:
        return None
    alpha = _linear_slope(inner, var)
    if alpha is None:
        return None
    beta = substitute(inner, var, 0.0)

    sign = 1.0
    if point is not None:
        try:
            lv = evaluate(inner, {"x": point[0], var: point[1]})
            sign = -1.0 if lv < 0 else 1.0
        except EvaluationError:
            pass

    if kind == "linear":
        l_value = target
    elif kind == "pow":
        p = core.exponent
        root = Fraction(1) / p
        if general:
            target = simplify(Prod((Sum((value, C)), Pow(a, Fraction(-1)))))
        l_value = simplify(Prod((Const(sign if root.denominator % 2 == 0 or p.numerator % 2 == 0 else 1.0),
                                 Pow(target, root))))
    elif kind == "log":
        if isinstance(core, Ln):
            sign = 1.0
        if general:
            scaled = simplify(Prod((value, Pow(a, Fraction(-1)))))
            l_value = simplify(Prod((C, Exp(scaled))))
        else:
            l_value = simplify(Prod((Const(sign), Exp(target))))
    else:  # exp
        l_value = Ln(target)
    # L = alpha*var + beta  =>  var = (L - beta) / alpha
    return expand(simplify(Prod((Const(1.0 / alpha), Sum((l_value, Prod((Const(-1.0), beta))))))))


def _separate(rhs: Expr):
    """(f(x), h(y)) with rhs = f(x) * h(y), or None."""
    if not depends_on(rhs, "y"):
        return rhs, ONE
    if not depends_on(rhs, "x"):
        return ONE, rhs
    factors = rhs.factors if isinstance(rhs, Prod) else (rhs,)
    xs, ys = [], []
    for f in factors:
        dx, dy = depends_on(f, "x"), depends_on(f, "y")
        if dx and dy:
            if isinstance(f, Exp):
                arg_terms = f.arg.terms if isinstance(f.arg, Sum) else (f.arg,)
                xa = [t for t in arg_terms if not depends_on(t, "y")]
                ya = [t for t in arg_terms if depends_on(t, "y")]
                if any(depends_on(t, "x") for t in ya):
                    return None
                xs.append(Exp(Sum(tuple(xa))))
                ys.append(Exp(Sum(tuple(ya))))
                continue
            return None
        (ys if dy else xs).append(f)
    return simplify(Prod(tuple(xs) or (ONE,))), simplify(Prod(tuple(ys) or (ONE,)))


def _affine_in_y(rhs: Expr):
    """(a(x), b(x)) with rhs = a + b*y, or None."""
    b = differentiate(rhs, "y")
    if depends_on(b, "y"):
        return None
    a = substitute(rhs, "y", 0.0)
    check = simplify(Sum((rhs, Prod((Const(-1.0), a)), Prod((Const(-1.0), b, Y)))))
    if not _numerically_zero(check):
        return None
    return a, b


def _powers_of_y(rhs: Expr):
    """{k: coefficient(x)} with rhs = sum coefficient * y^k, or None."""
    e = expand(rhs)
    out: dict = {}
    for t in (e.terms if isinstance(e, Sum) else (e,)):
        factors = t.factors if isinstance(t, Prod) else (t,)
        k = 0
        coef = []
        for f in factors:
            if f == Y:
                k += 1
            elif isinstance(f, Pow) and f.base == Y and f.exponent.denominator == 1 and f.exponent > 0:
                k += int(f.exponent)
            elif depends_on(f, "y"):
                return None
            else:
                coef.append(f)
        out.setdefault(k, []).append(simplify(Prod(tuple(coef))) if coef else ONE)
    return {k: simplify(Sum(tuple(v))) for k, v in out.items() if simplify(Sum(tuple(v))) != ZERO}


def homogeneous_degree(M: Expr, seed: int = 11) -> Optional[int]:
    """Integer n with M(lx, ly) = l^n M(x, y), checked at l in {2, 3} and 8 random points."""
    rng = random.Random(seed)
    degree = None
    checked = 0
    for _ in range(40):
        if checked >= 8:
            break
        x, y = rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)
        try:
            base = evaluate(M, {"x": x, "y": y})
            if base == 0.0:
                continue
            for lam in (2.0, 3.0):
                ratio = evaluate(M, {"x": lam * x, "y": lam * y}) / base
                if ratio <= 0:
                    return None
                n = round(math.log(ratio) / math.log(lam))
                if abs(ratio - lam ** n) > 1e-9 * lam ** n:
                    return None
                if degree is None:
                    degree = n
                elif degree != n:
                    return None
        except EvaluationError:
            continue
        checked += 1
    return degree if checked >= 8 else None


def is_exact(F: Expr, G: Expr, seed: int = 5) -> bool:
    """dF/dy == dG/dx, symbolically or at 16 sample points within 1e-9 relative."""
    fy = differentiate(F, "y")
    gx = differentiate(G, "x")
    if fy == gx:
        return True
    rng = random.Random(seed)
    checked = 0
    for _ in range(64):
        if checked >= 16:
            break
        pt = {"x": rng.uniform(0.3, 2.0), "y": rng.uniform(0.3, 2.0)}
        try:
            a, b = evaluate(fy, pt), evaluate(gx, pt)
        except EvaluationError:
            continue
        checked += 1
        if abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
            return False
    return checked >= 8


# -- classification ---------------------------------------------------------------------

def matching_classes(F: Expr, G: Expr, y1: Optional[Expr] = None) -> list:
    """Every class the equation F dx + G dy = 0 belongs to, in priority order."""
    F, G = simplify(F), simplify(G)
    if G == ZERO:
        return []
    rhs = rhs_of(F, G)
    out: list = []
    sep = _separate(rhs)
    if sep is not None:
        f, h = sep
        out.append(Separable(f, simplify(Pow(h, Fraction(-1)))))
    affine = _affine_in_y(rhs)
    if affine is not None:
        a, b = affine
        out.append(LinearNormal(simplify(Prod((Const(-1.0), b))), a))
    if is_exact(F, G):
        out.append(DifferentialForm(F, G))
    powers = _powers_of_y(rhs)
    if powers is not None:
        ks = sorted(powers)
        high = [k for k in ks if k >= 2]
        if len(high) == 1 and set(ks) <= {1, high[0]}:
            n = high[0]
            out.append(Bernoulli(simplify(Prod((Const(-1.0), powers.get(1, ZERO)))), powers[n], n))
    dm, dn = homogeneous_degree(F), homogeneous_degree(G)
    if dm is not None and dm == dn:
        out.append(HomogeneousForm(F, G, dm))
    if y1 is not None and powers is not None and 2 in powers and set(powers) <= {0, 1, 2}:
        out.append(Riccati(powers.get(0, ZERO), powers.get(1, ZERO), powers[2], simplify(y1)))
    return out


def classify_first_order(F: Expr, G: Expr, y1: Optional[Expr] = None) -> FirstOrderClass:
    """First matching class of F dx + G dy = 0; raises Unclassified when none applies."""
    classes = matching_classes(F, G, y1)
    if not classes:
        raise Unclassified("equation matches none of the supported first-order classes")
    return classes[0]


def classify_rhs(rhs: Expr, y1: Optional[Expr] = None) -> FirstOrderClass:
    return classify_first_order(*form_of(rhs), y1=y1)


# -- solvers ----------------------------------------------------------------------------

def _finish(y: Optional[Expr], rhs: Expr, ic, interval, method: str, implicit=None, notes=()) -> AnalyticSolution:
    kind = "particular" if ic is not None else "general"
    if y is None:
        return AnalyticSolution(None, kind, method, implicit, math.nan, interval,
                                tuple(notes) + ("no explicit inverse; implicit relation returned",))
    res = _verify(y, rhs, interval, kind, ic)
    return AnalyticSolution(y, kind, method, implicit, res, interval, tuple(notes))


def solve_separable(c: Separable, ic=None) -> AnalyticSolution:
    """Integrate g(y) dy = f(x) dx and invert G(y) = F(x) + C where possible."""
    G = integrate(c.g, "y")
    F = integrate(c.f, "x")
    rhs = simplify(Prod((c.f, Pow(c.g, Fraction(-1)))))
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0, [c.f], [ic[1]] if ic else [1.0])
    implicit = simplify(Sum((G, Prod((Const(-1.0), F)))))
    if ic is not None:
        x0, y0 = ic
        const = evaluate(G, {"y": y0}) - evaluate(F, {"x": x0})
        y = solve_for_y(G, simplify(Sum((F, Const(const)))), point=ic)
        implicit = simplify(Sum((implicit, Const(-const))))
    else:
        y = solve_for_y(G, F, general=True)
        if y is not None and not depends_on(y, "C"):
            y = solve_for_y(G, simplify(Sum((F, C))))
    return _finish(y, rhs, ic, interval, "separation of variables", implicit)


def integrating_factor(p: Expr) -> Expr:
    """mu(x) = exp(integral of p), with ln|u| terms turned into powers of u."""
    return strip_abs(Exp(integrate(p, "x")))


def solve_linear_first_order(c: LinearNormal, ic=None) -> AnalyticSolution:
    """y = (integral(mu q) + C) / mu with mu = exp(integral p)."""
    mu = integrating_factor(c.p)
    rhs = simplify(Sum((c.q, Prod((Const(-1.0), c.p, Y)))))
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0, [c.p, c.q, mu])
    integrand = simplify(Prod((mu, c.q)))
    try:
        inner = integrate(integrand, "x")
    except UnsupportedIntegral:
        # no table entry: keep the antiderivative as a quadrature from x0
        inner = Integral(integrand, "x", float(x0 if ic is not None else interval[0]))
    if ic is not None:
        x0, y0 = ic
        const = y0 * evaluate(mu, {"x": x0}) - evaluate(inner, {"x": x0})
        y = expand(Prod((Sum((inner, Const(const))), Pow(mu, Fraction(-1)))))
    else:
        y = expand(Prod((Sum((inner, C)), Pow(mu, Fraction(-1)))))
    return _finish(y, rhs, ic, interval, "integrating factor", notes=(f"mu = {mu}",))


def potential(c: DifferentialForm) -> Expr:
    """g(x, y) with dg/dx = F and dg/dy = G."""
    if not is_exact(c.F, c.G):
        raise NotExact("dF/dy != dG/dx")
    gx = integrate(c.F, "x")
    hprime = simplify(Sum((c.G, Prod((Const(-1.0), differentiate(gx, "y"))))))
    if depends_on(hprime, "x"):
        # exactness guarantees x-independence; pin x at a point where it evaluates
        for xr in (1.0, 0.5, 2.0, 1.5):
            try:
                evaluate(hprime, {"x": xr, "y": 1.0})
            except EvaluationError:
                continue
            hprime = substitute(hprime, "x", xr)
            break
    return simplify(Sum((gx, integrate(hprime, "y"))))


def _check_potential(g: Expr, c: DifferentialForm, interval) -> float:
    worst = 0.0
    rng = random.Random(3)
    for _ in range(16):
        x, y = rng.uniform(*interval), rng.uniform(0.5, 2.0)
        try:
            gx = derivative(lambda t: evaluate(g, {"x": t, "y": y}), x)
            gy = derivative(lambda t: evaluate(g, {"x": x, "y": t}), y)
            fx, fy = evaluate(c.F, {"x": x, "y": y}), evaluate(c.G, {"x": x, "y": y})
        except EvaluationError:
            continue
        worst = max(worst, abs(gx - fx) / max(1.0, abs(fx)), abs(gy - fy) / max(1.0, abs(fy)))
    if not worst < 1e-9:
        raise VerificationError("potential does not reproduce the differential form", worst)
    return worst


def solve_exact(c: DifferentialForm, ic=None) -> AnalyticSolution:
    """Implicit solution g(x, y) = C; explicit y(x) when g can be inverted."""
    g = potential(c)
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0, [c.F, c.G])
    _check_potential(g, c, interval)
    rhs = rhs_of(c.F, c.G)
    if ic is not None:
        const = evaluate(g, {"x": ic[0], "y": ic[1]})
        y = solve_for_y(g, Const(const), point=ic)
        implicit = simplify(Sum((g, Const(-const))))
    else:
        y = solve_for_y(g, C)
        implicit = g
    if isinstance(rhs, Const) and rhs.value == 0.0 and y is None:
        y = C if ic is None else Const(ic[1])
    try:
        return _finish(y, rhs, ic, interval, "exact equation", implicit)
    except VerificationError:
        return AnalyticSolution(None, "particular" if ic else "general", "exact equation", implicit,
                                math.nan, interval, ("explicit branch failed verification",))


def solve_bernoulli(c: Bernoulli, ic=None) -> AnalyticSolution:
    """z = y^(1-n) turns the equation into z' + (1-n) p z = (1-n) q."""
    n = int(c.n)
    k = 1 - n
    linear = LinearNormal(simplify(Prod((Const(k), c.p))), simplify(Prod((Const(k), c.q))))
    notes = ["y = 0 is also a solution (singular branch, not returned)"]
    if ic is not None:
        x0, y0 = ic
        if y0 == 0.0:
            raise ZeroSolutionRegion("y(x0) = 0 lies on the y = 0 solution")
        z_sol = solve_linear_first_order(linear, (x0, y0 ** k))
    else:
        z_sol = solve_linear_first_order(linear)
    z = z_sol.expression
    root = Fraction(1, k)
    sign = 1.0
    if ic is not None and ic[1] < 0 and root.denominator % 2 == 0:
        sign = -1.0
    y = simplify(Prod((Const(sign), Pow(z, root))))
    rhs = simplify(Sum((Prod((c.q, Pow(Y, Fraction(n)))), Prod((Const(-1.0), c.p, Y)))))
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0, [c.p, c.q, y], ys=[1.0])
    return _finish(y, rhs, ic, interval, "Bernoulli substitution", notes=notes)


def solve_homogeneous(c: HomogeneousForm, ic=None) -> AnalyticSolution:
    """y = v x reduces the equation to dv / (R(v) - v) = dx / x."""
    rhs = rhs_of(c.M, c.N)
    R = substitute(rhs, "x", 1.0)  # R(v) with y standing for v
    D = simplify(Sum((R, Prod((Const(-1.0), Y)))))
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0 if x0 > 0 else 0.0, [c.M, c.N])
    if _numerically_zero(D, names=("y",)):
        if ic is not None:
            if ic[0] == 0:
                raise ZeroSolutionRegion("cannot fix the ray constant at x0 = 0")
            y = simplify(Prod((Const(ic[1] / ic[0]), X)))
        else:
            y = simplify(Prod((C, X)))
        return _finish(y, rhs, ic, interval, "homogeneous substitution",
                       notes=("fixed point: R(v) = v, every ray y = Cx is a solution",))
    H = integrate(simplify(Pow(D, Fraction(-1))), "y")
    if ic is not None:
        x0, y0 = ic
        if x0 == 0:
            raise ZeroSolutionRegion("y = vx needs x0 != 0")
        v0 = y0 / x0
        const = evaluate(H, {"y": v0}) - math.log(abs(x0))
        v = solve_for_y(H, simplify(Sum((AbsLn(X), Const(const)))), point=(x0, v0))
        implicit = simplify(Sum((substitute(H, "y", Y / X), Prod((Const(-1.0), AbsLn(X))), Const(-const))))
    else:
        v = solve_for_y(H, AbsLn(X), general=True)
        if v is not None and not depends_on(v, "C"):
            v = solve_for_y(H, simplify(Sum((AbsLn(X), C))))
        implicit = simplify(Sum((substitute(H, "y", Y / X), Prod((Const(-1.0), AbsLn(X))))))
    y = expand(Prod((X, v))) if v is not None else None
    return _finish(y, rhs, ic, interval, "homogeneous substitution", implicit)


def solve_riccati(c: Riccati, ic=None) -> AnalyticSolution:
    """y = y1 + z where z' - (q + 2 r y1) z = r z^2 is a Bernoulli equation."""
    if _numerically_zero(c.r, names=("x",)):
        raise NotRiccati("r(x) = 0: the equation is linear")
    rhs = simplify(Sum((c.p, Prod((c.q, Y)), Prod((c.r, Pow(Y, Fraction(2)))))))
    x0 = ic[0] if ic is not None else 0.0
    interval = working_interval(x0, [c.p, c.q, c.r, c.y1])
    res1 = first_order_residual(c.y1, rhs, _points(interval), relative=True)
    if not res1 < RESIDUAL_TOL:
        raise BadParticular(f"y1 = {c.y1} leaves residual {res1:.3e}")
    bern = Bernoulli(simplify(Prod((Const(-1.0), Sum((c.q, Prod((Const(2.0), c.r, c.y1))))))), c.r, 2)
    z_ic = None
    if ic is not None:
        z0 = ic[1] - evaluate(c.y1, {"x": ic[0]})
        if z0 == 0.0:
            y = c.y1
            return _finish(y, rhs, ic, interval, "Riccati reduction", notes=("initial value lies on y1",))
        z_ic = (ic[0], z0)
    z = solve_bernoulli(bern, z_ic).expression
    y = simplify(Sum((c.y1, z)))
    return _finish(y, rhs, ic, interval, "Riccati reduction", notes=(f"particular solution y1 = {c.y1}",))


SOLVERS = {
    Separable: solve_separable,
    LinearNormal: solve_linear_first_order,
    DifferentialForm: solve_exact,
    Bernoulli: solve_bernoulli,
    HomogeneousForm: solve_homogeneous,
    Riccati: solve_riccati,
}

CLASS_NAMES = {
    Separable: "separable",
    LinearNormal: "linear",
    DifferentialForm: "exact",
    Bernoulli: "bernoulli",
    HomogeneousForm: "homogeneous",
    Riccati: "riccati",
}


def solve(cls: FirstOrderClass, ic=None) -> AnalyticSolution:
    return SOLVERS[type(cls)](cls, ic)


def solve_first_order(F: Expr, G: Expr, ic=None, y1: Optional[Expr] = None) -> tuple:
    """Try each matching class in priority order; return (class, solution).

    A class whose integrals fall outside the table, or whose result fails
    verification, hands over to the next match.
    """
    failures = []
    for cls in matching_classes(F, G, y1):
        try:
            sol = solve(cls, ic)
        except (UnsupportedIntegral, VerificationError, NotExact, ZeroSolutionRegion,
                EvaluationError, BadParticular, NotRiccati) as exc:
            failures.append(f"{CLASS_NAMES[type(cls)]}: {exc}")
            continue
        if sol.expression is None and ic is not None:
            failures.append(f"{CLASS_NAMES[type(cls)]}: implicit only")
            continue
        return cls, sol
    detail = "; ".join(failures) if failures else "no class matches"
    raise Unclassified(detail)


def solve_rhs(rhs: Expr, ic=None, y1: Optional[Expr] = None) -> tuple:
    """solve_first_order for dy/dx = rhs."""
    return solve_first_order(*form_of(rhs), ic=ic, y1=y1)
