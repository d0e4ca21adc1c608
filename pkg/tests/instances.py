"""Randomized in-class problems for every analytic solver.

Each generator returns a list of ``Case`` objects; ``Case.run()`` solves the
problem and returns the residual measured here, independently of the
solver's own verification (function evaluation and finite differences only).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

from odekit.expr import evaluate, parse
from odekit.first_order import (
    Bernoulli, DifferentialForm, HomogeneousForm, LinearNormal, Riccati, Separable, rhs_of,
    solve_bernoulli, solve_exact, solve_homogeneous, solve_linear_first_order, solve_riccati,
    solve_separable,
)
from odekit.numeric import derivative, first_order_residual, linear_residual, sample_points
from odekit.second_order import (
    ConstCoeffProblem, VarCoeffProblem, auxiliary_roots, basis, laplace_solve, power_series_solve,
    reduce_order, series_residual_coefficients, solve_const_coeff, undetermined_coefficients,
    variation_of_parameters, wronskian,
)

FIRST_ORDER_TOL = 1e-9
SECOND_ORDER_TOL = 1e-8


@dataclass
class Case:
    kind: str
    description: str
    run: Callable[[], float]
    tol: float


def _num(rng: random.Random, lo: float, hi: float, digits: int = 2) -> float:
    v = round(rng.uniform(lo, hi), digits)
    return v if v != 0 else hi


def _points(a: float, b: float) -> list:
    return sample_points(a, b, 64)


def _first_order_check(sol, rhs, ic, a: float, b: float) -> float:
    res = first_order_residual(sol.expression, rhs, _points(a, b), relative=True)
    if ic is not None:
        miss = abs(evaluate(sol.expression, {"x": ic[0]}) - ic[1])
        if miss > 1e-12 * max(1.0, abs(ic[1])):
            return math.inf
    return res


# -- first order ---------------------------------------------------------------------

def separable_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        a = _num(rng, -0.5, 0.5)
        k = _num(rng, -1.0, 1.0)
        f = rng.choice([f"{a}", f"{a}*x", f"{a}*x^2 + {abs(a)}", f"{a}*cos({k}*x)", f"{a}*exp({k}*x)"])
        h, y0 = rng.choice([("y", rng.uniform(0.3, 0.8)), ("y^2", rng.uniform(0.3, 0.8)),
                            ("1", rng.uniform(-1, 1)), ("exp(-y)", rng.uniform(0.3, 1.0)),
                            ("1/y", rng.uniform(1.0, 1.5))])
        rhs = parse(f"({f})*({h})")
        ic = (0.0, round(y0, 3))
        cls = Separable(parse(f), parse(f"1/({h})"))

        def run(cls=cls, rhs=rhs, ic=ic):
            return _first_order_check(solve_separable(cls, ic), rhs, ic, 0.01, 1.0)

        cases.append(Case("separable", f"y' = {f} * {h}, y(0) = {ic[1]}", run, FIRST_ORDER_TOL))
    return cases


def linear_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        a = rng.choice([-2, -1, 1, 2, 3])
        b = _num(rng, -2, 2)
        k = _num(rng, -1, 1)
        p = rng.choice([f"{a}", f"{a}/x"])
        q = rng.choice([f"{b}", f"{b}*x", f"{b}*x^2", f"{b}*exp({k}*x)", f"{b}*sin(x)"])
        if "/x" in p and ("exp" in q or "sin" in q):
            q = f"{b}*x"
        x0 = 1.0
        general = rng.random() < 0.3
        ic = None if general else (x0, round(rng.uniform(-1, 1), 3))
        cls = LinearNormal(parse(p), parse(q))
        rhs = parse(f"{q} - ({p})*y")

        def run(cls=cls, rhs=rhs, ic=ic):
            sol = solve_linear_first_order(cls, ic)
            if ic is None:
                return max(first_order_residual(sol.at(c), rhs, _points(1.01, 2.0), relative=True)
                           for c in (-1.0, 0.0, 1.0, 2.0))
            return _first_order_check(sol, rhs, ic, 1.01, 2.0)

        label = "general" if ic is None else f"y(1) = {ic[1]}"
        cases.append(Case("linear", f"y' + ({p}) y = {q}, {label}", run, FIRST_ORDER_TOL))
    return cases


def exact_cases(rng: random.Random, n: int) -> list:
    from odekit.expr import differentiate

    xs = ["x", "x^2", "sin(x)", "exp(x)"]
    ys = ["y", "y^2", "y^3"]
    cases = []
    for _ in range(n):
        terms = []
        for _ in range(rng.randint(1, 3)):
            terms.append(f"{_num(rng, 0.2, 2)}*{rng.choice(xs)}*{rng.choice(ys)}")
        terms.append(f"{_num(rng, -1, 1)}*{rng.choice(xs)}")
        g = parse(" + ".join(terms))
        F, G = differentiate(g, "x"), differentiate(g, "y")
        cls = DifferentialForm(F, G)

        def run(cls=cls, g_text=" + ".join(terms)):
            sol = solve_exact(cls)
            pot = sol.implicit
            worst = 0.0
            for x in (0.3, 0.7, 1.1):
                for y in (0.5, 1.0, 1.5):
                    gx = derivative(lambda t: evaluate(pot, {"x": t, "y": y}), x)
                    gy = derivative(lambda t: evaluate(pot, {"x": x, "y": t}), y)
                    fx, fy = evaluate(cls.F, {"x": x, "y": y}), evaluate(cls.G, {"x": x, "y": y})
                    worst = max(worst, abs(gx - fx) / max(1.0, abs(fx)), abs(gy - fy) / max(1.0, abs(fy)))
            if sol.expression is not None:
                rhs = rhs_of(cls.F, cls.G)
                for c in (-1.0, 0.0, 1.0, 2.0):
                    try:
                        worst = max(worst, first_order_residual(sol.at(c), rhs, _points(0.01, 1.0), relative=True))
                    except ArithmeticError:
                        continue
            return worst

        cases.append(Case("exact", f"d({' + '.join(terms)}) = 0", run, FIRST_ORDER_TOL))
    return cases


def bernoulli_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        m = rng.choice([2, 3])
        a = _num(rng, -1, 1)
        # the cubic case gets a smaller q and y0 so y^-2 stays positive on [0, 1]
        b = _num(rng, -0.4, 0.4) if m == 2 else _num(rng, -0.2, 0.2)
        p = rng.choice([f"{a}", f"{a}*x"]) if m == 2 else f"{a}"
        q = rng.choice([f"{b}", f"{b}*x", f"{b}*exp(x)"])
        y0 = round(rng.uniform(0.5, 1.0) if m == 2 else rng.uniform(0.3, 0.6), 3)
        cls = Bernoulli(parse(p), parse(q), m)
        rhs = parse(f"({q})*y^{m} - ({p})*y")

        def run(cls=cls, rhs=rhs, ic=(0.0, y0)):
            return _first_order_check(solve_bernoulli(cls, ic), rhs, ic, 0.01, 1.0)

        cases.append(Case("bernoulli", f"y' + ({p}) y = ({q}) y^{m}, y(0) = {y0}", run, FIRST_ORDER_TOL))
    return cases


def homogeneous_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        a = _num(rng, 0.2, 1.5)
        b = rng.choice([-1, 0.5, 2, 3])
        kind = rng.randrange(3)
        if kind == 0:
            rhs_text = f"{a} + {b}*y/x"
            y0 = round(rng.uniform(-1, 1), 3)
        elif kind == 1:
            rhs_text = f"y/x + {a}*y^2/x^2"
            y0 = round(rng.uniform(0.1, 0.5), 3)
        else:
            rhs_text = f"y/x + {a}*x/y"
            y0 = round(rng.uniform(0.5, 1.5), 3)
        rhs = parse(rhs_text)
        cls = HomogeneousForm(rhs, parse("-1"), 0)

        def run(cls=cls, rhs=rhs, ic=(1.0, y0)):
            return _first_order_check(solve_homogeneous(cls, ic), rhs, ic, 1.01, 2.0)

        cases.append(Case("homogeneous", f"y' = {rhs_text}, y(1) = {y0}", run, FIRST_ORDER_TOL))
    return cases


def riccati_cases(rng: random.Random, n: int) -> list:
    from odekit.expr import Const, Prod, Sum, Pow, Y, differentiate, simplify

    cases = []
    for _ in range(n):
        c = _num(rng, 0.2, 1.0) * rng.choice([-1, 1])
        q = _num(rng, -1, 1)
        y1_text = rng.choice([f"{_num(rng, -1, 1)}", f"{_num(rng, -1, 1)}*x", f"{_num(rng, 0.5, 2)}/x"])
        y1 = parse(y1_text)
        # p chosen so that y1 solves y' = p + q y + c y^2
        p = simplify(Sum((differentiate(y1, "x"), Prod((Const(-q), y1)), Prod((Const(-c), Pow(y1, 2))))))
        cls = Riccati(p, Const(q), Const(c), y1)
        rhs = simplify(Sum((p, Prod((Const(q), Y)), Prod((Const(c), Pow(Y, 2))))))
        x0 = 1.0
        y0 = evaluate(y1, {"x": x0}) + round(rng.uniform(0.05, 0.2), 3) * rng.choice([-1, 1])

        def run(cls=cls, rhs=rhs, ic=(x0, y0)):
            return _first_order_check(solve_riccati(cls, ic), rhs, ic, 1.01, 2.0)

        cases.append(Case("riccati", f"y' = p + {q} y + {c} y^2 with y1 = {y1_text}", run, FIRST_ORDER_TOL))
    return cases


# -- second order -------------------------------------------------------------------------

def _forcing(rng: random.Random, roots) -> str:
    terms = []
    for _ in range(rng.randint(1, 2)):
        k = _num(rng, -2, 2)
        kind = rng.randrange(4)
        if kind == 0:
            m = roots[0] if rng.random() < 0.3 and roots else _num(rng, -2, 1)
            terms.append(f"{k}*exp({m}*x)")
        elif kind == 1:
            terms.append(f"{k}*cos({_num(rng, 0.5, 3)}*x)")
        elif kind == 2:
            terms.append(f"{k}*sin({_num(rng, 0.5, 3)}*x)")
        else:
            terms.append(" + ".join(f"{_num(rng, -2, 2)}*x^{j}" for j in range(rng.randint(0, 3) + 1)))
    return " + ".join(f"({t})" for t in terms)


def _const_problem(rng: random.Random):
    m1, m2 = rng.choice([-1, -2, -3, 0, 1]), rng.choice([-1, -2, -3, 0.5])
    if rng.random() < 0.3:
        b, c = _num(rng, -2, 2), _num(rng, 1.5, 5)
        roots = []
    else:
        b, c = -(m1 + m2), m1 * m2
        roots = [m1, m2]
    return b, c, roots


def undetermined_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        b, c, roots = _const_problem(rng)
        f = _forcing(rng, roots)
        prob = ConstCoeffProblem(1.0, b, c, parse(f))

        def run(prob=prob):
            yp = undetermined_coefficients(prob)
            return linear_residual(yp, parse(str(prob.b)), parse(str(prob.c)), prob.forcing,
                                   _points(0.01, 1.0), relative=True)

        cases.append(Case("undetermined", f"y'' + {b} y' + {c} y = {f}", run, SECOND_ORDER_TOL))
    return cases


def variation_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        b, c, roots = _const_problem(rng)
        f = _forcing(rng, roots)
        prob = ConstCoeffProblem(1.0, b, c, parse(f))

        def run(prob=prob):
            y1, y2 = basis(auxiliary_roots(prob.a, prob.b, prob.c))
            vp = VarCoeffProblem.from_const(prob)
            yp = variation_of_parameters(vp, y1, y2)
            return linear_residual(yp, vp.P, vp.Q, vp.R, _points(0.01, 1.0), relative=True)

        cases.append(Case("variation", f"y'' + {b} y' + {c} y = {f}", run, SECOND_ORDER_TOL))
    return cases


def laplace_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        b, c, roots = _const_problem(rng)
        f = _forcing(rng, roots)
        ic = (0.0, round(rng.uniform(-1, 1), 3), round(rng.uniform(-1, 1), 3))
        prob = ConstCoeffProblem(1.0, b, c, parse(f), ic)

        def run(prob=prob):
            y = laplace_solve(prob)
            vp = VarCoeffProblem.from_const(prob)
            res = linear_residual(y, vp.P, vp.Q, vp.R, _points(0.01, 1.0), relative=True)
            ref = solve_const_coeff(prob)
            agree = max(abs(evaluate(y, {"x": x}) - evaluate(ref, {"x": x})) for x in _points(0.0, 1.0))
            miss = abs(evaluate(y, {"x": 0.0}) - prob.ic[1])
            return max(res, agree / 10, miss)

        cases.append(Case("laplace", f"y'' + {b} y' + {c} y = {f}, y(0) = {ic[1]}, y'(0) = {ic[2]}",
                          run, SECOND_ORDER_TOL))
    return cases


def reduction_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        k1 = rng.choice([-2, -1, 1, 2, 3])
        k2 = rng.choice([-2, -1, 0, 1, 2, 3])
        alpha, beta = 1 - k1 - k2, k1 * k2
        P, Q = parse(f"{alpha}/x"), parse(f"{beta}/x^2")
        prob = VarCoeffProblem(P, Q, known=parse(f"x^{k1}"))

        def run(prob=prob, alpha=alpha):
            y2 = reduce_order(prob)
            xs = _points(0.01, 1.0)
            res = linear_residual(y2, prob.P, prob.Q, parse("0"), xs, relative=True)
            w = wronskian([prob.known, y2])
            ratios = [evaluate(w, {"x": x}) * x ** alpha for x in xs]
            spread = (max(ratios) - min(ratios)) / max(abs(r) for r in ratios)
            return max(res, spread)

        cases.append(Case("reduction", f"x^2 y'' + {alpha} x y' + {beta} y = 0 with y1 = x^{k1}",
                          run, SECOND_ORDER_TOL))
    return cases


def series_cases(rng: random.Random, n: int) -> list:
    cases = []
    for _ in range(n):
        P = " + ".join(f"{_num(rng, -1, 1)}*x^{j}" for j in range(rng.randint(0, 2) + 1))
        Q = " + ".join(f"{_num(rng, -1, 1)}*x^{j}" for j in range(rng.randint(0, 2) + 1))
        a0, a1 = round(rng.uniform(-1, 1), 3), round(rng.uniform(-1, 1), 3)
        N = rng.randint(4, 20)

        def run(P=parse(P), Q=parse(Q), a0=a0, a1=a1, N=N):
            s = power_series_solve(P, Q, a0, a1, N)
            coeffs = series_residual_coefficients(s, P, Q)
            scale = max(1.0, max(abs(c) for c in s.coefficients))
            return max([abs(c) / scale for c in coeffs[:N - 1]] + [0.0])

        cases.append(Case("series", f"y'' + ({P}) y' + ({Q}) y = 0, N = {N}", run, 1e-9))
    return cases


FIRST_ORDER = (separable_cases, linear_cases, exact_cases, bernoulli_cases, homogeneous_cases, riccati_cases)
SECOND_ORDER = (undetermined_cases, variation_cases, laplace_cases, reduction_cases, series_cases)


def all_cases(per_solver: int = 20, seed: int = 2024) -> list:
    """``per_solver`` instances for each of the eleven analytic solvers."""
    out = []
    for i, gen in enumerate(FIRST_ORDER + SECOND_ORDER):
        out.extend(gen(random.Random(seed + i), per_solver))
    return out
