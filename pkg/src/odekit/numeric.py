"""Fixed-step one-step integrators, error tables and convergence-order estimates.

Also home of the residual verifiers that the analytic solvers use: they only
evaluate candidate solutions and differentiate them by Richardson-extrapolated
finite differences, so they never share a code path with symbolic solving.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

from odekit.errors import EvaluationError, GridError, NumericBlowup
from odekit.expr.nodes import Expr, evaluate

RhsFunction = Callable[[float, float], float]
MAX_STEPS = 10_000_000


class Method(str, Enum):
    EULER = "euler"
    IMPROVED_EULER = "heun"
    RK4 = "rk4"


# -- problem and result types ----------------------------------------------------

@dataclass(frozen=True)
class Ivp:
    """dy/dx = f(x, y), y(x0) = y0, integrated up to x_end."""

    f: RhsFunction
    x0: float
    y0: float
    x_end: float

    def __post_init__(self):
        if isinstance(self.f, Expr):
            object.__setattr__(self, "f", rhs_from_expr(self.f))
        if not self.x_end > self.x0:
            raise ValueError(f"x_end ({self.x_end}) must exceed x0 ({self.x0})")
        try:
            v = self.f(self.x0, self.y0)
        except EvaluationError as exc:
            raise ValueError(f"f is not defined at the initial point: {exc}") from exc
        if not math.isfinite(v):
            raise ValueError("f is not finite at the initial point")


def rhs_from_expr(e: Expr) -> RhsFunction:
    def f(x, y):
        return evaluate(e, {"x": x, "y": y})

    f.expr = e
    return f


@dataclass(frozen=True)
class Trajectory:
    method: Method
    h: float
    xs: tuple
    ys: tuple
    note: str = ""

    @property
    def points(self):
        return list(zip(self.xs, self.ys))

    @property
    def x0(self) -> float:
        return self.xs[0]

    def index_of(self, x: float, tol: float = 1e-12) -> int:
        r = round((x - self.xs[0]) / self.h)
        if not 0 <= r < len(self.xs) or abs(self.xs[r] - x) > tol:
            raise GridError(f"abscissa {x!r} is not on the grid of step {self.h!r}")
        return r

    def value_at(self, x: float) -> float:
        return self.ys[self.index_of(x)]

    def interpolate(self, x: float) -> float:
        """Piecewise-linear interpolant, extended linearly past both ends."""
        r = int(math.floor((x - self.xs[0]) / self.h))
        r = min(max(r, 0), len(self.xs) - 2)
        x1, x2 = self.xs[r], self.xs[r + 1]
        t = (x - x1) / (x2 - x1)
        return self.ys[r] + t * (self.ys[r + 1] - self.ys[r])


@dataclass(frozen=True)
class ErrorRow:
    x: float
    exact: float
    approx: float
    abs_error: float


@dataclass(frozen=True)
class ErrorReport:
    rows: tuple
    max_error: float


@dataclass(frozen=True)
class ConvergenceReport:
    method: Method
    pairs: tuple  # (h, max_error)
    local_orders: tuple
    estimated_order: float


# -- steppers --------------------------------------------------------------------

def _check(value: float) -> float:
    if not math.isfinite(value):
        raise NumericBlowup(-1, math.nan, value)
    return value


def euler_step(f: RhsFunction, x: float, y: float, h: float) -> float:
    """y + h f(x, y); one evaluation of f."""
    return y + h * _check(f(x, y))


def improved_euler_step(f: RhsFunction, x: float, y: float, h: float) -> float:
    """Euler predictor, trapezoidal corrector; two evaluations of f."""
    f0 = _check(f(x, y))
    predictor = y + h * f0
    f1 = _check(f(x + h, predictor))
    return y + (h / 2) * (f0 + f1)


def rk4_step(f: RhsFunction, x: float, y: float, h: float) -> float:
    """Classical fourth-order Runge-Kutta step; four evaluations of f.

    Stages sit at x, x + h/2, x + h/2 and x + h with weights 1, 2, 2, 1.
    """
    k1 = h * _check(f(x, y))
    k2 = h * _check(f(x + h / 2, y + k1 / 2))
    k3 = h * _check(f(x + h / 2, y + k2 / 2))
    k4 = h * _check(f(x + h, y + k3))
    return y + (k1 + 2 * (k2 + k3) + k4) / 6


STEPPERS = {
    Method.EULER: euler_step,
    Method.IMPROVED_EULER: improved_euler_step,
    Method.RK4: rk4_step,
}


def step_count(x0: float, x_end: float, h: float) -> tuple:
    """Number of steps of length h from x0 to x_end and whether it is exact."""
    if not h > 0:
        raise GridError(f"step length must be positive, got {h!r}")
    ratio = (x_end - x0) / h
    if ratio > MAX_STEPS:
        raise GridError(f"{ratio:.3g} steps exceeds the limit of {MAX_STEPS}")
    n = round(ratio)
    if n < 1:
        raise GridError(f"step {h!r} is longer than the interval")
    exact = abs(ratio - n) <= 64 * sys.float_info.epsilon * max(1.0, ratio)
    return n, exact


def integrate_fixed(ivp: Ivp, method: Union[Method, str], h: float) -> Trajectory:
    """March from x0 to x_end with a fixed step; x_r = x0 + r*h by multiplication."""
    method = Method(method)
    stepper = STEPPERS[method]
    n, exact = step_count(ivp.x0, ivp.x_end, h)
    note = "" if exact else f"(x_end - x0)/h is not an integer; final abscissa {ivp.x0 + n * h!r}"
    xs = [ivp.x0]
    ys = [ivp.y0]
    y = ivp.y0
    for r in range(n):
        x = ivp.x0 + r * h
        try:
            y = stepper(ivp.f, x, y, h)
        except NumericBlowup:
            raise NumericBlowup(r, x, math.nan) from None
        except EvaluationError as exc:
            raise NumericBlowup(r, x, y) from exc
        if not math.isfinite(y):
            raise NumericBlowup(r + 1, ivp.x0 + (r + 1) * h, y)
        xs.append(ivp.x0 + (r + 1) * h)
        ys.append(y)
    return Trajectory(method, h, tuple(xs), tuple(ys), note)


# -- error tables and convergence -------------------------------------------------

def _as_function(exact) -> Callable[[float], float]:
    if isinstance(exact, Expr):
        return lambda x: evaluate(exact, {"x": x})
    return exact


def error_report(t: Trajectory, exact, at: Optional[Sequence[float]] = None) -> ErrorReport:
    """Absolute errors of ``t`` against ``exact`` at abscissae ``at`` (default: every point)."""
    fn = _as_function(exact)
    indices = range(len(t.xs)) if at is None else [t.index_of(x) for x in at]
    rows = []
    for r in indices:
        x = t.xs[r]
        ex = fn(x)
        rows.append(ErrorRow(x, ex, t.ys[r], abs(ex - t.ys[r])))
    return ErrorReport(tuple(rows), max((row.abs_error for row in rows), default=0.0))


def estimate_order(ivp: Ivp, method: Union[Method, str], hs: Sequence[float], exact,
                   at: Optional[Sequence[float]] = None) -> ConvergenceReport:
    """Empirical order from successive step halvings.

    Errors are measured at ``at``, by default the grid of the coarsest step, so
    every run is compared at the same abscissae.  An exactly integrated problem
    (error at rounding level) reports an infinite order.
    """
    method = Method(method)
    if len(hs) < 2:
        raise ValueError("need at least two step sizes")
    for h1, h2 in zip(hs, hs[1:]):
        if abs(h1 / h2 - 2.0) > 1e-9:
            raise ValueError(f"step sizes must halve: {h1!r} -> {h2!r}")
    trajectories = [integrate_fixed(ivp, method, h) for h in hs]
    if at is None:
        at = trajectories[0].xs
    errors = []
    for t in trajectories:
        report = error_report(t, exact, at)
        # rounding accumulates about one ulp of the solution per step
        scale = max([1.0] + [abs(row.exact) for row in report.rows])
        floor = 8 * sys.float_info.epsilon * scale * len(t.xs)
        errors.append(0.0 if report.max_error <= floor else report.max_error)
    local = []
    for e1, e2 in zip(errors, errors[1:]):
        if e1 == 0.0 or e2 == 0.0:
            local.append(math.inf)
        else:
            local.append(math.log2(e1 / e2))
    order = math.inf if any(math.isinf(o) for o in local) else sum(local) / len(local)
    return ConvergenceReport(method, tuple(zip(hs, errors)), tuple(local), order)


def linear_test_factor(method: Union[Method, str], h_lambda: float) -> float:
    """Growth factor per step for y' = lambda*y."""
    method = Method(method)
    z = h_lambda
    if method is Method.EULER:
        return 1 + z
    if method is Method.IMPROVED_EULER:
        return 1 + z + z * z / 2
    return 1 + z + z ** 2 / 2 + z ** 3 / 6 + z ** 4 / 24


# -- finite-difference derivatives and residuals -------------------------------------

def _ridders(estimate: Callable[[float], float], h0: float, con: float = 1.4, ntab: int = 12):
    """Richardson tableau over central-difference estimates with shrinking h."""
    con2 = con * con
    a = [[0.0] * ntab for _ in range(ntab)]
    hh = h0
    a[0][0] = estimate(hh)
    best, err = a[0][0], math.inf
    for i in range(1, ntab):
        hh /= con
        a[0][i] = estimate(hh)
        fac = con2
        for j in range(1, i + 1):
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j][i] - a[j - 1][i]), abs(a[j][i] - a[j - 1][i - 1]))
            if errt <= err:
                err, best = errt, a[j][i]
        if abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err:
            break
    return best, err


def derivative(fn: Callable[[float], float], x: float, order: int = 1,
               h0: Optional[float] = None) -> float:
    """First or second derivative of ``fn`` at ``x`` by extrapolated central differences.

    Starting steps that cross a domain boundary are shrunk until every sample
    evaluates; the estimate with the smallest error bound wins.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    h = h0 if h0 is not None else 0.05 * (1.0 + abs(x))
    f0 = fn(x) if order == 2 else 0.0

    def estimate(hh):
        if order == 1:
            return (fn(x + hh) - fn(x - hh)) / (2 * hh)
        return (fn(x + hh) - 2 * f0 + fn(x - hh)) / (hh * hh)

    best, best_err = None, math.inf
    for _ in range(8):
        try:
            value, err = _ridders(estimate, h)
        except (EvaluationError, ZeroDivisionError, OverflowError):
            h /= 8
            continue
        if err < best_err:
            best, best_err = value, err
        if err <= 1e-11 * (1.0 + abs(value)):
            break
        h /= 8
    if best is None:
        raise EvaluationError(f"cannot differentiate numerically at x={x!r}")
    return best


def central_difference(fn: Callable[[float], float], x: float, step: float) -> float:
    hh = step * (1.0 + abs(x))
    return (fn(x + hh) - fn(x - hh)) / (2 * hh)


def sample_points(a: float, b: float, n: int = 64) -> list:
    if n == 1:
        return [a]
    return [a + (b - a) * k / (n - 1) for k in range(n)]


def _candidate_function(candidate) -> Callable[[float], float]:
    if isinstance(candidate, Expr):
        return lambda x: evaluate(candidate, {"x": x})
    if isinstance(candidate, Trajectory):
        return candidate.interpolate
    return candidate


def first_order_residual(candidate, rhs, xs: Sequence[float], step: Optional[float] = None,
                         relative: bool = False) -> float:
    """max |y'(x) - rhs(x, y(x))| over ``xs``.

    With ``relative`` each term is divided by max(1, |rhs|), so large slopes
    near a singularity are judged against their own size.
    """
    y = _candidate_function(candidate)
    if isinstance(rhs, Expr):
        rhs = rhs_from_expr(rhs)
    worst = 0.0
    for x in xs:
        dy = central_difference(y, x, step) if step else derivative(y, x)
        f = rhs(x, y(x))
        err = abs(dy - f)
        if relative:
            err /= max(1.0, abs(f))
        worst = max(worst, err)
    return worst


def residual_check(candidate, ivp: Ivp, n: int = 64, step: Optional[float] = None) -> float:
    """Largest |y'(x) - f(x, y(x))| over ``n`` uniform points of [x0, x_end].

    ``candidate`` may be an expression in x, a callable or a Trajectory (linearly
    interpolated).  With ``step`` a plain central difference of that relative
    step is used; otherwise an extrapolated difference.
    """
    return first_order_residual(candidate, ivp.f, sample_points(ivp.x0, ivp.x_end, n), step)


def linear_residual(candidate, p, q, r, xs: Sequence[float], relative: bool = False) -> float:
    """max |y'' + p y' + q y - r| over ``xs`` with p, q, r expressions or callables in x.

    With ``relative`` each term is divided by max(1, |y''|, |p y'|, |q y|, |r|).
    """
    y = _candidate_function(candidate)
    p, q, r = (_candidate_function(c) for c in (p, q, r))
    worst = 0.0
    for x in xs:
        d1 = derivative(y, x, 1)
        d2 = derivative(y, x, 2)
        parts = (d2, p(x) * d1, q(x) * y(x), r(x))
        err = abs(parts[0] + parts[1] + parts[2] - parts[3])
        if relative:
            err /= max(1.0, *(abs(v) for v in parts))
        worst = max(worst, err)
    return worst
