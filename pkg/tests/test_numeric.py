import math
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from odekit.errors import GridError, NumericBlowup
from odekit.expr import parse
from odekit.numeric import (
    Ivp, Method, error_report, estimate_order, euler_step, improved_euler_step, integrate_fixed,
    linear_test_factor, residual_check, rk4_step, step_count,
)

from tables import STEPS, last_digit_unit, load_rows

EXACT = parse("exp(-6*x)")


def decay(x_end=1.0):
    return Ivp(parse("-6*y"), 0.0, 1.0, x_end)


def f_decay(x, y):
    return -6.0 * y


class Counter:
    def __init__(self, f):
        self.f = f
        self.calls = 0
        self.lock = threading.Lock()

    def __call__(self, x, y):
        with self.lock:
            self.calls += 1
        return self.f(x, y)


# -- steppers -------------------------------------------------------------------------

def test_euler_step_value():
    assert abs(euler_step(f_decay, 0.0, 1.0, 0.1) - 0.4) < 1e-15


def test_euler_two_half_steps():
    y = euler_step(f_decay, 0.0, 1.0, 0.05)
    assert abs(y - 0.7) < 1e-15
    assert abs(euler_step(f_decay, 0.05, y, 0.05) - 0.49) < 1e-15


def test_improved_euler_step_value():
    assert abs(improved_euler_step(f_decay, 0.0, 1.0, 0.1) - 0.58) < 1e-15


def test_improved_euler_is_trapezoid_for_x_only():
    g = lambda x, y: math.cos(x)
    h = 0.2
    assert improved_euler_step(g, 0.3, 2.0, h) == 2.0 + h / 2 * (math.cos(0.3) + math.cos(0.5))


def test_rk4_step_value():
    assert abs(rk4_step(f_decay, 0.0, 1.0, 0.1) - 0.5494) < 1e-15


def test_rk4_two_half_steps():
    y = rk4_step(f_decay, 0.0, 1.0, 0.05)
    assert abs(rk4_step(f_decay, 0.05, y, 0.05) - 0.548840201406250) < 1e-15


@pytest.mark.parametrize("step", [euler_step, improved_euler_step, rk4_step])
def test_zero_field_is_identity(step):
    assert step(lambda x, y: 0.0, 0.4, 3.25, 0.1) == 3.25


@pytest.mark.parametrize("step, calls", [(euler_step, 1), (improved_euler_step, 2), (rk4_step, 4)])
def test_evaluation_count(step, calls):
    f = Counter(f_decay)
    step(f, 0.0, 1.0, 0.1)
    assert f.calls == calls


def test_rk4_stage_abscissae():
    seen = []
    rk4_step(lambda x, y: seen.append(x) or 0.0, 1.0, 0.0, 0.2)
    assert seen == [1.0, 1.1, 1.1, 1.2]


# -- trajectories --------------------------------------------------------------------------

def test_grid_is_multiplicative():
    t = integrate_fixed(decay(), "euler", 0.1)
    assert t.xs == tuple(r * 0.1 for r in range(11))
    assert t.points[0] == (0.0, 1.0)


def test_grid_reproduces_printed_abscissae():
    for h in STEPS:
        t = integrate_fixed(decay(), "rk4", h)
        k = round(0.1 / h)
        assert [f"{x:.1f}" for x in t.xs[::k]] == [f"{0.1 * i:.1f}" for i in range(11)]


def test_table_three_values():
    assert abs(integrate_fixed(decay(), "euler", 0.01).value_at(0.1) - 0.538615114094900) < 1e-15
    assert abs(integrate_fixed(decay(), "rk4", 0.01).value_at(0.1) - 0.548811673481706) < 1e-15


def test_single_step_problem():
    t = integrate_fixed(decay(0.1), "rk4", 0.1)
    assert len(t.xs) == 2 and t.ys[1] == rk4_step(f_decay, 0.0, 1.0, 0.1)


def test_inexact_step_count_is_noted():
    t = integrate_fixed(decay(1.0), "euler", 0.3)
    assert len(t.xs) == 4 and "not an integer" in t.note


def test_step_count_limits():
    assert step_count(0.0, 1.0, 0.1) == (10, True)
    with pytest.raises(GridError):
        step_count(0.0, 1.0, 1e-9)
    with pytest.raises(GridError):
        step_count(0.0, 1.0, -0.1)


def test_ivp_validation():
    with pytest.raises(ValueError):
        Ivp(parse("-6*y"), 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        Ivp(parse("ln(x)"), 0.0, 1.0, 1.0)


def test_blowup_reports_step():
    ivp = Ivp(parse("y^2"), 0.0, 1.0, 2.0)
    with pytest.raises(NumericBlowup) as info:
        integrate_fixed(ivp, "rk4", 0.1)
    assert 0 < info.value.step < 20


@pytest.mark.parametrize("h", STEPS)
def test_linear_test_equation_closed_forms(h):
    for method in Method:
        t = integrate_fixed(decay(), method, h)
        g = linear_test_factor(method, -6.0 * h)
        for r, y in enumerate(t.ys):
            assert abs(y - g ** r) <= 1e-13 * abs(g ** r)


def test_deterministic_across_threads():
    ref = {(m, h): integrate_fixed(decay(), m, h).ys for m in Method for h in STEPS}
    jobs = [(m, h) for m in Method for h in STEPS] * 4
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda job: (job, integrate_fixed(decay(), *job).ys), jobs))
    for job, ys in results:
        assert ys == ref[job]


# -- error tables -----------------------------------------------------------------------------

@pytest.mark.parametrize("row", load_rows(), ids=lambda r: f"h{r['h']}-x{r['x']}")
def test_published_rows(row):
    h, x = float(row["h"]), float(row["x"])
    ivp = decay()
    for method in ("euler", "rk4"):
        t = integrate_fixed(ivp, method, h)
        report = error_report(t, EXACT, [x])
        got = report.rows[0]
        assert abs(got.approx - float(row[method])) < 1e-12
        # the exact column is printed truncated to 15 decimals
        assert abs(got.exact - float(row["exact"])) < 1e-15
        printed_err = float(row[f"{method}_abs_err"])
        derived = abs(float(row["exact"]) - float(row[method]))
        assert abs(got.abs_error - derived) < 1e-12
        assert abs(got.abs_error - printed_err) <= last_digit_unit(row[f"{method}_abs_err"])


def test_error_report_examples():
    e = error_report(integrate_fixed(decay(), "euler", 0.1), EXACT, [0.1]).rows[0]
    assert abs(e.abs_error - 0.148811636) < 1e-9
    r = error_report(integrate_fixed(decay(), "rk4", 0.05), EXACT, [0.1]).rows[0]
    assert abs(r.abs_error - 2.85653e-5) < 1e-10


def test_error_report_against_itself():
    t = integrate_fixed(decay(), "euler", 0.1)
    report = error_report(t, t.value_at)
    assert report.max_error == 0.0


def test_off_grid_abscissa():
    with pytest.raises(GridError):
        error_report(integrate_fixed(decay(), "euler", 0.1), EXACT, [0.15])


def test_monotone_error_decay_and_dominance():
    errs = {m: [error_report(integrate_fixed(decay(), m, h), EXACT).max_error for h in STEPS] for m in Method}
    for m in Method:
        assert errs[m][0] > errs[m][1] > errs[m][2]
    for i in range(3):
        assert errs[Method.RK4][i] < errs[Method.IMPROVED_EULER][i] < errs[Method.EULER][i]


# -- convergence orders ---------------------------------------------------------------------

def test_order_from_two_steps():
    assert abs(estimate_order(decay(), "euler", [0.1, 0.05], EXACT).estimated_order - 1.28) < 0.01
    assert abs(estimate_order(decay(), "rk4", [0.1, 0.05], EXACT).estimated_order - 4.37) < 0.01


def test_zero_field_gives_infinite_order():
    ivp = Ivp(parse("0"), 0.0, 2.0, 1.0)
    assert estimate_order(ivp, "euler", [0.1, 0.05], lambda x: 2.0).estimated_order == math.inf


def test_order_needs_halving():
    with pytest.raises(ValueError):
        estimate_order(decay(), "euler", [0.1, 0.03], EXACT)


# -- residual checks ----------------------------------------------------------------------------

def test_residual_of_exact_solution():
    assert residual_check(EXACT, decay()) < 1e-9


def test_residual_of_wrong_candidate():
    assert abs(residual_check(lambda x: 1.0, decay()) - 6.0) < 1e-9


def test_residual_of_interpolated_trajectory():
    t = integrate_fixed(decay(), "rk4", 0.001)
    res = residual_check(t, decay(), step=1e-6)
    assert 1e-3 < res < 0.02
