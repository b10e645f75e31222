from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vm3bp.odecore import IntegratorSettings, integrate, sample, sample_derivative


def exp_growth(t, y):
    return y


def test_settings_reject_bad_values():
    with pytest.raises(ValueError):
        IntegratorSettings(rtol=0.0)
    with pytest.raises(ValueError):
        IntegratorSettings(atol=-1.0)
    with pytest.raises(ValueError):
        IntegratorSettings(initial_step=1.0, max_step=0.5)
    with pytest.raises(ValueError):
        IntegratorSettings(max_steps=0)


def test_constant_rhs_gives_constant_solution():
    sol = integrate(lambda t, y: np.zeros_like(y), [3.5, -2.0], (0.0, 7.0))
    assert sol.status == "completed"
    assert np.all(sol.y == np.array([3.5, -2.0]))
    assert np.all(sample(sol, np.linspace(0, 7, 33)) == np.array([3.5, -2.0]))


def test_exponential_at_one_within_ten_rtol():
    s = IntegratorSettings()
    sol = integrate(exp_growth, [1.0], (0.0, 1.0), s)
    assert abs(sol.y[-1, 0] - math.e) < 10 * s.rtol
    assert sol.t[-1] == 1.0


def test_dense_output_midpoint():
    s = IntegratorSettings()
    sol = integrate(exp_growth, [1.0], (0.0, 1.0), s)
    assert abs(sample(sol, 0.5)[0] - math.exp(0.5)) < 10 * s.rtol


def test_interpolant_derivative_tracks_rhs():
    s = IntegratorSettings()
    sol = integrate(exp_growth, [1.0], (0.0, 1.0), s)
    t = np.linspace(0, 1, 57)
    assert np.max(np.abs(sample_derivative(sol, t)[:, 0] - np.exp(t))) < 100 * s.rtol


def test_sample_at_step_endpoints_is_exact():
    sol = integrate(exp_growth, [1.0], (0.0, 2.0))
    for t, y in zip(sol.t, sol.y):
        assert np.array_equal(sample(sol, float(t)), y)
    assert np.array_equal(sample(sol, sol.t), sol.y)


def test_sample_between_nodes_of_monotone_solution():
    sol = integrate(exp_growth, [1.0], (0.0, 3.0))
    mids = 0.5 * (sol.t[:-1] + sol.t[1:])
    vals = sample(sol, mids)[:, 0]
    assert np.all(vals > sol.y[:-1, 0]) and np.all(vals < sol.y[1:, 0])


def test_sample_out_of_span_raises():
    sol = integrate(exp_growth, [1.0], (0.0, 1.0))
    with pytest.raises(ValueError):
        sample(sol, 1.5)
    with pytest.raises(ValueError):
        sample(sol, np.array([0.2, -0.1]))


def test_times_strictly_increasing():
    sol = integrate(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 20.0))
    assert np.all(np.diff(sol.t) > 0)


def test_harmonic_oscillator_accuracy():
    sol = integrate(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 20.0))
    t = np.linspace(0, 20, 401)
    assert np.max(np.abs(sample(sol, t)[:, 0] - np.cos(t))) < 1e-8


def test_deterministic_bitwise():
    rhs = lambda t, y: np.array([y[1], -math.sin(y[0])])  # noqa: E731
    a = integrate(rhs, [2.0, 0.0], (0.0, 15.0))
    b = integrate(rhs, [2.0, 0.0], (0.0, 15.0))
    for f in ("t", "y", "h", "coeffs"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_linear_crossing_event_within_event_tolerance():
    s = IntegratorSettings()

    def hit(t, y):
        return y[0] - 0.3

    sol = integrate(lambda t, y: np.array([1.0]), [0.0], (0.0, 1.0), s, events=[hit])
    assert sol.status == "event-stopped"
    assert abs(sol.t_event - 0.3) < s.event_tol
    assert sol.t[-1] == sol.t_event


def test_event_direction_filters_crossings():
    def down(t, y):
        return y[0]

    down.direction = -1
    # sin starts at 0 going up: the first downward crossing is at pi
    sol = integrate(lambda t, y: np.array([y[1], -y[0]]), [1e-300, 1.0], (0.0, 5.0), events=[down])
    assert sol.status == "event-stopped"
    assert abs(sol.t_event - math.pi) < 1e-9


def test_step_underflow_reports_failure():
    # y' = y^2 blows up at t = 1
    sol = integrate(lambda t, y: y * y, [1.0], (0.0, 2.0))
    assert sol.status == "step-failure"
    assert not sol.success
    assert sol.t[-1] < 1.0 and sol.t[-1] > 0.99


def test_max_steps_reports_failure():
    sol = integrate(exp_growth, [1.0], (0.0, 10.0), IntegratorSettings(max_steps=3))
    assert sol.status == "step-failure"
    assert "maximum" in sol.message
    assert sol.n_steps == 3


def test_rejects_empty_span_and_nonfinite_start():
    with pytest.raises(ValueError):
        integrate(exp_growth, [1.0], (1.0, 1.0))
    with pytest.raises(ValueError):
        integrate(lambda t, y: np.array([math.nan]), [1.0], (0.0, 1.0))


def test_halving_tolerances_halves_global_error():
    s = IntegratorSettings()
    e1 = abs(integrate(exp_growth, [1.0], (0.0, 1.0), s).y[-1, 0] - math.e)
    e2 = abs(integrate(exp_growth, [1.0], (0.0, 1.0), s.scaled(0.5)).y[-1, 0] - math.e)
    assert e1 / e2 >= 2.0, f"ratio {e1 / e2:.4f}"


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(-2.0, 2.0), y0=st.floats(-5.0, 5.0).filter(lambda v: abs(v) > 1e-3),
       t1=st.floats(0.1, 3.0))
def test_linear_decay_property(lam, y0, t1):
    sol = integrate(lambda t, y: lam * y, [y0], (0.0, t1))
    exact = y0 * math.exp(lam * t1)
    assert abs(sol.y[-1, 0] - exact) <= 1e-8 * max(1.0, abs(exact))
