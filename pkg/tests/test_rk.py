"""Adaptive Runge-Kutta integrator: accuracy, events, dense output."""

import math

import pytest

from hlbif.rk import Event, StepFailed, Termination, integrate_ode


def test_exponential_growth_high_accuracy():
    sol = integrate_ode(lambda t, y: (y[0],), (0.0, 1.0), (1.0,),
                        rtol=1e-10, atol=1e-13)
    assert sol.status is Termination.TIME_LIMIT
    assert sol.y_final[0] == pytest.approx(math.e, abs=1e-9)


def test_harmonic_oscillator_energy_conserved():
    sol = integrate_ode(
        lambda t, y: (y[1], -y[0]), (0.0, 20.0), (1.0, 0.0),
        rtol=1e-10, atol=1e-12,
    )
    energy = sol.y_final[0] ** 2 + sol.y_final[1] ** 2
    assert energy == pytest.approx(1.0, abs=1e-7)
    assert sol.y_final[0] == pytest.approx(math.cos(20.0), abs=1e-7)


def test_backward_integration():
    sol = integrate_ode(lambda t, y: (y[0],), (1.0, 0.0), (math.e,),
                        rtol=1e-10, atol=1e-13)
    assert sol.t_final == 0.0
    assert sol.y_final[0] == pytest.approx(1.0, abs=1e-8)


def test_event_located_precisely():
    ev = Event(func=lambda t, y: y[0] - 0.5, direction=1)
    sol = integrate_ode(lambda t, y: (1.0,), (0.0, 2.0), (0.0,), events=[ev])
    assert sol.status is Termination.EVENT
    assert sol.event_index == 0
    assert sol.t_final == pytest.approx(0.5, abs=1e-10)


def test_event_direction_filter():
    # y = sin t crosses zero downward first at t = pi
    ev = Event(func=lambda t, y: y[0], direction=-1)
    sol = integrate_ode(
        lambda t, y: (math.cos(t),), (0.1, 10.0), (math.sin(0.1),),
        events=[ev], rtol=1e-10, atol=1e-12,
    )
    assert sol.t_final == pytest.approx(math.pi, abs=1e-8)


def test_event_accept_veto_skips_crossing():
    # veto the first crossing (t = pi), accept the second (t = 2 pi)
    ev = Event(func=lambda t, y: y[0], direction=0,
               accept=lambda t, y: t > 4.0)
    sol = integrate_ode(
        lambda t, y: (math.cos(t),), (0.1, 10.0), (math.sin(0.1),),
        events=[ev], rtol=1e-10, atol=1e-12,
    )
    assert sol.t_final == pytest.approx(2 * math.pi, abs=1e-8)


def test_nonterminal_event_records_and_continues():
    ev = Event(func=lambda t, y: y[0] - 0.5, direction=1, terminal=False)
    sol = integrate_ode(lambda t, y: (1.0,), (0.0, 2.0), (0.0,), events=[ev])
    assert sol.status is Termination.TIME_LIMIT
    assert sol.t_final == 2.0


def test_dense_output_matches_solution_mid_step():
    sol = integrate_ode(lambda t, y: (y[0],), (0.0, 1.0), (1.0,),
                        rtol=1e-10, atol=1e-13, keep_dense=True)
    assert sol.dense
    step = sol.dense[len(sol.dense) // 2]
    tm = step.t0 + 0.37 * step.h
    assert step(tm)[0] == pytest.approx(math.exp(tm), rel=1e-8)


def test_monitor_can_terminate():
    def monitor(t0, t1, y_old, y_new, dense):
        if y_new[0] > 2.0:
            return (t1, y_new, "threshold")
        return None

    sol = integrate_ode(lambda t, y: (y[0],), (0.0, 5.0), (1.0,),
                        monitors=[monitor])
    assert sol.status is Termination.MONITOR
    assert sol.monitor_label == "threshold"
    assert sol.t_final < 5.0


def test_finite_time_blowup_raises_step_failed():
    with pytest.raises(StepFailed):
        integrate_ode(lambda t, y: (y[0] * y[0],), (0.0, 10.0), (1.0,),
                      max_steps=200_000)


def test_step_counters_populated():
    sol = integrate_ode(lambda t, y: (math.sin(10 * t) * y[0],),
                        (0.0, 3.0), (1.0,))
    assert sol.n_steps > 0
    assert sol.n_steps >= len(sol.t) - 1
