"""Embedded Dormand-Prince 5(4) integrator for small smooth systems.

Plain-Python implementation over tuple states, tuned for the two- and
three-dimensional fields this package integrates.  Features:

* proportional-integral step-size control on the embedded error estimate,
* the free quartic dense-output interpolant of the 5(4) pair,
* event functions located by root-finding on the dense output,
* per-step monitors that may stop the run at an interpolated time.

The interpolation coefficients are the standard ones published for this
pair; events are resolved with scipy's brentq on the dense polynomial.

References
----------
.. [1] Dormand, Prince, "A family of embedded Runge-Kutta formulae",
       J. Comp. Appl. Math. 6 (1980).
.. [2] Hairer, Norsett, Wanner, "Solving Ordinary Differential
       Equations I", 2nd ed., Springer (1993), sections II.4-II.6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from scipy.optimize import brentq

__all__ = ["StepFailed", "Termination", "Event", "OdeSolution", "integrate_ode"]

# Butcher tableau ------------------------------------------------------

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)

A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)

B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)

# error weights: 5th order minus embedded 4th order
E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

# dense-output polynomial, columns are theta^1..theta^4 weights per stage
P_DENSE = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


class StepFailed(RuntimeError):
    """Step size underflowed; carries the time and state where it happened."""

    def __init__(self, t: float, y: tuple, message: str):
        super().__init__(f"{message} at t={t:.6g}, y={y}")
        self.t = t
        self.y = y


class Termination(Enum):
    TIME_LIMIT = "time_limit"
    EVENT = "event"
    MONITOR = "monitor"


@dataclass
class Event:
    """Scalar event g(t, y) located where it crosses zero.

    direction > 0 triggers only on increasing crossings, < 0 only on
    decreasing ones, 0 on both.  ``terminal`` stops the integration; the
    optional ``accept`` predicate can veto a located crossing (e.g. to
    enforce a half-plane condition), in which case integration continues.
    """

    func: Callable[[float, tuple], float]
    direction: int = 0
    terminal: bool = True
    accept: Callable[[float, tuple], bool] | None = None


@dataclass
class DenseStep:
    t0: float
    h: float
    y0: tuple
    k: tuple  # 7 stage derivative tuples

    def __call__(self, t: float) -> tuple:
        theta = (t - self.t0) / self.h
        th2 = theta * theta
        w = [
            theta * p[0] + th2 * p[1] + th2 * theta * p[2] + th2 * th2 * p[3]
            for p in P_DENSE
        ]
        n = len(self.y0)
        return tuple(
            self.y0[i] + self.h * sum(w[s] * self.k[s][i] for s in range(7))
            for i in range(n)
        )


@dataclass
class OdeSolution:
    t: list[float]
    y: list[tuple]
    status: Termination
    t_final: float
    y_final: tuple
    event_index: int | None = None
    monitor_label: str | None = None
    n_steps: int = 0
    n_rejected: int = 0
    dense: list[DenseStep] = field(default_factory=list)


def _error_norm(y0: tuple, y1: tuple, err: tuple, rtol: float, atol: float) -> float:
    acc = 0.0
    for a, b, e in zip(y0, y1, err):
        sc = atol + rtol * max(abs(a), abs(b))
        acc += (e / sc) ** 2
    return math.sqrt(acc / len(y0))


def _initial_step(f, t0, y0, f0, rtol, atol, direction):
    # standard two-trial heuristic (Hairer I.4.14)
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = tuple(y + direction * h0 * fv for y, fv in zip(y0, f0))
    f1 = f(t0 + direction * h0, y1)
    d2 = (
        math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / len(y0))
        / h0
    )
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate_ode(
    f: Callable[[float, tuple], tuple],
    t_span: tuple[float, float],
    y0: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    events: Sequence[Event] = (),
    monitors: Sequence[
        Callable[[float, float, tuple, tuple, DenseStep], tuple | None]
    ] = (),
    max_step: float = math.inf,
    first_step: float | None = None,
    record: bool = True,
    keep_dense: bool = False,
    max_steps: int = 2_000_000,
) -> OdeSolution:
    """Integrate y' = f(t, y) over t_span with adaptive 5(4) stepping.

    ``monitors`` are called after each accepted step with
    (t0, t1, y_old, y_new, dense) and may return (t_stop, y_stop, label)
    to terminate.  Integration direction follows sign(t1 - t0).
    """
    t0, t1 = t_span
    direction = 1.0 if t1 >= t0 else -1.0
    t = t0
    y = tuple(float(v) for v in y0)
    k1 = f(t, y)
    h = first_step if first_step is not None else _initial_step(
        f, t0, y, k1, rtol, atol, direction
    )
    h = min(h, max_step, abs(t1 - t0) or 1e-16)
    sol = OdeSolution(t=[t], y=[y], status=Termination.TIME_LIMIT, t_final=t, y_final=y)
    if not record:
        sol.t, sol.y = [], []
    g_prev = [ev.func(t, y) for ev in events]
    err_prev = 1.0
    safety, min_factor, max_factor = 0.9, 0.2, 6.0
    n_acc = n_rej = 0

    while direction * (t1 - t) > 0:
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepFailed(t, y, "step size underflow")
        h = min(h, abs(t1 - t), max_step)
        hs = direction * h

        k = [k1]
        for s in range(1, 7):
            ys = tuple(
                y[i] + hs * sum(A[s][j] * k[j][i] for j in range(s))
                for i in range(len(y))
            )
            k.append(f(t + C[s] * hs, ys))
        y_new = ys  # stage 7 evaluates at the 5th-order solution (FSAL)
        err = tuple(
            hs * sum(E[s] * k[s][i] for s in range(7)) for i in range(len(y))
        )
        enorm = _error_norm(y, y_new, err, rtol, atol)

        if enorm > 1.0:
            n_rej += 1
            h *= max(min_factor, safety * enorm ** -0.2)
            k1 = k[0]
            continue

        # accepted
        n_acc += 1
        t_new = t + hs
        dense = DenseStep(t, hs, y, tuple(k))
        stop: tuple[float, tuple, Termination, int | None, str | None] | None = None

        for idx, ev in enumerate(events):
            g_new = ev.func(t_new, y_new)
            g_old = g_prev[idx]
            crossed = (
                (g_old < 0.0 <= g_new and ev.direction >= 0)
                or (g_old > 0.0 >= g_new and ev.direction <= 0)
            ) and g_old != g_new
            if crossed:
                if g_new == 0.0:
                    t_ev = t_new
                else:
                    t_ev = brentq(
                        lambda tt: ev.func(tt, dense(tt)),
                        t,
                        t_new,
                        xtol=1e-15 * max(1.0, abs(t_new)),
                        rtol=8.9e-16,
                    )
                y_ev = dense(t_ev)
                if ev.accept is None or ev.accept(t_ev, y_ev):
                    if ev.terminal and (stop is None or direction * (t_ev - stop[0]) < 0):
                        stop = (t_ev, y_ev, Termination.EVENT, idx, None)
            g_prev[idx] = g_new

        if stop is None:
            for mon in monitors:
                res = mon(t, t_new, y, y_new, dense)
                if res is not None:
                    t_m, y_m, label = res
                    if stop is None or direction * (t_m - stop[0]) < 0:
                        stop = (t_m, y_m, Termination.MONITOR, None, label)

        if stop is not None:
            t_f, y_f, status, ev_idx, label = stop
            if record:
                sol.t.append(t_f)
                sol.y.append(y_f)
            if keep_dense:
                sol.dense.append(dense)
            sol.status = status
            sol.event_index = ev_idx
            sol.monitor_label = label
            sol.t_final, sol.y_final = t_f, y_f
            sol.n_steps, sol.n_rejected = n_acc, n_rej
            return sol

        t, y, k1 = t_new, y_new, k[6]
        if record:
            sol.t.append(t)
            sol.y.append(y)
        if keep_dense:
            sol.dense.append(dense)
        if n_acc + n_rej > max_steps:
            raise StepFailed(t, y, "step budget exhausted")

        # PI controller (Gustafsson): combine current and previous error
        factor = safety * enorm ** -0.14 * err_prev ** 0.08 if enorm > 0 else max_factor
        h *= min(max_factor, max(min_factor, factor))
        err_prev = max(enorm, 1e-10)

    sol.status = Termination.TIME_LIMIT
    sol.t_final, sol.y_final = t, y
    sol.n_steps, sol.n_rejected = n_acc, n_rej
    return sol
