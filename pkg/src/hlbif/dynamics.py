"""Trajectory machinery for the model.

Adaptive integration with window/convergence/closed-orbit stopping,
Poincare return maps on rays, limit-cycle detection with Floquet
multipliers, saddle separatrices, and the separatrix-splitting
measurement used to locate homoclinic loops.

The strip system divides by x, so trajectories that brush the y-axis are
continued in the equivalent polynomial system (same orbits, time
rescaled by 1/x); original-system time is recovered along the way by
quadrature, making the reported times seamless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .model import (
    DomainError,
    Equilibrium,
    EquilibriumClass,
    Params,
    State,
    jacobian_entries,
    solve_equilibria,
)
from .rk import DenseStep, Event, StepFailed, Termination, integrate_ode

__all__ = [
    "TrajectoryEnd",
    "Trajectory",
    "LimitCycle",
    "CycleStability",
    "PoincareSection",
    "NoReturn",
    "NotASaddle",
    "NoCrossing",
    "SeparatrixSet",
    "integrate",
    "poincare_map",
    "find_limit_cycles",
    "separatrices",
    "loop_defect",
    "loop_crossings",
    "PI_WINDOW",
]

PI_WINDOW = ((0.0, 1.0), (0.0, math.inf))  # the invariant strip


class TrajectoryEnd(Enum):
    TIME_LIMIT = "time_limit"
    LEFT_WINDOW = "left_window"
    CONVERGED_TO_POINT = "converged_to_point"
    CLOSED_ORBIT = "closed_orbit"


class NoReturn(RuntimeError):
    """The trajectory never came back to the section."""


class NotASaddle(DomainError):
    pass


class NoCrossing(RuntimeError):
    """A separatrix missed the transversal."""


@dataclass
class Trajectory:
    times: list[float]
    states: list[State]
    terminated: TrajectoryEnd

    @property
    def final(self) -> State:
        return self.states[-1]


class CycleStability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NEUTRAL = "neutral"


@dataclass
class LimitCycle:
    section_point: State
    period: float
    floquet_multiplier: float
    stability: CycleStability
    orbit: list[State]
    radius: float = 0.0  # distance from the scan anchor along the scan ray


@dataclass(frozen=True)
class PoincareSection:
    """Ray from an anchor point (an antisaddle) along a unit direction."""

    anchor: State
    direction: tuple[float, float]

    def point_at(self, r: float) -> State:
        return State(
            x=self.anchor.x + r * self.direction[0],
            y=self.anchor.y + r * self.direction[1],
        )

    def radius_of(self, s) -> float:
        dx, dy = s[0] - self.anchor.x, s[1] - self.anchor.y
        return dx * self.direction[0] + dy * self.direction[1]

    def offset_of(self, s) -> float:
        dx, dy = s[0] - self.anchor.x, s[1] - self.anchor.y
        return -dx * self.direction[1] + dy * self.direction[0]


# ----------------------------------------------------------------------
# fields


def _field(p: Params):
    a, beta, delta = p.a, p.beta, p.delta

    def f(t, s):
        x, y = s
        return (
            x * (1.0 - x) - x * y / (a + x * x),
            y * (delta - beta * y / x),
        )

    return f


def _field_rescaled_timed(p: Params):
    """Polynomial field with the original-system clock appended."""
    a, beta, delta = p.a, p.beta, p.delta

    def f(t, s):
        x, y = s[0], s[1]
        return (
            x * x * (1.0 - x) - x * x * y / (a + x * x),
            delta * x * y - beta * y * y,
            x,  # d(original time)/d(rescaled time)
        )

    return f


def _divergence(p: Params):
    a, beta, delta = p.a, p.beta, p.delta

    def div(x, y):
        return (
            1.0
            - 2.0 * x
            - y * (a - x * x) / (a + x * x) ** 2
            + delta
            - 2.0 * beta * y / x
        )

    return div


# ----------------------------------------------------------------------
# monitors


def _window_monitor(window):
    (x_lo, x_hi), (y_lo, y_hi) = window

    def inside(s) -> bool:
        return x_lo < s[0] < x_hi and y_lo < s[1] < y_hi

    def monitor(t_prev, t_new, y_prev, y_new, dense: DenseStep):
        if inside(y_new):
            return None
        # earliest bound crossing within the step
        t_hit = t_new
        for idx, bound, sgn in (
            (0, x_lo, -1),
            (0, x_hi, +1),
            (1, y_lo, -1),
            (1, y_hi, +1),
        ):
            if not math.isfinite(bound):
                continue
            g_prev = sgn * (y_prev[idx] - bound)
            g_new = sgn * (y_new[idx] - bound)
            if g_prev < 0.0 <= g_new:
                lo, hi = t_prev, t_new
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if sgn * (dense(mid)[idx] - bound) < 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-12 * max(1.0, abs(t_new)):
                        break
                t_hit = min(t_hit, hi)
        return (t_hit, dense(t_hit), "left_window")

    monitor.inside = inside
    return monitor


def _convergence_monitor(f, tol: float, targets: tuple = ()):
    """Stop when the field is numerically zero, or when the state enters a
    tight ball around a known attracting equilibrium (the discrete RK map
    jitters at the tolerance floor near a focus and the raw field-norm
    criterion can starve there)."""

    def monitor(t_prev, t_new, y_prev, y_new, dense):
        dy = f(t_new, y_new)
        if max(abs(v) for v in dy[:2]) < tol:
            return (t_new, y_new, "converged")
        for ex, ey in targets:
            if math.hypot(y_new[0] - ex, y_new[1] - ey) < 1e-8:
                snapped = (ex, ey) + tuple(y_new[2:])
                return (t_new, snapped, "converged")
        return None

    return monitor


def _attractor_points(p: Params) -> tuple:
    pts = []
    for e in solve_equilibria(p):
        if e.det_j > 0.0 and e.tr_j < 0.0:
            pts.append((e.x0, e.y0))
    return tuple(pts)


class _ClosedOrbitMonitor:
    """Grid-hashed epsilon-tube recurrence test with a winding guard.

    A state is declared recurrent when it comes within ``eps`` of a state
    recorded at least one full turning of the velocity direction earlier,
    with aligned velocity.
    """

    def __init__(self, f, eps: float = 1e-7):
        self.f = f
        self.eps = eps
        self.cell = 8.0 * eps
        self.grid: dict[tuple[int, int], list[int]] = {}
        self.pts: list[tuple[float, float]] = []
        self.winding: list[float] = []
        self.turn = 0.0
        self.prev_dir: tuple[float, float] | None = None

    def _key(self, s) -> tuple[int, int]:
        return (int(math.floor(s[0] / self.cell)), int(math.floor(s[1] / self.cell)))

    def __call__(self, t_prev, t_new, y_prev, y_new, dense):
        v = self.f(t_new, y_new)
        nv = math.hypot(v[0], v[1])
        if nv < 1e-9:
            # near-equilibrium crawl: directions are noise there, and no
            # limit cycle moves this slowly; leave it to the convergence stop
            return None
        d = (v[0] / nv, v[1] / nv)
        if self.prev_dir is not None:
            cross = self.prev_dir[0] * d[1] - self.prev_dir[1] * d[0]
            dot = self.prev_dir[0] * d[0] + self.prev_dir[1] * d[1]
            self.turn += math.atan2(cross, dot)
        self.prev_dir = d

        kx, ky = self._key(y_new)
        hit = None
        if abs(self.turn) > 1.9 * math.pi:
            for nx in (kx - 1, kx, kx + 1):
                for ny in (ky - 1, ky, ky + 1):
                    for idx in self.grid.get((nx, ny), ()):
                        if abs(self.turn - self.winding[idx]) < 1.9 * math.pi:
                            continue  # not a full loop apart yet
                        q = self.pts[idx]
                        if math.hypot(q[0] - y_new[0], q[1] - y_new[1]) < self.eps:
                            w = self.f(t_new, q)
                            nw = math.hypot(w[0], w[1])
                            # matching direction AND speed: a contracting
                            # spiral shrinks speed lap over lap, a true
                            # closed orbit does not
                            if (
                                w[0] * v[0] + w[1] * v[1] > 0.0
                                and abs(nw - nv) <= 1e-3 * max(nw, nv)
                            ):
                                hit = (t_new, y_new, "closed_orbit")
                                break
                    if hit:
                        break
                if hit:
                    break
        idx = len(self.pts)
        self.pts.append((y_new[0], y_new[1]))
        self.winding.append(self.turn)
        self.grid.setdefault((kx, ky), []).append(idx)
        return hit


# ----------------------------------------------------------------------
# integration with origin rescue


_END_BY_LABEL = {
    "left_window": TrajectoryEnd.LEFT_WINDOW,
    "converged": TrajectoryEnd.CONVERGED_TO_POINT,
    "closed_orbit": TrajectoryEnd.CLOSED_ORBIT,
}


def integrate(
    p: Params,
    s0: State,
    t_max: float,
    window=PI_WINDOW,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    conv_tol: float = 1e-12,
    detect_closed_orbit: bool = True,
    x_switch: float = 1e-4,
    record: bool = True,
) -> Trajectory:
    """Integrate the strip system from s0 until t_max or a stop condition.

    Stops on window exit (located to 1e-12 in time), convergence to a
    steady state (sup-norm of the field below conv_tol), epsilon-tube
    closed-orbit recurrence, or the time budget.  Below x = x_switch the
    equivalent polynomial system takes over with its time mapped back; the
    switch is transparent in the returned Trajectory.
    """
    if not (window[0][0] < s0.x < window[0][1] and window[1][0] < s0.y < window[1][1]):
        raise DomainError(f"start {s0} outside the window {window}")
    f = _field(p)
    attractors = _attractor_points(p)
    times: list[float] = [0.0]
    states: list[State] = [s0]
    t_now = 0.0
    s_now = (s0.x, s0.y)
    closed = _ClosedOrbitMonitor(f) if detect_closed_orbit else None
    wmon = _window_monitor(window)

    while True:
        if t_now >= t_max:
            return Trajectory(times, states, TrajectoryEnd.TIME_LIMIT)
        if s_now[0] >= x_switch:
            monitors = [wmon, _convergence_monitor(f, conv_tol, attractors)]
            if closed is not None:
                monitors.append(closed)
            ev = Event(func=lambda t, s: s[0] - 0.5 * x_switch, direction=-1)
            sol = integrate_ode(
                f,
                (t_now, t_max),
                s_now,
                rtol=rtol,
                atol=atol,
                events=[ev],
                monitors=monitors,
                record=record,
            )
            if record:
                times.extend(sol.t[1:])
                states.extend(State(x=q[0], y=q[1]) for q in sol.y[1:])
            else:
                times.append(sol.t_final)
                states.append(State(x=sol.y_final[0], y=sol.y_final[1]))
            t_now, s_now = sol.t_final, tuple(sol.y_final)
            if sol.status is Termination.MONITOR:
                return Trajectory(times, states, _END_BY_LABEL[sol.monitor_label])
            if sol.status is Termination.TIME_LIMIT:
                return Trajectory(times, states, TrajectoryEnd.TIME_LIMIT)
            # event: fell below the switch level; continue rescaled
        else:
            f3 = _field_rescaled_timed(p)

            def w3(t_prev, t_new, y_prev, y_new, dense):
                got = wmon(t_prev, t_new, y_prev[:2], y_new[:2], lambda tt: dense(tt)[:2])
                return got

            def budget(t_prev, t_new, y_prev, y_new, dense):
                if t_now + y_new[2] >= t_max:
                    return (t_new, y_new, "budget")
                return None

            conv3 = _convergence_monitor(f3, conv_tol, attractors)

            ev = Event(func=lambda t, s: s[0] - x_switch, direction=+1)
            # the rescaled clock runs 1/x faster; budget monitor enforces t_max
            sol = integrate_ode(
                f3,
                (0.0, math.inf),
                (s_now[0], s_now[1], 0.0),
                rtol=rtol,
                atol=atol,
                events=[ev],
                monitors=[w3, budget, conv3],
                record=record,
            )
            if record:
                times.extend(t_now + q[2] for q in sol.y[1:])
                states.extend(State(x=q[0], y=q[1]) for q in sol.y[1:])
            else:
                times.append(t_now + sol.y_final[2])
                states.append(State(x=sol.y_final[0], y=sol.y_final[1]))
            t_now = t_now + sol.y_final[2]
            s_now = (sol.y_final[0], sol.y_final[1])
            if sol.status is Termination.MONITOR:
                if sol.monitor_label == "budget":
                    return Trajectory(times, states, TrajectoryEnd.TIME_LIMIT)
                return Trajectory(times, states, _END_BY_LABEL[sol.monitor_label])
            if sol.status is Termination.TIME_LIMIT:
                return Trajectory(times, states, TrajectoryEnd.TIME_LIMIT)
            # event: recovered above the switch level; continue in system time


# ----------------------------------------------------------------------
# return maps


def _return_event(section: PoincareSection, t_min: float, rho_min: float) -> Event:
    ax, ay = section.anchor.x, section.anchor.y
    ex, ey = section.direction

    def offset(t, s):
        dx, dy = s[0] - ax, s[1] - ay
        off = -dx * ey + dy * ex
        # Points on the ray itself can round to +-few-ulp instead of 0,
        # which would fake a crossing in the very first step when the
        # trajectory starts on the section; snap those to exact zero.
        if abs(off) < 1e-12 * (abs(dx) + abs(dy)):
            return 0.0
        return off

    return Event(
        func=offset,
        direction=+1,  # interior antisaddles rotate counterclockwise
        terminal=True,
        accept=lambda t, s: t > t_min and section.radius_of(s) > rho_min,
    )


def poincare_map(
    p: Params,
    section: PoincareSection,
    r: float,
    t_max: float = 2000.0,
    window=PI_WINDOW,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> float:
    """First-return radius of the ray section at start radius r.

    Raises NoReturn when the trajectory exits the window, converges, or
    exhausts t_max before coming back around.
    """
    start = section.point_at(r)
    f = _field(p)
    sol = integrate_ode(
        f,
        (0.0, t_max),
        (start.x, start.y),
        rtol=rtol,
        atol=atol,
        events=[_return_event(section, 0.0, 0.0)],
        monitors=[
            _window_monitor(window),
            _convergence_monitor(f, 1e-13),
        ],
        record=False,
    )
    if sol.status is not Termination.EVENT:
        why = sol.monitor_label or sol.status.value
        raise NoReturn(f"no first return at r={r:.6g}: {why}")
    return section.radius_of(sol.y_final)


def _return_with_period(p, section, r, t_max=2000.0, rtol=1e-10, atol=1e-13,
                        record=False):
    start = section.point_at(r)
    f = _field(p)
    sol = integrate_ode(
        f,
        (0.0, t_max),
        (start.x, start.y),
        rtol=rtol,
        atol=atol,
        events=[_return_event(section, 0.0, 0.0)],
        monitors=[_window_monitor(PI_WINDOW), _convergence_monitor(f, 1e-13)],
        record=record,
    )
    if sol.status is not Termination.EVENT:
        raise NoReturn(f"no first return at r={r:.6g}")
    return section.radius_of(sol.y_final), sol.t_final, sol


def default_section(p: Params, around: Equilibrium) -> PoincareSection:
    """Scan ray anchored at the antisaddle, pointing away from the nearest
    other equilibrium (or +x when the antisaddle is alone)."""
    others = [e for e in solve_equilibria(p) if abs(e.x0 - around.x0) > 1e-9]
    if others:
        near = min(others, key=lambda e: math.hypot(e.x0 - around.x0, e.y0 - around.y0))
        dx, dy = around.x0 - near.x0, around.y0 - near.y0
        n = math.hypot(dx, dy)
        direction = (dx / n, dy / n)
    else:
        direction = (1.0, 0.0)
    return PoincareSection(anchor=State(around.x0, around.y0), direction=direction)


def _default_r_max(p: Params, around: Equilibrium, section: PoincareSection) -> float:
    d = min(around.x0, 1.0 - around.x0, around.y0)
    for e in solve_equilibria(p):
        if abs(e.x0 - around.x0) > 1e-9:
            d = min(d, math.hypot(e.x0 - around.x0, e.y0 - around.y0))
    return 0.9 * d


def find_limit_cycles(
    p: Params,
    around: Equilibrium,
    r_max: float | None = None,
    n_scan: int = 48,
    section: PoincareSection | None = None,
    tol_r: float = 1e-10,
    neutral_tol: float = 1e-6,
    rtol: float = 1e-10,
    atol: float = 1e-13,
    gaps_out: list | None = None,
    r_min: float = 0.0,
) -> list[LimitCycle]:
    """All limit cycles crossing the scan ray within r_max of the antisaddle.

    Scans the return-map displacement on a radius grid, refines each sign
    change by bisection plus a Newton polish, then integrates one period
    with the divergence integral appended to get the nontrivial Floquet
    multiplier exp(integral of div f).  Radii where the map has no return
    are skipped and reported through gaps_out.  ``r_min`` narrows the scan
    to an annulus, e.g. to resolve a nearly merged cycle pair that a
    full-range grid would step over.
    """
    if not around.is_antisaddle:
        raise DomainError(f"cycle scan needs an antisaddle, got {around.classification}")
    if section is None:
        section = default_section(p, around)
    if r_max is None:
        r_max = _default_r_max(p, around, section)
    if not 0.0 <= r_min < r_max:
        raise DomainError(f"need 0 <= r_min < r_max, got [{r_min}, {r_max}]")

    def disp(r: float) -> float | None:
        try:
            return poincare_map(p, section, r, rtol=rtol, atol=atol) - r
        except NoReturn:
            return None

    radii = [r_min + (r_max - r_min) * (i + 1) / n_scan for i in range(n_scan)]
    vals = [disp(r) for r in radii]
    for r, v in zip(radii, vals):
        if v is None and gaps_out is not None:
            gaps_out.append(r)

    cycles: list[LimitCycle] = []
    for i in range(n_scan - 1):
        d0, d1 = vals[i], vals[i + 1]
        if d0 is None or d1 is None or d0 == 0.0 or d0 * d1 > 0.0:
            continue
        lo, hi, f_lo = radii[i], radii[i + 1], d0
        r_star = lo  # last radius with a verified return
        while hi - lo > tol_r:
            mid = 0.5 * (lo + hi)
            fm = disp(mid)
            if fm is None:
                break  # keep the best verified radius so far
            r_star = mid
            if fm == 0.0:
                lo = hi = mid
                break
            if f_lo * fm < 0.0:
                hi = mid
            else:
                lo, f_lo = mid, fm
        for _ in range(2):  # Newton polish on the displacement
            h = max(1e-7 * r_star, 1e-12)
            dm, dp = disp(r_star - h), disp(r_star + h)
            dc = disp(r_star)
            if None in (dm, dp, dc):
                break
            slope = (dp - dm) / (2.0 * h)
            if slope == 0.0:
                break
            cand = r_star - dc / slope
            if abs(cand - r_star) > 0.25 * (radii[i + 1] - radii[i]):
                break
            if disp(cand) is None:
                break  # never move onto a radius without a verified return
            r_star = cand
        cycles.append(_build_cycle(p, section, r_star, neutral_tol, rtol, atol))
    cycles.sort(key=lambda c: c.radius)
    return cycles


def _build_cycle(p, section, r_star, neutral_tol, rtol, atol) -> LimitCycle:
    _, period, _ = _return_with_period(p, section, r_star, rtol=rtol, atol=atol)
    f = _field(p)
    div = _divergence(p)

    def f_aug(t, s):
        dx, dy = f(t, s[:2])
        return (dx, dy, div(s[0], s[1]))

    start = section.point_at(r_star)
    sol = integrate_ode(
        f_aug,
        (0.0, period),
        (start.x, start.y, 0.0),
        rtol=rtol,
        atol=atol,
        record=True,
    )
    mult = math.exp(sol.y_final[2])
    if abs(mult - 1.0) <= neutral_tol:
        stab = CycleStability.NEUTRAL
    elif mult < 1.0:
        stab = CycleStability.STABLE
    else:
        stab = CycleStability.UNSTABLE
    stride = max(1, len(sol.y) // 400)
    orbit = [State(x=q[0], y=q[1]) for q in sol.y[::stride]]
    return LimitCycle(
        section_point=start,
        period=period,
        floquet_multiplier=mult,
        stability=stab,
        orbit=orbit,
        radius=r_star,
    )


# ----------------------------------------------------------------------
# separatrices and loop splitting


@dataclass
class SeparatrixSet:
    """The four invariant-manifold branches of a saddle.

    Unstable branches are integrated forward, stable branches backward;
    saddle_value is the trace of the Jacobian at the saddle (decides the
    stability of a cycle born from a homoclinic loop).
    """

    unstable_plus: Trajectory
    unstable_minus: Trajectory
    stable_plus: Trajectory
    stable_minus: Trajectory
    unstable_eigvec: tuple[float, float]
    stable_eigvec: tuple[float, float]
    saddle_value: float


def _saddle_frame(p: Params, loc: State):
    j11, j12, j21, j22 = jacobian_entries(p.a, p.beta, p.delta, loc.x, loc.y)
    tr, det = j11 + j22, j11 * j22 - j12 * j21
    if det >= 0:
        raise NotASaddle(f"det J = {det:.3e} >= 0 at {loc}")
    disc = math.sqrt(tr * tr - 4.0 * det)
    lam_u = 0.5 * (tr + disc)
    lam_s = 0.5 * (tr - disc)

    def eigvec(lam):
        # rows of (J - lam I) are parallel; use the better-conditioned one
        r1 = (j11 - lam, j12)
        r2 = (j21, j22 - lam)
        row = r1 if math.hypot(*r1) >= math.hypot(*r2) else r2
        v = (-row[1], row[0])
        n = math.hypot(*v)
        return (v[0] / n, v[1] / n)

    return lam_u, lam_s, eigvec(lam_u), eigvec(lam_s), tr


def _saddle_location(saddle) -> State:
    if isinstance(saddle, Equilibrium):
        return State(saddle.x0, saddle.y0)
    return saddle


def separatrices(
    p: Params,
    saddle,
    h: float | None = None,
    t_max: float = 400.0,
    window=PI_WINDOW,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> SeparatrixSet:
    """The four separatrix branches of a saddle (interior or boundary).

    Accepts an Equilibrium or a bare State (e.g. the boundary saddle at
    (1, 0)); seeds at saddle +/- h times the eigenvector and integrates
    unstable branches forward, stable branches backward in time.
    """
    loc = _saddle_location(saddle)
    lam_u, lam_s, vu, vs, tr = _saddle_frame(p, loc)
    if h is None:
        h = 1e-7 * max(1.0, abs(loc.x), abs(loc.y))

    def run(vec, sign, forward):
        s0 = State(x=loc.x + sign * h * vec[0], y=loc.y + sign * h * vec[1])
        if not (window[0][0] < s0.x < window[0][1] and window[1][0] < s0.y < window[1][1]):
            # branch leaves the window immediately: record the stub
            return Trajectory([0.0], [s0], TrajectoryEnd.LEFT_WINDOW)
        if forward:
            return integrate(p, s0, t_max, window=window, rtol=rtol, atol=atol,
                             detect_closed_orbit=False)
        f = _field(p)
        g = lambda t, s: tuple(-v for v in f(t, s))
        wmon = _window_monitor(window)
        sol = integrate_ode(
            g, (0.0, t_max), (s0.x, s0.y), rtol=rtol, atol=atol,
            monitors=[wmon, _convergence_monitor(g, 1e-12)],
        )
        states = [State(x=q[0], y=q[1]) for q in sol.y]
        end = (
            _END_BY_LABEL[sol.monitor_label]
            if sol.status is Termination.MONITOR
            else TrajectoryEnd.TIME_LIMIT
        )
        return Trajectory(list(sol.t), states, end)

    return SeparatrixSet(
        unstable_plus=run(vu, +1, True),
        unstable_minus=run(vu, -1, True),
        stable_plus=run(vs, +1, False),
        stable_minus=run(vs, -1, False),
        unstable_eigvec=vu,
        stable_eigvec=vs,
        saddle_value=tr,
    )


def _loop_geometry(p: Params, saddle: Equilibrium, side: str):
    eqs = solve_equilibria(p)
    if side == "left":
        anti = [e for e in eqs if e.x0 < saddle.x0 and e.is_antisaddle]
    else:
        anti = [e for e in eqs if e.x0 > saddle.x0 and e.is_antisaddle]
    if not anti:
        raise DomainError(f"no antisaddle on the {side} side of the saddle")
    target = min(anti, key=lambda e: abs(e.x0 - saddle.x0))
    loc = State(saddle.x0, saddle.y0)
    lam_u, lam_s, vu, vs, tr = _saddle_frame(p, loc)
    to = (target.x0 - loc.x, target.y0 - loc.y)

    def orient(v):
        return v if v[0] * to[0] + v[1] * to[1] > 0.0 else (-v[0], -v[1])

    vu, vs = orient(vu), orient(vs)
    bis = (vu[0] + vs[0], vu[1] + vs[1])
    nb = math.hypot(*bis)
    if nb < 1e-12:
        bis, nb = to, math.hypot(*to)
    u_b = (bis[0] / nb, bis[1] / nb)
    ell = 3.0 * math.hypot(*to)  # transversal reach, scaled to the gap
    return loc, vu, vs, u_b, ell, tr


def _cross_transversal(p, loc, seed_vec, h, u_b, ell, forward, t_max, rtol, atol):
    s0 = (loc.x + h * seed_vec[0], loc.y + h * seed_vec[1])
    f = _field(p)
    g = f if forward else (lambda t, s: tuple(-v for v in f(t, s)))
    n_b = (-u_b[1], u_b[0])

    def offset(s):
        return n_b[0] * (s[0] - loc.x) + n_b[1] * (s[1] - loc.y)

    def radius(s):
        return u_b[0] * (s[0] - loc.x) + u_b[1] * (s[1] - loc.y)

    ev = Event(
        func=lambda t, s: offset(s),
        direction=0,
        terminal=True,
        # generous cap: the first loop pass sits near the saddle-antisaddle
        # gap (ell/3); a tight cap can veto it and leave a near-homoclinic
        # branch crawling into the saddle with no second chance
        accept=lambda t, s: 5e-4 * ell < radius(s) <= 2.0 * ell,
    )
    sol = integrate_ode(
        g,
        (0.0, t_max),
        s0,
        rtol=rtol,
        atol=atol,
        events=[ev],
        monitors=[_window_monitor(PI_WINDOW), _convergence_monitor(g, 1e-13)],
        record=False,
    )
    if sol.status is not Termination.EVENT:
        why = sol.monitor_label or sol.status.value
        raise NoCrossing(f"separatrix missed the transversal ({why})")
    return radius(sol.y_final)


def loop_crossings(
    p: Params,
    saddle: Equilibrium,
    side: str = "left",
    h: float | None = None,
    t_max: float = 600.0,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> tuple[float, float]:
    """Transversal crossing radii (unstable, stable) used by loop_defect."""
    loc, vu, vs, u_b, ell, _ = _loop_geometry(p, saddle, side)
    if h is None:
        h = 1e-8 * max(1.0, abs(loc.x), abs(loc.y))
    # near a fold the saddle weakens and just escaping the launch offset
    # costs ln(ell/h)/lambda time units, so the budget scales with it
    lam_u, lam_s, _, _, _ = _saddle_frame(p, loc)
    esc = math.log(max(ell / h, 2.0))
    t_u = t_max + 1.5 * esc / abs(lam_u)
    t_s = t_max + 1.5 * esc / abs(lam_s)
    r_u = _cross_transversal(p, loc, vu, h, u_b, ell, True, t_u, rtol, atol)
    r_s = _cross_transversal(p, loc, vs, h, u_b, ell, False, t_s, rtol, atol)
    return r_u, r_s


def loop_defect(
    p: Params,
    saddle: Equilibrium,
    side: str = "left",
    **kw,
) -> float:
    """Signed separatrix splitting across the bisector transversal.

    Zero iff the unstable and stable branches around the chosen
    antisaddle connect in a homoclinic loop; positive when the unstable
    branch passes outside the stable one.
    """
    r_u, r_s = loop_crossings(p, saddle, side=side, **kw)
    return r_u - r_s
