"""Tracing of the two nonlocal codim-1 curves in a fixed-delta slice.

Two families are handled, both defined by a signed scalar measurement
that vanishes exactly on the curve:

* separatrix loop ("L"): the saddle's unstable and stable branches close
  into a homoclinic connection around one antisaddle; the measurement is
  the signed splitting of the two branches across a transversal
  (``dynamics.loop_defect``).
* double limit cycle ("C"): a stable and an unstable periodic orbit
  collide; the measurement is the height of the positive hump of the
  return-map displacement g(r) = P(r) - r (positive while two cycles
  coexist, negative once they have annihilated, zero at the fold).

Seeding uses the organizing centers: the loop curve emanates from the
double-zero point of the slice (found by bisecting the splitting between
the fold and Hopf sections next to it), and the double-cycle curve
emanates from a vanishing point of the first focal quantity on the Hopf
section (found by bisecting the fold measurement along a transversal to
the Hopf section).  Slices without a double-zero point (delta <= 1/2)
are seeded by tracking a loop point in delta from a slice that has one.

Continuation is pseudo-arclength in the (a, beta) plane, scaled by the
slice's natural extents: secant predictor, then a one-dimensional root
solve of the measurement along the normal to the predictor, with step
halving on corrector failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bifcurves import (
    BifCurve,
    BifKind,
    CurvePoint,
    bt_curve,
    gh_points,
    hopf_curve,
    turning_curve,
    _hopf_tau_max,
)
from .dynamics import (
    NoCrossing,
    NoReturn,
    default_section,
    loop_defect,
    poincare_map,
    _default_r_max,
)
from .lyapunov import hopf_stability_poly
from .model import DomainError, Params, solve_equilibria
from .rk import StepFailed

__all__ = [
    "SeedFailure",
    "ContinuationStall",
    "MeasureFailure",
    "StepStats",
    "ContinuationRun",
    "seed_loop_curve",
    "seed_double_cycle_curve",
    "loop_run",
    "double_cycle_run",
    "continue_curve",
    "default_stop",
    "nonlocal_sections",
]


class SeedFailure(RuntimeError):
    """No sign change of the defining measurement inside the search box."""


class ContinuationStall(RuntimeError):
    """Corrector failed after eight consecutive step halvings."""


class MeasureFailure(RuntimeError):
    """The defining measurement could not be evaluated at this point."""


_MEASURE_ERRORS = (
    MeasureFailure,
    NoCrossing,
    NoReturn,
    DomainError,
    StepFailed,
    ZeroDivisionError,
    OverflowError,
)


@dataclass
class StepStats:
    accepted: int = 0
    corrector_failures: int = 0
    halvings: int = 0
    measure_calls: int = 0
    stop_reason: Optional[str] = None


@dataclass
class ContinuationRun:
    """A seeded nonlocal-curve trace in one fixed-delta slice.

    ``measure(a, beta)`` is the signed defining functional; every point
    in ``points`` holds a parameter point where it vanished to within
    the corrector tolerance (recorded in the point's ``residual``).
    """

    kind: BifKind
    delta: float
    anchor: Optional[Params]
    measure: Callable[[float, float], float]
    scale: tuple[float, float]
    points: list[CurvePoint] = field(default_factory=list)
    aux: dict = field(default_factory=dict)
    step_stats: StepStats = field(default_factory=StepStats)

    @property
    def seed(self) -> Params:
        return self.points[0].params

    @property
    def curve(self) -> BifCurve:
        return BifCurve(
            kind=self.kind,
            points=list(self.points),
            codim=1,
            label=self.aux.get("label"),
        )

    # -- scaled-plane helpers ------------------------------------------
    def _scaled(self, a: float, beta: float) -> tuple[float, float]:
        return a / self.scale[0], beta / self.scale[1]

    def _unscaled(self, u: float, v: float) -> tuple[float, float]:
        return u * self.scale[0], v * self.scale[1]


def _slice_scale(delta: float) -> tuple[float, float]:
    """Natural (a, beta) extents of the three-equilibria wedge."""
    return 1.0 / 27.0, 27.0 * delta / 8.0


def _measured(run: ContinuationRun, a: float, beta: float) -> float:
    run.step_stats.measure_calls += 1
    return run.measure(a, beta)


# ======================================================================
# measurements


def _loop_measure_fn(
    delta: float,
    side: str,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    t_max: float = 600.0,
):
    def measure(a: float, beta: float) -> float:
        p = Params(a=a, beta=beta, delta=delta)
        saddles = [e for e in solve_equilibria(p) if e.is_saddle]
        if not saddles:
            raise MeasureFailure("no interior saddle at this parameter point")
        return loop_defect(
            p, saddles[0], side=side, t_max=t_max, rtol=rtol, atol=atol
        )

    return measure


def _geom_grid(lo: float, hi: float, n: int) -> list[float]:
    q = (hi / lo) ** (1.0 / (n - 1))
    return [lo * q**i for i in range(n)]


def _fold_measure_fn(delta: float, state: dict):
    """Signed height of the return-map displacement hump around a focus.

    The displacement is normalized per unit radius, (P(r) - r) / r: the
    raw displacement vanishes linearly at the focus, so near r = 0 it
    drops below integration noise and an apex search can drift toward
    spurious noise maxima there; the normalized form stays finite and
    keeps the identical zero set.

    ``state`` carries adiabatic hints between calls: the tracked focus
    abscissa, the last hump location, and integration tolerances.
    """

    def measure(a: float, beta: float) -> float:
        p = Params(a=a, beta=beta, delta=delta)
        anti = [e for e in solve_equilibria(p) if e.is_antisaddle]
        if not anti:
            raise MeasureFailure("no antisaddle at this parameter point")
        e = min(anti, key=lambda q: abs(q.x0 - state["focus_x0"]))
        state["focus_x0"] = e.x0
        sec = default_section(p, e)
        rmax = _default_r_max(p, e, sec)
        if not rmax > 0:
            raise MeasureFailure("degenerate section radius")
        rtol = state.get("rtol", 1e-10)
        atol = state.get("atol", 1e-13)

        def g(r: float) -> Optional[float]:
            try:
                return (poincare_map(p, sec, r, rtol=rtol, atol=atol) - r) / r
            except (NoReturn, DomainError, StepFailed):
                return None

        hint = state.get("r_fold")
        if hint is not None and 0 < hint < rmax:
            r_lo = max(2e-3 * rmax, hint / 2.5)
            r_hi = min(0.92 * rmax, hint * 2.5)
        else:
            r_lo, r_hi = 0.03 * rmax, 0.85 * rmax
        if not r_lo < r_hi:
            r_lo, r_hi = 0.03 * rmax, 0.85 * rmax

        for _ in range(3):
            grid = _geom_grid(r_lo, r_hi, state.get("n_scan", 7))
            vals = [g(r) for r in grid]
            known = [(r, v) for r, v in zip(grid, vals) if v is not None]
            if not known:
                raise MeasureFailure("return map unevaluable on the scan range")
            kbest = max(range(len(known)), key=lambda i: known[i][1])
            # widen once if the hump leans on a scan edge
            if kbest == 0 and known[0][0] > 2.1e-3 * rmax:
                r_lo = max(2e-3 * rmax, r_lo / 2.5)
                continue
            if kbest == len(known) - 1 and known[-1][0] < 0.9 * rmax:
                r_hi = min(0.92 * rmax, r_hi * 2.5)
                continue
            break
        lo = known[kbest - 1][0] if kbest > 0 else known[0][0] / 1.6
        hi = known[kbest + 1][0] if kbest + 1 < len(known) else known[-1][0] * 1.6
        hi = min(hi, 0.95 * rmax)
        best_r, best_v = known[kbest]

        # golden-section refinement of the hump maximum
        inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - inv_phi * (hi - lo)
        x2 = lo + inv_phi * (hi - lo)
        f1, f2 = g(x1), g(x2)
        for _ in range(state.get("n_refine", 14)):
            if f1 is None:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + inv_phi * (hi - lo)
                f2 = g(x2)
                continue
            if f2 is None:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - inv_phi * (hi - lo)
                f1 = g(x1)
                continue
            if f1 < f2:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + inv_phi * (hi - lo)
                f2 = g(x2)
            else:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - inv_phi * (hi - lo)
                f1 = g(x1)
        for r, v in ((x1, f1), (x2, f2)):
            if v is not None and v > best_v:
                best_r, best_v = r, v
        state["r_fold"] = best_r
        state["section"] = sec
        return best_v

    return measure


# ======================================================================
# scalar root helper (false position with a measurement tolerance)


def _root_on_segment(
    f,
    s_lo: float,
    s_hi: float,
    f_lo: float,
    f_hi: float,
    ftol: float,
    xtol: float,
    max_iter: int = 48,
) -> tuple[float, float]:
    """Root of f on [s_lo, s_hi] given a sign change at the ends.

    Illinois-damped false position; returns (s, f(s)) with |f(s)| <= ftol
    or the best point once the bracket collapses below xtol.
    """
    if f_lo == 0.0:
        return s_lo, f_lo
    if f_hi == 0.0:
        return s_hi, f_hi
    if f_lo * f_hi > 0.0:
        raise MeasureFailure("no sign change on the corrector segment")
    best_s, best_f = (s_lo, f_lo) if abs(f_lo) < abs(f_hi) else (s_hi, f_hi)
    side = 0
    for _ in range(max_iter):
        s = (s_lo * f_hi - s_hi * f_lo) / (f_hi - f_lo)
        span = s_hi - s_lo
        if not (s_lo + 0.05 * abs(span) < s < s_hi - 0.05 * abs(span)):
            s = 0.5 * (s_lo + s_hi)
        v = f(s)
        if abs(v) < abs(best_f):
            best_s, best_f = s, v
        if abs(v) <= ftol:
            return s, v
        if v * f_lo < 0.0:
            s_hi, f_hi = s, v
            if side == -1:
                f_lo *= 0.5
            side = -1
        else:
            s_lo, f_lo = s, v
            if side == 1:
                f_hi *= 0.5
            side = 1
        if abs(s_hi - s_lo) < xtol:
            break
    return best_s, best_f


# ======================================================================
# walking along the closed-form fold / Hopf sections


def _walk_scaled(point_fn, t0: float, dt: float, dist: float, scale, n_max: int = 4000):
    """March parameter t from t0 in steps dt until the scaled chord length
    from the start reaches ``dist``; returns (t, (a, beta))."""
    start = point_fn(t0)
    if start is None:
        raise SeedFailure(f"section parameterization undefined at t={t0}")
    acc = 0.0
    prev = start
    t = t0
    for _ in range(n_max):
        t_next = t + dt
        q = point_fn(t_next)
        if q is None:
            break
        du = (q[0] - prev[0]) / scale[0]
        dv = (q[1] - prev[1]) / scale[1]
        acc += math.hypot(du, dv)
        t, prev = t_next, q
        if acc >= dist:
            return t, prev
    raise SeedFailure("section ran out before reaching the requested distance")


def _fold_ab(tau: float, delta: float) -> Optional[tuple[float, float]]:
    try:
        p, _ = turning_curve(tau, delta)
    except DomainError:
        return None
    return p.a, p.beta


def _hopf_ab(tau: float, delta: float) -> Optional[tuple[float, float]]:
    got = hopf_curve(tau, delta)
    if got is None:
        return None
    p, _ = got
    return p.a, p.beta


# ======================================================================
# separatrix-loop seeding


def _loop_side_at_bt(delta: float) -> str:
    """Which antisaddle the loop born at the double-zero point encloses.

    The merging pair sits at abscissa 1 - delta and the remaining simple
    equilibrium at 2*delta - 1; the antisaddle of the pair is to the left
    of the saddle exactly when 1 - delta < 1/3, i.e. delta > 2/3.
    """
    return "left" if delta > 2.0 / 3.0 else "right"


def _bisect_measure_on_segment(
    measure,
    q0: tuple[float, float],
    q1: tuple[float, float],
    stats: StepStats,
    ftol: float,
    t_lo: float = 0.10,
    t_hi: float = 0.90,
    n_scan: int = 9,
) -> tuple[tuple[float, float], float, list]:
    """Scan the line through q0->q1 (parameterized so q0 is t=0, q1 is
    t=1) for a sign change of the measurement and bisect it down to
    |measure| <= ftol.  Returns (point, value, log)."""

    def at(t: float) -> tuple[float, float]:
        return (q0[0] + t * (q1[0] - q0[0]), q0[1] + t * (q1[1] - q0[1]))

    log = []
    samples = []
    for i in range(n_scan):
        t = t_lo + (t_hi - t_lo) * i / (n_scan - 1)
        try:
            stats.measure_calls += 1
            v = measure(*at(t))
        except _MEASURE_ERRORS as ex:
            log.append((t, f"unmeasurable: {ex}"))
            continue
        log.append((t, v))
        samples.append((t, v))
    bracket = None
    for (t1, v1), (t2, v2) in zip(samples, samples[1:]):
        if v1 == 0.0:
            return at(t1), v1, log
        if v1 * v2 < 0.0:
            bracket = (t1, t2, v1, v2)
            break
    if bracket is None:
        raise SeedFailure(
            "no sign change of the defining measurement on the search segment; "
            f"samples: {log}"
        )
    t1, t2, v1, v2 = bracket

    def f(t: float) -> float:
        stats.measure_calls += 1
        return measure(*at(t))

    t_star, v_star = _root_on_segment(f, t1, t2, v1, v2, ftol=ftol, xtol=1e-13)
    return at(t_star), v_star, log


def _seed_loop_on_slice(
    delta: float,
    stats: StepStats,
    dist_candidates=(0.04, 0.08, 0.16),
    ftol: float = 1e-8,
) -> tuple[Params, str, dict]:
    """Seed the loop between the fold and Hopf sections next to the
    double-zero point of a slice with 1/2 < delta < 1."""
    if not (0.5 < delta < 1.0):
        raise SeedFailure(
            f"slice delta={delta} has no double-zero point; use the tracked route"
        )
    tau_bt = 1.0 - delta
    bt = bt_curve(tau_bt)
    scale = _slice_scale(delta)
    side = _loop_side_at_bt(delta)
    measure = _loop_measure_fn(delta, side)
    last_err: Exception | None = None
    for dist in dist_candidates:
        try:
            # Hopf section leaves the double-zero point toward smaller tau
            _, q_h = _walk_scaled(
                lambda t: _hopf_ab(t, delta),
                tau_bt * (1.0 - 1e-9),
                -tau_bt / 1200.0,
                dist,
                scale,
            )
            # fold section: walk the direction that tracks the Hopf side
            u_h = ((q_h[0] - bt.a) / scale[0], (q_h[1] - bt.beta) / scale[1])
            best = None
            for sgn in (+1.0, -1.0):
                try:
                    t_t, q_t = _walk_scaled(
                        lambda t: _fold_ab(t, delta),
                        tau_bt,
                        sgn * 0.5 / 1200.0,
                        dist,
                        scale,
                    )
                except SeedFailure:
                    continue
                u_t = ((q_t[0] - bt.a) / scale[0], (q_t[1] - bt.beta) / scale[1])
                align = u_t[0] * u_h[0] + u_t[1] * u_h[1]
                if best is None or align > best[0]:
                    best = (align, q_t)
            if best is None:
                raise SeedFailure("fold section unreachable on both sides")
            q_t = best[1]
            # the loop lies past the Hopf section as seen from the fold
            # section (the cycle born on H dies on it), so the scan runs
            # from just inside the fold side to well beyond the Hopf side
            (a_s, b_s), v_s, log = _bisect_measure_on_segment(
                measure, q_t, q_h, stats, ftol, t_lo=0.15, t_hi=2.4, n_scan=14
            )
            p_seed = Params(a=a_s, beta=b_s, delta=delta)
            saddle = [e for e in solve_equilibria(p_seed) if e.is_saddle][0]
            info = {
                "side": side,
                "anchor": bt,
                "saddle_value": saddle.tr_j,
                "seed_residual": abs(v_s),
                "search_distance": dist,
                "segment_fold_end": q_t,
                "segment_hopf_end": q_h,
            }
            return p_seed, side, info
        except (SeedFailure, *_MEASURE_ERRORS) as ex:
            last_err = ex
            continue
    raise SeedFailure(
        f"loop seeding failed on slice delta={delta} for all search distances "
        f"{dist_candidates}; last error: {last_err}"
    )


def _refind_loop_at_delta(
    delta: float,
    side: str,
    a0: float,
    b0: float,
    stats: StepStats,
    ftol: float,
    widths=(0.04, 0.1, 0.25),
) -> tuple[float, float, float]:
    """Re-locate the loop on a nearby slice with a local two-dimensional
    bracket hunt around (a0, b0).

    A one-dimensional scan only corrects the coordinate it scans along,
    so a delta-tracker built on it silently freezes the other coordinate
    and walks off the curve.  Here a small grid in scaled coordinates is
    probed (center cross first, then the full stencil, then wider), the
    first sign change between neighbouring measurable cells is root-found
    along its segment, and both coordinates of the returned point lie on
    the curve."""
    measure = _loop_measure_fn(delta, side)
    s_a, s_b = _slice_scale(delta)
    u0, v0 = a0 / s_a, b0 / s_b
    offs = (-1.0, -0.5, 0.0, 0.5, 1.0)

    def segment_root(p1, v1, p2, v2) -> tuple[float, float, float]:
        def f(t: float) -> float:
            stats.measure_calls += 1
            return measure(
                (p1[0] + t * (p2[0] - p1[0])) * s_a,
                (p1[1] + t * (p2[1] - p1[1])) * s_b,
            )

        t_star, v_star = _root_on_segment(f, 0.0, 1.0, v1, v2, ftol=ftol, xtol=1e-13)
        return (
            (p1[0] + t_star * (p2[0] - p1[0])) * s_a,
            (p1[1] + t_star * (p2[1] - p1[1])) * s_b,
            v_star,
        )

    for w in widths:
        vals: dict[tuple[int, int], Optional[float]] = {}

        def get(i: int, j: int) -> Optional[float]:
            if (i, j) not in vals:
                try:
                    stats.measure_calls += 1
                    vals[(i, j)] = measure(
                        (u0 + offs[i] * w) * s_a, (v0 + offs[j] * w) * s_b
                    )
                except _MEASURE_ERRORS:
                    vals[(i, j)] = None
            return vals[(i, j)]

        def bracket() -> Optional[tuple[float, float, float]]:
            for (i, j), v1 in list(vals.items()):
                if v1 is None:
                    continue
                for i2, j2 in ((i + 1, j), (i, j + 1)):
                    if not (0 <= i2 < 5 and 0 <= j2 < 5):
                        continue
                    v2 = vals.get((i2, j2))
                    if v2 is not None and v1 * v2 <= 0.0:
                        p1 = (u0 + offs[i] * w, v0 + offs[j] * w)
                        p2 = (u0 + offs[i2] * w, v0 + offs[j2] * w)
                        return segment_root(p1, v1, p2, v2)
            return None

        for i in range(5):
            get(i, 2)
        for j in range(5):
            get(2, j)
        got = bracket()
        if got is not None:
            return got
        for i in range(5):
            for j in range(5):
                get(i, j)
        got = bracket()
        if got is not None:
            return got
    raise SeedFailure(
        f"could not re-locate the loop at delta={delta} near (a={a0}, beta={b0})"
    )


def _seed_loop_tracked(
    delta_target: float,
    stats: StepStats,
    delta_start: float = 0.55,
    max_step: float = 0.05,
    min_step: float = 0.004,
    ftol: float = 1e-8,
) -> tuple[Params, str, dict]:
    """Seed on a slice without a double-zero point by walking a loop point
    down (or up) in delta from a slice that has one.

    The walk predicts each next point by linear extrapolation of the
    track in scaled coordinates (27a, beta normalized by the cusp beta),
    where the loop section drifts slowly and smoothly with delta."""
    p0, side, info0 = _seed_loop_on_slice(delta_start, stats)
    a, b = p0.a, p0.beta
    d = delta_start
    hist = [(d, a * 27.0, b / _slice_scale(d)[1])]
    v = info0.get("seed_residual", 0.0)
    step = max_step
    path = [(d, a, b)]
    while abs(d - delta_target) > 1e-12:
        step = min(step, abs(d - delta_target))
        d_next = d - math.copysign(step, d - delta_target)
        if len(hist) >= 2:
            (d1, u1, v1), (d2, u2, v2) = hist[-2], hist[-1]
            w = (d_next - d2) / (d2 - d1)
            u_g, v_g = u2 + w * (u2 - u1), v2 + w * (v2 - v1)
        else:
            _, u_g, v_g = hist[-1]
        s_next = _slice_scale(d_next)
        a_guess, b_guess = u_g / 27.0, v_g * s_next[1]
        final = abs(d_next - delta_target) <= 1e-12
        try:
            a, b, v = _refind_loop_at_delta(
                d_next, side, a_guess, b_guess, stats,
                ftol=(ftol if final else 1e-6),
            )
        except SeedFailure:
            step *= 0.5
            if step < min_step:
                raise SeedFailure(
                    f"delta-tracking stalled at delta={d} (target {delta_target}); "
                    f"path so far: {path}"
                )
            continue
        d = d_next
        hist.append((d, a * 27.0, b / s_next[1]))
        path.append((d, a, b))
        step = min(max_step, step * 1.7)
    p_seed = Params(a=a, beta=b, delta=delta_target)
    saddles = [e for e in solve_equilibria(p_seed) if e.is_saddle]
    info = {
        "side": side,
        "anchor": None,
        "tracked_from": delta_start,
        "track_path": path,
        "saddle_value": saddles[0].tr_j if saddles else float("nan"),
        "seed_residual": abs(v),
    }
    return p_seed, side, info


def loop_run(
    delta: float,
    seed: Optional[Params] = None,
    side: Optional[str] = None,
    toward_anchor: bool = True,
) -> ContinuationRun:
    """Seed (or adopt) a separatrix-loop point and wrap it for continuation."""
    stats = StepStats()
    if seed is None:
        if 0.5 < delta < 1.0:
            p_seed, side_found, info = _seed_loop_on_slice(delta, stats)
        elif 0.0 < delta <= 0.5:
            p_seed, side_found, info = _seed_loop_tracked(delta, stats)
        else:
            raise DomainError(
                f"the separatrix-loop curve needs 0 < delta < 1, got {delta}"
            )
        side = side_found
    else:
        if side is None:
            raise SeedFailure("adopting an external seed requires its loop side")
        p_seed = seed
        info = {"side": side, "anchor": None, "adopted": True}
        if 0.5 < delta < 1.0:
            info["anchor"] = bt_curve(1.0 - delta)
    anchor = info.get("anchor")
    run = ContinuationRun(
        kind=BifKind.SADDLE_LOOP,
        delta=delta,
        anchor=anchor,
        measure=_loop_measure_fn(delta, side),
        scale=_slice_scale(delta),
        aux={"label": f"L[{side}]", **info},
        step_stats=stats,
    )
    try:
        stats.measure_calls += 1
        res = abs(run.measure(p_seed.a, p_seed.beta))
    except _MEASURE_ERRORS:
        res = info.get("seed_residual", float("nan"))
    run.points.append(CurvePoint(params=p_seed, tau=None, x0=None, residual=res))
    if anchor is not None:
        du = (anchor.a - p_seed.a) / run.scale[0]
        dv = (anchor.beta - p_seed.beta) / run.scale[1]
        n = math.hypot(du, dv)
        if n > 0:
            direction = (du / n, dv / n)
            if not toward_anchor:
                direction = (-direction[0], -direction[1])
            run.aux["initial_direction"] = direction
    return run


def seed_loop_curve(delta: float) -> Params:
    """Parameter point with a saddle homoclinic loop on the given slice.

    For 1/2 < delta < 1 the point is found between the fold and Hopf
    sections next to the slice's double-zero point; for delta <= 1/2 a
    loop point is tracked down in delta from such a slice.  The returned
    point satisfies |loop splitting| below the seeding tolerance.
    """
    return loop_run(delta).seed


# ======================================================================
# double-cycle seeding


def _hopf_tangent_normal(tau: float, delta: float, scale) -> tuple:
    h = 1e-6
    q1 = _hopf_ab(tau - h, delta)
    q2 = _hopf_ab(tau + h, delta)
    if q1 is None or q2 is None:
        raise SeedFailure(f"Hopf section not two-sided at tau={tau}")
    tu = ((q2[0] - q1[0]) / scale[0], (q2[1] - q1[1]) / scale[1])
    n = math.hypot(*tu)
    if n == 0:
        raise SeedFailure("degenerate Hopf tangent")
    tu = (tu[0] / n, tu[1] / n)
    return tu, (-tu[1], tu[0])


def _focus_trace_at(p: Params, x0_hint: float) -> float:
    eqs = solve_equilibria(p)
    anti = [e for e in eqs if e.is_antisaddle]
    if not anti:
        raise MeasureFailure("no antisaddle while probing the focus trace")
    e = min(anti, key=lambda q: abs(q.x0 - x0_hint))
    return e.tr_j


def double_cycle_run(
    delta: float,
    seed: Optional[Params] = None,
    gh_index: Optional[int] = None,
    toward_anchor: bool = True,
    walk_candidates=(0.0007, 0.0015, 0.004, 0.01, 0.022, 0.05),
    ftol: float = 4e-10,
) -> ContinuationRun:
    """Seed (or adopt) a double-cycle point and wrap it for continuation.

    Seeding walks along the Hopf section away from a vanishing point of
    the first focal quantity into the subcritical range, then steps along
    the normal toward the stable-focus side and bisects the fold
    measurement of the return map.

    The walk ladder starts very close to the vanishing point and the
    tolerance is tight because the seeded point is meant to carry an
    almost exactly neutral cycle: the cycle pair's multiplier offset
    scales like sqrt(hump height x hump curvature), and the curvature
    only becomes small near the organizing point.
    """
    stats = StepStats()
    scale = _slice_scale(delta)
    if delta >= 1.0:
        raise DomainError(
            f"no Hopf section (hence no fold of cycles) for delta={delta} >= 1"
        )
    ghs = gh_points(delta)
    if not ghs:
        raise SeedFailure(f"no vanishing focal point on the Hopf section at delta={delta}")
    order = [gh_index] if gh_index is not None else list(range(len(ghs)))
    state = {"focus_x0": 0.0, "rtol": 1e-10, "atol": 1e-13}
    measure = _fold_measure_fn(delta, state)

    if seed is not None:
        gh = ghs[order[0]]
        state["focus_x0"] = gh.x0
        run = ContinuationRun(
            kind=BifKind.DOUBLE_CYCLE,
            delta=delta,
            anchor=gh.params,
            measure=measure,
            scale=scale,
            aux={"label": "C", "adopted": True, "fold_state": state},
            step_stats=stats,
        )
        stats.measure_calls += 1
        res = abs(measure(seed.a, seed.beta))
        run.points.append(CurvePoint(params=seed, tau=None, x0=gh.x0, residual=res))
        return run

    last_err: Exception | None = None
    for idx in order:
        gh = ghs[idx]
        tau_gh = gh.x0
        # subcritical direction along the section: first focal quantity > 0
        probe = 1e-4
        up = hopf_stability_poly(delta, tau_gh + probe)
        down = hopf_stability_poly(delta, tau_gh - probe)
        sgn_tau = 1.0 if up > down else -1.0
        tau_hi = _hopf_tau_max(delta)
        for dtau in walk_candidates:
            tau_w = tau_gh + sgn_tau * dtau
            if not (1e-6 < tau_w < tau_hi * (1.0 - 1e-9)):
                continue
            got = hopf_curve(tau_w, delta)
            if got is None or hopf_stability_poly(delta, tau_w) <= 0.0:
                continue
            p_h, _ = got
            try:
                _, n_hat = _hopf_tangent_normal(tau_w, delta, scale)
                # normal sign: toward the side where the focus is stable
                eps = 1e-6
                p_plus = Params(
                    a=p_h.a + eps * n_hat[0] * scale[0],
                    beta=p_h.beta + eps * n_hat[1] * scale[1],
                    delta=delta,
                )
                if _focus_trace_at(p_plus, tau_w) > 0.0:
                    n_hat = (-n_hat[0], -n_hat[1])
                state["focus_x0"] = tau_w
                state.pop("r_fold", None)
                # extra hump-max refinement while pinning the seed: the
                # neutrality of the seeded cycle is only as good as the
                # located hump apex
                state["n_refine"] = 18

                def at(s: float) -> tuple[float, float]:
                    return (
                        p_h.a + s * n_hat[0] * scale[0],
                        p_h.beta + s * n_hat[1] * scale[1],
                    )

                # geometric ladder out from the Hopf section
                s_prev, v_prev = None, None
                bracket = None
                s_val = 3e-6
                while s_val < 0.08:
                    try:
                        stats.measure_calls += 1
                        v = measure(*at(s_val))
                    except _MEASURE_ERRORS:
                        v = None
                    if v is not None:
                        if v_prev is not None and v_prev > 0.0 >= v:
                            bracket = (s_prev, s_val, v_prev, v)
                            break
                        if v > 0.0:
                            s_prev, v_prev = s_val, v
                        elif v_prev is None:
                            # already past the fold: retreat
                            s_val *= 0.12
                            if s_val < 1e-9:
                                break
                            continue
                    s_val *= 2.1
                if bracket is None:
                    raise SeedFailure("no fold bracket on the normal ladder")
                s1, s2, v1, v2 = bracket

                def f(s: float) -> float:
                    stats.measure_calls += 1
                    return measure(*at(s))

                s_star, v_star = _root_on_segment(
                    f, s1, s2, v1, v2, ftol=ftol, xtol=1e-14
                )
                # Land on the side where the cycle pair still exists: the
                # seed is meant to carry an (almost) neutral cycle, not
                # the ghost left after the pair annihilates.
                if v_star <= 0.0:
                    lo_s, hi_s = s1, s_star
                    for _ in range(24):
                        mid = 0.5 * (lo_s + hi_s)
                        vm = f(mid)
                        if 0.0 < vm <= 3.0 * ftol:
                            s_star, v_star = mid, vm
                            break
                        if vm > 0.0:
                            lo_s = mid
                        else:
                            hi_s = mid
                    else:
                        s_star, v_star = lo_s, v1
                state["n_refine"] = 14
                a_s, b_s = at(s_star)
                p_seed = Params(a=a_s, beta=b_s, delta=delta)
                run = ContinuationRun(
                    kind=BifKind.DOUBLE_CYCLE,
                    delta=delta,
                    anchor=gh.params,
                    measure=measure,
                    scale=scale,
                    aux={
                        "label": "C",
                        "gh_index": idx,
                        "gh_tau": tau_gh,
                        "walk_dtau": dtau,
                        "fold_radius": state.get("r_fold"),
                        "fold_state": state,
                        "focus_x0": state["focus_x0"],
                        "seed_residual": abs(v_star),
                    },
                    step_stats=stats,
                )
                run.points.append(
                    CurvePoint(
                        params=p_seed,
                        tau=None,
                        x0=state["focus_x0"],
                        residual=abs(v_star),
                    )
                )
                du = (gh.params.a - a_s) / scale[0]
                dv = (gh.params.beta - b_s) / scale[1]
                n = math.hypot(du, dv)
                if n > 0:
                    direction = (du / n, dv / n)
                    if not toward_anchor:
                        direction = (-direction[0], -direction[1])
                    run.aux["initial_direction"] = direction
                return run
            except (SeedFailure, *_MEASURE_ERRORS) as ex:
                last_err = ex
                continue
    raise SeedFailure(
        f"double-cycle seeding failed at delta={delta}; last error: {last_err}"
    )


def seed_double_cycle_curve(delta: float) -> Params:
    """Parameter point where the return map has a tangential fixed point
    (a stable and an unstable cycle colliding), next to a vanishing point
    of the first focal quantity on the Hopf section."""
    return double_cycle_run(delta).seed


# ======================================================================
# continuation


def default_stop(
    run: ContinuationRun,
    window: Optional[tuple] = None,
    organizers: Optional[list] = None,
    prox: float = 8e-3,
    max_points: int = 10000,
):
    """Standard stop predicate: window exit, proximity to an organizing
    center (raw (a, beta) distance), or the accepted-point budget.

    Organizer proximity is measured in raw parameter units because the
    termination contract for continued curves is stated that way; the
    window test stays in scaled units."""
    s_a, s_b = run.scale
    if window is None:
        # Cover both the three-equilibria wedge (a up to the cusp value)
        # and the full sweep of the Hopf section, which at moderate delta
        # reaches well past the cusp in a.
        tau_hi = _hopf_tau_max(run.delta)
        a_hopf = 0.0
        for k in range(1, 64):
            tau = tau_hi * k / 64.0
            a_hopf = max(a_hopf, _hopf_ab(tau, run.delta)[0])
        window = ((0.0, 1.30 * max(1.0 / 27.0, a_hopf)), (0.0, 3.0 * s_b))
    if organizers is None:
        organizers = [run.anchor] if run.anchor is not None else []
        if run.kind is BifKind.DOUBLE_CYCLE:
            for gh in gh_points(run.delta):
                organizers.append(gh.params)

    # An organizer only stops the trace after the curve has once been
    # clearly outside its proximity ball; a run seeded right next to an
    # organizing center (the usual case for a fold-of-cycles seed) must
    # first escape before proximity means anything.
    armed = [False] * len(organizers)

    def stop(r: ContinuationRun) -> Optional[str]:
        if len(r.points) >= max_points:
            return f"point budget ({max_points}) reached"
        p = r.points[-1].params
        if not (window[0][0] < p.a < window[0][1] and window[1][0] < p.beta < window[1][1]):
            return "left the window"
        for i, org in enumerate(organizers):
            d = math.hypot(p.a - org.a, p.beta - org.beta)
            if d > 1.25 * prox:
                armed[i] = True
            elif armed[i] and d < prox:
                return (
                    f"reached organizing center (a={org.a:.6g}, beta={org.beta:.6g}, "
                    f"distance {d:.2e})"
                )
        if len(r.points) >= 2:
            q = r.points[-2].params
            du = (p.a - q.a) / s_a
            dv = (p.beta - q.beta) / s_b
            if math.hypot(du, dv) == 0.0:
                return "step underflow"
        return None

    return stop


def continue_curve(
    run: ContinuationRun,
    arc_step: float,
    stop=None,
    res_tol: float = 1e-7,
    min_step_factor: float = 2.0**-8,
) -> BifCurve:
    """Pseudo-arclength trace of the run's curve in its (a, beta) slice.

    Secant (or seeded-direction) predictor of length ``arc_step`` in the
    scaled plane, corrector solving the defining measurement to zero
    along the normal.  The step halves on corrector failure and the trace
    aborts with ContinuationStall after eight consecutive halvings; it
    ends cleanly when the stop predicate fires.
    """
    if not run.points:
        raise SeedFailure("continuation needs a seeded run")
    if stop is None:
        stop = default_stop(run)
    stats = run.step_stats
    h = arc_step
    consecutive = 0
    while True:
        reason = stop(run)
        if reason is not None:
            stats.stop_reason = reason
            break
        p_last = run.points[-1].params
        u_last = run._scaled(p_last.a, p_last.beta)
        if len(run.points) >= 2:
            p_prev = run.points[-2].params
            u_prev = run._scaled(p_prev.a, p_prev.beta)
            tx, ty = u_last[0] - u_prev[0], u_last[1] - u_prev[1]
        else:
            tx, ty = run.aux.get("initial_direction", (None, None))
            if tx is None:
                tx, ty = _initial_direction_from_gradient(run, h)
        norm = math.hypot(tx, ty)
        if norm == 0.0:
            stats.stop_reason = "vanishing tangent"
            break
        tx, ty = tx / norm, ty / norm
        nx, ny = -ty, tx
        qx, qy = u_last[0] + h * tx, u_last[1] + h * ty

        def psi(s: float) -> float:
            a, b = run._unscaled(qx + s * nx, qy + s * ny)
            return _measured(run, a, b)

        try:
            s_star, v_star = _correct_on_normal(psi, h, res_tol)
            if abs(v_star) > res_tol:
                raise MeasureFailure(
                    f"corrector residual {abs(v_star):.3e} above {res_tol:.1e}"
                )
            if abs(s_star) > 0.7 * h:
                # Trust region: a correction comparable to the step means
                # the predictor has lost the curve (sharp turn or curve
                # end).  Accepting it can swing the marching direction
                # around and silently retrace the curve backwards, so
                # halve and retry instead; a genuine termination then
                # surfaces as an honest stall.
                raise MeasureFailure(
                    f"corrector moved {abs(s_star):.3e}, beyond the "
                    f"trust region of step {h:.3e}"
                )
        except _MEASURE_ERRORS:
            stats.corrector_failures += 1
            stats.halvings += 1
            consecutive += 1
            h *= 0.5
            if consecutive >= 8 or h < arc_step * min_step_factor:
                raise ContinuationStall(
                    f"corrector failed {consecutive} times in a row near "
                    f"(a={p_last.a:.6g}, beta={p_last.beta:.6g}); "
                    f"last step {h * 2:.3e} (seed step {arc_step:.3e})"
                )
            continue
        consecutive = 0
        a_new, b_new = run._unscaled(qx + s_star * nx, qy + s_star * ny)
        x0_new = None
        if run.kind is BifKind.DOUBLE_CYCLE:
            st = run.aux.get("fold_state", {})
            x0_new = st.get("focus_x0")
            run.aux["fold_radius"] = st.get("r_fold")
        run.points.append(
            CurvePoint(
                params=Params(a=a_new, beta=b_new, delta=run.delta),
                tau=None,
                x0=x0_new,
                residual=abs(v_star),
            )
        )
        stats.accepted += 1
        h = min(arc_step, h * 1.6)
    return run.curve


def _correct_on_normal(psi, h: float, res_tol: float) -> tuple[float, float]:
    """Root of the measurement along the corrector normal.

    Probes a short ladder on both sides of the predicted point, then — if
    the ladder alone finds no sign change — aims extra probes at the
    secant-extrapolated zero.  The aimed phase matters when the zero set
    runs in a band much thinner than the step (a loop curve hugging a
    fold): the ladder rungs straddle the band without landing in it, but
    the extrapolated zero does.  The prediction itself may be unevaluable
    (e.g. past a neighboring fold); side probes can still bracket the
    root then, and an aimed probe that lands past the fold is walked back
    toward the measured side."""
    vals: dict[float, Optional[float]] = {}

    def ev(s: float) -> Optional[float]:
        if s in vals:
            return vals[s]
        try:
            v = psi(s)
        except _MEASURE_ERRORS:
            v = None
        vals[s] = v
        return v

    def bracket_from(s: float, v: float):
        partners = [
            u for u, vu in vals.items() if vu is not None and vu * v < 0.0
        ]
        if not partners:
            return None
        u = min(partners, key=lambda q: abs(q - s))
        lo, hi = (u, s) if u < s else (s, u)
        return _root_on_segment(
            psi, lo, hi, vals[lo], vals[hi], ftol=res_tol, xtol=1e-14
        )

    v0 = ev(0.0)
    if v0 is not None and abs(v0) <= res_tol:
        return 0.0, v0
    for w in (0.35 * h, 0.8 * h, 1.6 * h):
        for s in (w, -w):
            v = ev(s)
            if v is None:
                continue
            hit = bracket_from(s, v)
            if hit is not None:
                return hit

    # Aimed phase: secant-extrapolate the zero from the two most telling
    # measured values and probe there, shrinking back toward the measured
    # side whenever the aim lands in unmeasurable territory.
    pts = [(s, v) for s, v in vals.items() if v is not None]
    for _ in range(6):
        if len(pts) < 2:
            break
        pts.sort(key=lambda t: abs(t[1]))
        s1, v1 = pts[0]
        others = [t for t in pts[1:] if t[0] != s1]
        if not others:
            break
        s2, v2 = min(others, key=lambda t: abs(t[0] - s1))
        if v2 == v1:
            break
        s_star = s1 - v1 * (s2 - s1) / (v2 - v1)
        s_star = max(-2.0 * h, min(2.0 * h, s_star))
        if any(abs(s_star - s) < 1e-15 * max(1.0, abs(s)) for s, _ in pts):
            break
        v = None
        for _retreat in range(4):
            v = ev(s_star)
            if v is not None:
                break
            s_star = 0.5 * (s_star + s1)
        if v is None:
            break
        hit = bracket_from(s_star, v)
        if hit is not None:
            return hit
        pts.append((s_star, v))
    raise MeasureFailure("no sign change along the corrector normal")


def _initial_direction_from_gradient(run: ContinuationRun, h: float) -> tuple:
    """Tangent estimate for a run with a single point and no seeded
    direction: normal to the measurement gradient (arbitrary sign)."""
    p = run.points[-1].params
    u0 = run._scaled(p.a, p.beta)
    d = max(1e-4, 0.5 * h)
    try:
        ga = _measured(run, *run._unscaled(u0[0] + d, u0[1]))
        gb = _measured(run, *run._unscaled(u0[0], u0[1] + d))
        g0 = run.points[-1].residual
        gx, gy = (ga - g0) / d, (gb - g0) / d
    except _MEASURE_ERRORS as ex:
        raise SeedFailure(f"cannot estimate an initial direction: {ex}")
    n = math.hypot(gx, gy)
    if n == 0.0:
        raise SeedFailure("flat measurement; cannot estimate an initial direction")
    return (-gy / n, gx / n)


# ======================================================================
# slice assembly


def _trace_both_ways(
    make_run,
    arc_step: float,
    window,
    max_points: int,
) -> BifCurve:
    """Continue a seeded family toward its organizing center and away from
    it, and join the two traces into one polyline."""
    run_to = make_run(True)
    seed_at_anchor = run_to.anchor is not None and (
        math.hypot(
            run_to.seed.a - run_to.anchor.a, run_to.seed.beta - run_to.anchor.beta
        )
        < 8e-3
    )
    if seed_at_anchor:
        # The seed already sits inside the organizer's proximity ball (the
        # usual case for a fold-of-cycles family, which is seeded a tiny
        # arc away from its degenerate-Hopf end).  Marching further toward
        # the organizer would shrink the cycles into integrator noise and
        # can slide onto the nearby equilibrium-bifurcation section, so
        # the organizer-side end of the curve is the seed itself.
        pass
    else:
        try:
            continue_curve(
                run_to,
                arc_step,
                stop=default_stop(run_to, window=window, max_points=max_points),
            )
        except ContinuationStall:
            pass
    run_away = make_run(False)
    # a run with no organizing anchor inherits (negated) the direction the
    # toward-run actually took, so the two traces leave opposite ways
    if "initial_direction" not in run_away.aux and len(run_to.points) >= 2:
        p0, p1 = run_to.points[0].params, run_to.points[1].params
        du = (p1.a - p0.a) / run_to.scale[0]
        dv = (p1.beta - p0.beta) / run_to.scale[1]
        n = math.hypot(du, dv)
        if n > 0:
            run_away.aux["initial_direction"] = (-du / n, -dv / n)
    try:
        continue_curve(
            run_away,
            arc_step,
            stop=default_stop(run_away, window=window, max_points=max_points),
        )
    except ContinuationStall:
        pass
    pts = list(reversed(run_to.points)) + run_away.points[1:]
    return BifCurve(
        kind=run_to.kind,
        points=pts,
        codim=1,
        label=run_to.aux.get("label"),
    )


def loop_section(
    delta: float,
    window: Optional[tuple] = None,
    arc_step: float = 0.02,
    max_points: int = 400,
) -> BifCurve:
    """The saddle-loop curve of a slice, traced both ways from its seed."""
    seeded: dict = {}

    def mk_loop(toward: bool) -> ContinuationRun:
        if "seed" not in seeded:
            r = loop_run(delta, toward_anchor=toward)
            seeded["seed"] = r.seed
            seeded["side"] = r.aux["side"]
            return r
        return loop_run(
            delta,
            seed=seeded["seed"],
            side=seeded["side"],
            toward_anchor=toward,
        )

    return _trace_both_ways(mk_loop, arc_step, window, max_points)


def double_cycle_section(
    delta: float,
    window: Optional[tuple] = None,
    arc_step: float = 0.02,
    max_points: int = 400,
) -> BifCurve:
    """The fold-of-cycles curve of a slice, traced both ways from its
    seed (one-sided when the seed sits at its organizing center)."""
    seeded: dict = {}

    def mk_c(toward: bool) -> ContinuationRun:
        if "seed" not in seeded:
            r = double_cycle_run(delta, toward_anchor=toward)
            seeded["seed"] = r.seed
            seeded["gh_index"] = r.aux.get("gh_index")
            return r
        r = double_cycle_run(
            delta,
            seed=seeded["seed"],
            gh_index=seeded.get("gh_index"),
            toward_anchor=toward,
        )
        if not toward:
            anchor = r.anchor
            p = r.seed
            du = (anchor.a - p.a) / r.scale[0]
            dv = (anchor.beta - p.beta) / r.scale[1]
            n = math.hypot(du, dv)
            if n > 0:
                r.aux["initial_direction"] = (-du / n, -dv / n)
        return r

    return _trace_both_ways(mk_c, arc_step, window, max_points)


def nonlocal_sections(
    delta: float,
    window: Optional[tuple] = None,
    arc_step: float = 0.02,
    max_points: int = 400,
    warnings_out: Optional[list] = None,
) -> list[BifCurve]:
    """Both nonlocal curve sections of a slice (if seedable), traced in
    both directions from their seeds, for diagram assembly.

    The default arc step is diagram-grade: coarse enough that a
    wedge-spanning fold-of-cycles section (several hundred steps) traces
    in minutes, fine enough for region assembly and plotting.  Callers
    wanting curve data for quantitative work should pass a smaller step."""
    curves: list[BifCurve] = []
    try:
        curves.append(double_cycle_section(delta, window, arc_step, max_points))
    except (SeedFailure, ContinuationStall, MeasureFailure) as e:
        if warnings_out is not None:
            warnings_out.append(f"double-cycle section failed at delta={delta}: {e}")
    try:
        curves.append(loop_section(delta, window, arc_step, max_points))
    except (SeedFailure, ContinuationStall, MeasureFailure) as e:
        if warnings_out is not None:
            warnings_out.append(f"loop section failed at delta={delta}: {e}")
    return curves
