"""Local bifurcation sets of the model in closed form.

Interior equilibria are roots of the cubic
F(x) = x^3 - x^2 + (a + delta/beta)x - a, and every local bifurcation
surface of the model admits an explicit rational parameterization by the
equilibrium abscissa tau:

* fold surface (kind tag "T"): double root, F = F' = 0;
* Hopf surface ("H"): simple root with tr J = 0, det J > 0;
* cusp curve ("TT"): triple root at x0 = 1/3;
* double-zero curve ("HT"): F = F' = tr J = 0, both eigenvalues zero;
* degenerate-Hopf set ("GH"): Hopf point where the first focal quantity
  vanishes, found by root scanning along the Hopf parameterization;
* two isolated codim-3 points ("HTT", "DTT").

Everything here is float/Fraction polymorphic: feeding exact rationals in
gives exact curve points out (except gh_points, which root-solves).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .lyapunov import canonicalize, hopf_stability_poly, second_focal_value
from .model import (
    DomainError,
    Params,
    equilibrium_cubic,
    equilibrium_cubic_deriv,
    jacobian_entries,
    solve_equilibria,
)

__all__ = [
    "BifKind",
    "CurvePoint",
    "BifCurve",
    "GHPoint",
    "turning_curve",
    "hopf_curve",
    "neutral_saddle_curve",
    "cusp_point",
    "bt_curve",
    "gh_points",
    "gh_branches",
    "codim3_points",
    "slice_section",
    "polyline_self_intersections",
]


class BifKind(Enum):
    """Curve-kind tags; values are the short labels used in file output."""

    FOLD = "T"
    HOPF = "H"
    CUSP = "TT"
    DOUBLE_ZERO = "HT"
    DEGENERATE_HOPF = "GH"
    CUSP_HOPF = "HTT"
    DEGENERATE_DOUBLE_ZERO = "DTT"
    DOUBLE_CYCLE = "C"
    SADDLE_LOOP = "L"
    NEUTRAL_SADDLE = "NS"

    @property
    def codim(self) -> int:
        if self in (BifKind.FOLD, BifKind.HOPF, BifKind.DOUBLE_CYCLE,
                    BifKind.SADDLE_LOOP, BifKind.NEUTRAL_SADDLE):
            return 1
        if self in (BifKind.CUSP, BifKind.DOUBLE_ZERO, BifKind.DEGENERATE_HOPF):
            return 2
        return 3


@dataclass(frozen=True)
class CurvePoint:
    """One sample of a bifurcation curve.

    tau is the generating parameter (equilibrium abscissa where
    applicable), x0 the associated equilibrium, residual the largest
    violation of the kind's defining equations at this point.
    """

    params: Params
    tau: float | None
    x0: float | None
    residual: float


@dataclass
class BifCurve:
    """A polyline of parameter-space points tagged with a bifurcation kind."""

    kind: BifKind
    points: list[CurvePoint]
    codim: int
    label: str | None = None

    def ab_polyline(self) -> list[tuple[float, float]]:
        return [(float(q.params.a), float(q.params.beta)) for q in self.points]


# ----------------------------------------------------------------------
# closed-form parameterizations


def _residual_at(kinds: str, a, beta, delta, x0) -> float:
    """Largest defining-equation violation; kinds is a subset of 'fdht'."""
    r = 0.0
    if "f" in kinds:
        r = max(r, abs(float(equilibrium_cubic(a, beta, delta, x0))))
    if "d" in kinds:  # F' = 0 (double root)
        r = max(r, abs(float(equilibrium_cubic_deriv(a, beta, delta, x0))))
    y0 = delta * x0 / beta
    j11, j12, j21, j22 = jacobian_entries(a, beta, delta, x0, y0)
    if "t" in kinds:
        r = max(r, abs(float(j11 + j22)))
    if "h" in kinds:  # det = 0
        r = max(r, abs(float(j11 * j22 - j12 * j21)))
    return r


def turning_curve(tau, delta):
    """Fold locus point: the cubic has a double root at x0 = tau.

    Returns (Params, x0).  Valid for 0 < tau < 1/2 (a > 0 there); exact
    over Fractions.
    """
    if not (0 < tau < 0.5):
        raise DomainError(f"fold parameterization needs tau in (0, 1/2), got {tau}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    a = tau * tau - 2 * tau**3
    beta = delta / (2 * tau * (1 - tau) ** 2)
    p = Params(a=a, beta=beta, delta=delta)
    return p, tau


def hopf_curve(tau, delta):
    """Hopf locus point: tr J = 0 with det J > 0 at x0 = tau.

    Returns (Params, x0) when admissible, else None.  Admissibility is
    a > 0 (tau < (2 - delta)/3) together with det J > 0, which under this
    parameterization reduces to 1 - delta - tau > 0.  Exact over
    Fractions.
    """
    if not tau > 0 or not delta > 0:
        return None
    if not (2 - delta - 3 * tau) > 0:  # a > 0
        return None
    if not (1 - delta - tau) > 0:  # det J > 0
        return None
    a = tau * tau * (2 - delta - 3 * tau) / (delta + tau)
    beta = delta * (delta + tau) / (2 * tau * (1 - tau) ** 2)
    return Params(a=a, beta=beta, delta=delta), tau


def neutral_saddle_curve(tau, delta):
    """Continuation of the Hopf parameterization past det J = 0.

    Same formulas, but the zero-trace equilibrium is a saddle
    (det J < 0): a trace-neutral saddle, not a Hopf point.  Plotted
    dashed in slice diagrams; returns None where a <= 0 or det J >= 0.
    """
    if not tau > 0 or not delta > 0:
        return None
    if not (2 - delta - 3 * tau) > 0:
        return None
    if not (1 - delta - tau) < 0:  # det J < 0: the saddle side
        return None
    a = tau * tau * (2 - delta - 3 * tau) / (delta + tau)
    beta = delta * (delta + tau) / (2 * tau * (1 - tau) ** 2)
    return Params(a=a, beta=beta, delta=delta), tau


def cusp_point(delta) -> Params:
    """Cusp of the fold set: the cubic degenerates to (x - 1/3)^3.

    Exact over Fractions (a = 1/27, beta = 27 delta / 8).
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    one = delta / delta
    return Params(a=one / 27, beta=27 * delta / 8, delta=delta)


def bt_curve(tau) -> Params:
    """Double-zero locus: fold and Hopf conditions meet, lambda1 = lambda2 = 0.

    a = tau^2 - 2 tau^3, beta = 1/(2 tau (1 - tau)), delta = 1 - tau for
    tau in (0, 1/2).  Exact over Fractions.
    """
    if not (0 < tau < 0.5):
        raise DomainError(f"double-zero parameterization needs tau in (0, 1/2), got {tau}")
    one = (1 + tau) / (1 + tau)
    a = tau * tau - 2 * tau**3
    beta = one / (2 * tau * (1 - tau))
    return Params(a=a, beta=beta, delta=1 - tau)


def codim3_points() -> list[tuple[BifKind, Params]]:
    """The two isolated codim-3 points.

    The cusp-Hopf point is exact rational (1/27, 9/4, 2/3); the
    degenerate double-zero point is bt_curve(2 - sqrt(3)), with closed
    form (-45 + 26 sqrt 3, (5 + 3 sqrt 3)/4, sqrt 3 - 1).
    """
    s3 = math.sqrt(3.0)
    return [
        (BifKind.CUSP_HOPF, Params(a=1.0 / 27.0, beta=2.25, delta=2.0 / 3.0)),
        (
            BifKind.DEGENERATE_DOUBLE_ZERO,
            Params(a=-45.0 + 26.0 * s3, beta=(5.0 + 3.0 * s3) / 4.0, delta=s3 - 1.0),
        ),
    ]


# ----------------------------------------------------------------------
# degenerate-Hopf points (first focal quantity vanishes on the Hopf locus)


@dataclass(frozen=True)
class GHPoint:
    """A Hopf point with vanishing first focal quantity."""

    params: Params
    x0: float
    l2: float
    tangency: bool = False


def _hopf_tau_max(delta: float) -> float:
    return min(1.0 - delta, (2.0 - delta) / 3.0)


def gh_points(delta: float, n_scan: int = 2000, tol: float = 1e-12) -> list[GHPoint]:
    """All vanishing points of the first focal quantity on the Hopf locus.

    Scans the admissible tau range on a uniform grid, bisects each sign
    change of the specialized stability polynomial to width tol, and
    evaluates the second focal quantity at each root.  Grid minima that
    dip below 1e-8 in magnitude without a sign change are refined and, if
    they vanish to 1e-10, reported once with tangency=True.
    """
    tmax = _hopf_tau_max(delta)
    if tmax <= 2e-6:
        return []
    lo, hi = 1e-6, tmax * (1.0 - 1e-9)
    taus = [lo + (hi - lo) * i / (n_scan - 1) for i in range(n_scan)]
    vals = [hopf_stability_poly(delta, t) for t in taus]

    roots: list[tuple[float, bool]] = []
    for i in range(n_scan - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append((taus[i], False))
            continue
        if v0 * v1 < 0.0:
            x0, x1 = taus[i], taus[i + 1]
            f0 = v0
            while x1 - x0 > tol:
                xm = 0.5 * (x0 + x1)
                fm = hopf_stability_poly(delta, xm)
                if fm == 0.0:
                    x0 = x1 = xm
                    break
                if f0 * fm < 0.0:
                    x1 = xm
                else:
                    x0, f0 = xm, fm
            roots.append((0.5 * (x0 + x1), False))
    if vals and vals[-1] == 0.0:
        roots.append((taus[-1], False))

    # near-tangencies: interior |poly| minima below threshold, no sign change
    for i in range(1, n_scan - 1):
        v = vals[i]
        if abs(v) < 1e-8 and abs(v) <= abs(vals[i - 1]) and abs(v) <= abs(vals[i + 1]):
            if vals[i - 1] * v > 0.0 and v * vals[i + 1] > 0.0:
                x0, x1 = taus[i - 1], taus[i + 1]
                for _ in range(200):  # ternary search on |poly|
                    m1 = x0 + (x1 - x0) / 3.0
                    m2 = x1 - (x1 - x0) / 3.0
                    if abs(hopf_stability_poly(delta, m1)) < abs(
                        hopf_stability_poly(delta, m2)
                    ):
                        x1 = m2
                    else:
                        x0 = m1
                    if x1 - x0 < tol:
                        break
                tm = 0.5 * (x0 + x1)
                if abs(hopf_stability_poly(delta, tm)) < 1e-10:
                    roots.append((tm, True))

    out: list[GHPoint] = []
    for tau, tangent in sorted(roots):
        got = hopf_curve(tau, delta)
        if got is None:
            continue
        p, x0 = got
        eqs = solve_equilibria(p)
        e = min(eqs, key=lambda q: abs(q.x0 - x0))
        frame = canonicalize(p, e)
        out.append(
            GHPoint(params=p, x0=x0, l2=float(second_focal_value(frame.coeffs)),
                    tangency=tangent)
        )
    return out


def gh_branches(
    deltas: list[float], match_window: float = 0.12
) -> list[list[tuple[float, float]]]:
    """Chain per-slice degenerate-Hopf roots into branches over delta.

    Greedy nearest-tau matching between consecutive slices; unmatched
    roots open new branches.  Branches whose endpoints coincide within
    twice the slice spacing are merged (a fold in delta is one component).
    Returns branches as (delta, tau) polylines.
    """
    finished: list[list[tuple[float, float]]] = []
    live: list[list[tuple[float, float]]] = []
    for d in sorted(deltas):
        taus = [g.x0 for g in gh_points(d)]
        claimed = [False] * len(taus)
        still_live: list[list[tuple[float, float]]] = []
        for br in live:
            best, best_dist = None, match_window
            for i, t in enumerate(taus):
                if not claimed[i] and abs(t - br[-1][1]) < best_dist:
                    best, best_dist = i, abs(t - br[-1][1])
            if best is None:
                finished.append(br)
            else:
                claimed[best] = True
                br.append((d, taus[best]))
                still_live.append(br)
        for i, t in enumerate(taus):
            if not claimed[i]:
                still_live.append([(d, t)])
        live = still_live
    finished.extend(live)

    if len(deltas) > 1:
        gap = 2.0 * (max(deltas) - min(deltas)) / (len(deltas) - 1)
        merged = True
        while merged:
            merged = False
            for i in range(len(finished)):
                for j in range(i + 1, len(finished)):
                    ends_i = (finished[i][0], finished[i][-1])
                    ends_j = (finished[j][0], finished[j][-1])
                    if any(
                        abs(pi[0] - pj[0]) <= gap and abs(pi[1] - pj[1]) <= match_window
                        for pi in ends_i
                        for pj in ends_j
                    ):
                        finished[i] = _splice(finished[i], finished[j])
                        del finished[j]
                        merged = True
                        break
                if merged:
                    break
    return finished


def _splice(b1, b2):
    d11, d1n = b1[0][0], b1[-1][0]
    d21, d2n = b2[0][0], b2[-1][0]
    pairs = {
        (abs(d1n - d21)): b1 + b2,
        (abs(d1n - d2n)): b1 + b2[::-1],
        (abs(d11 - d21)): b1[::-1] + b2,
        (abs(d11 - d2n)): b2 + b1,
    }
    return pairs[min(pairs)]


# ----------------------------------------------------------------------
# slice assembly


def _window_contains(window, a: float, b: float) -> bool:
    (a_lo, a_hi), (b_lo, b_hi) = window
    return a_lo <= a <= a_hi and b_lo <= b <= b_hi


def _curve_point(kind: BifKind, tau, delta, built) -> CurvePoint | None:
    if built is None:
        return None
    p, x0 = built
    checks = {
        BifKind.FOLD: "fd",
        BifKind.HOPF: "ft",
        BifKind.NEUTRAL_SADDLE: "ft",
        BifKind.DOUBLE_ZERO: "fdt",
    }[kind]
    res = _residual_at(checks, p.a, p.beta, p.delta, x0)
    return CurvePoint(params=p, tau=float(tau), x0=float(x0), residual=res)


def _sample_parameterized(
    kind: BifKind,
    fn,
    t_lo: float,
    t_hi: float,
    n: int,
    window,
    delta: float,
    max_depth: int = 10,
) -> list[BifCurve]:
    """Adaptively sample fn over [t_lo, t_hi] targeting uniform arc length
    of the (a, beta) image, then clip to the window."""
    (a_lo, a_hi), (b_lo, b_hi) = window
    diag = math.hypot(a_hi - a_lo, b_hi - b_lo)
    target = diag / max(n, 2)

    def make(t):
        try:
            return _curve_point(kind, t, delta, fn(t))
        except DomainError:
            return None

    m = max(33, min(n, 257))
    knots = [(t_lo + (t_hi - t_lo) * i / (m - 1)) for i in range(m)]
    samples: list[tuple[float, CurvePoint | None]] = [(t, make(t)) for t in knots]

    def visible(q: CurvePoint | None) -> bool:
        return q is not None and _window_contains(
            window, float(q.params.a), float(q.params.beta)
        )

    out: list[tuple[float, CurvePoint | None]] = []
    stack: list[tuple[tuple[float, CurvePoint | None], tuple[float, CurvePoint | None], int]]
    for i in range(m - 1):
        left, right = samples[i], samples[i + 1]
        out.append(left)
        stack = [(left, right, 0)]
        acc: list[tuple[float, CurvePoint | None]] = []
        while stack:
            seg_l, seg_r, depth = stack.pop()
            (tl, ql), (tr, qr) = seg_l, seg_r
            split = False
            if depth < max_depth:
                if ql is not None and qr is not None:
                    da = float(qr.params.a) - float(ql.params.a)
                    db = float(qr.params.beta) - float(ql.params.beta)
                    if math.hypot(da, db) > target and (visible(ql) or visible(qr)):
                        split = True
                elif (ql is None) != (qr is None):
                    split = True  # admissibility edge: refine toward it
            if split:
                mid = (0.5 * (tl + tr), make(0.5 * (tl + tr)))
                stack.append((mid, seg_r, depth + 1))
                stack.append((seg_l, mid, depth + 1))
            else:
                if seg_l is not left:
                    acc.append(seg_l)
        acc.sort(key=lambda s: s[0])
        out.extend(acc)
    out.append(samples[-1])

    curves: list[BifCurve] = []
    run: list[CurvePoint] = []
    for t, q in out:
        if visible(q):
            run.append(q)
        else:
            if len(run) >= 2:
                curves.append(BifCurve(kind=kind, points=run, codim=kind.codim))
            run = []
    if len(run) >= 2:
        curves.append(BifCurve(kind=kind, points=run, codim=kind.codim))
    return curves


def slice_section(
    delta: float,
    a_range: tuple[float, float],
    beta_range: tuple[float, float],
    n: int = 400,
    extra_curves: list[BifCurve] | None = None,
) -> list[BifCurve]:
    """All local bifurcation curves of the fixed-delta slice, clipped to
    the (a, beta) window.

    Emits the fold and Hopf polylines (plus the trace-neutral saddle
    extension where present), the cusp and double-zero points when they
    fall inside the window, and the degenerate-Hopf points.  Nonlocal
    curves computed elsewhere can be appended (clipped) via extra_curves.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    window = (tuple(a_range), tuple(beta_range))
    eps = 1e-7
    curves: list[BifCurve] = []

    curves += _sample_parameterized(
        BifKind.FOLD, lambda t: turning_curve(t, delta), eps, 0.5 - eps, n, window, delta
    )
    tmax = _hopf_tau_max(delta)
    if tmax > 2 * eps:
        curves += _sample_parameterized(
            BifKind.HOPF,
            lambda t: hopf_curve(t, delta),
            eps,
            tmax * (1 - 1e-9),
            n,
            window,
            delta,
        )
    ns_lo = max(eps, (1.0 - delta) * (1 + 1e-9))
    ns_hi = (2.0 - delta) / 3.0 * (1 - 1e-9)
    if ns_hi > ns_lo:
        curves += _sample_parameterized(
            BifKind.NEUTRAL_SADDLE,
            lambda t: neutral_saddle_curve(t, delta),
            ns_lo,
            ns_hi,
            n,
            window,
            delta,
        )

    cp = cusp_point(delta)
    if _window_contains(window, float(cp.a), float(cp.beta)):
        res = _residual_at("fd", cp.a, cp.beta, cp.delta, 1.0 / 3.0)
        curves.append(
            BifCurve(
                kind=BifKind.CUSP,
                points=[CurvePoint(params=cp, tau=1.0 / 3.0, x0=1.0 / 3.0, residual=res)],
                codim=2,
            )
        )
    if 0.5 < delta < 1.0:
        bp = bt_curve(1.0 - delta)
        if _window_contains(window, float(bp.a), float(bp.beta)):
            res = _residual_at("fdt", bp.a, bp.beta, bp.delta, 1.0 - delta)
            curves.append(
                BifCurve(
                    kind=BifKind.DOUBLE_ZERO,
                    points=[
                        CurvePoint(params=bp, tau=1.0 - delta, x0=1.0 - delta, residual=res)
                    ],
                    codim=2,
                )
            )
    for g in gh_points(delta):
        if _window_contains(window, float(g.params.a), float(g.params.beta)):
            res = _residual_at("ft", g.params.a, g.params.beta, g.params.delta, g.x0)
            curves.append(
                BifCurve(
                    kind=BifKind.DEGENERATE_HOPF,
                    points=[CurvePoint(params=g.params, tau=g.x0, x0=g.x0, residual=res)],
                    codim=2,
                    label="tangency" if g.tangency else None,
                )
            )

    if extra_curves:
        for c in extra_curves:
            kept = [
                q
                for q in c.points
                if _window_contains(window, float(q.params.a), float(q.params.beta))
            ]
            if kept:
                curves.append(BifCurve(kind=c.kind, points=kept, codim=c.codim, label=c.label))
    return curves


def section_polyline(
    kind: BifKind, delta: float, n: int = 800
) -> list[CurvePoint]:
    """Full unclipped polyline of one parameterized section at fixed delta.

    Supports the fold, Hopf, and neutral-saddle kinds; used for topology
    checks (self-intersections, wedge tests) that clipping would distort.
    """
    eps = 1e-7
    if kind is BifKind.FOLD:
        fn, lo, hi = (lambda t: turning_curve(t, delta)), eps, 0.5 - eps
    elif kind is BifKind.HOPF:
        tmax = _hopf_tau_max(delta)
        if tmax <= 2 * eps:
            return []
        fn, lo, hi = (lambda t: hopf_curve(t, delta)), eps, tmax * (1 - 1e-9)
    elif kind is BifKind.NEUTRAL_SADDLE:
        lo = max(eps, (1.0 - delta) * (1 + 1e-9))
        hi = (2.0 - delta) / 3.0 * (1 - 1e-9)
        if hi <= lo:
            return []
        fn = lambda t: neutral_saddle_curve(t, delta)
    else:
        raise ValueError(f"no tau parameterization for kind {kind}")

    def make(t):
        try:
            return _curve_point(kind, t, delta, fn(t))
        except DomainError:
            return None

    coarse = [make(lo + (hi - lo) * i / 256) for i in range(257)]
    live = [q for q in coarse if q is not None]
    if not live:
        return []
    a_vals = [float(q.params.a) for q in live]
    b_vals = [float(q.params.beta) for q in live]
    pad_a = 0.05 * (max(a_vals) - min(a_vals)) + 1e-12
    pad_b = 0.05 * (max(b_vals) - min(b_vals)) + 1e-12
    window = (
        (min(a_vals) - pad_a, max(a_vals) + pad_a),
        (min(b_vals) - pad_b, max(b_vals) + pad_b),
    )
    runs = _sample_parameterized(kind, fn, lo, hi, n, window, delta)
    pts: list[CurvePoint] = []
    for c in runs:
        pts.extend(c.points)
    return pts


# ----------------------------------------------------------------------
# polyline utilities


def polyline_self_intersections(
    pts: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Proper self-intersections of an open polyline (adjacent segments
    excluded), by exact orientation tests on each non-adjacent pair."""

    def seg_inter(p, q, r, s):
        d1 = (q[0] - p[0], q[1] - p[1])
        d2 = (s[0] - r[0], s[1] - r[1])
        den = d1[0] * d2[1] - d1[1] * d2[0]
        if den == 0.0:
            return None
        t = ((r[0] - p[0]) * d2[1] - (r[1] - p[1]) * d2[0]) / den
        u = ((r[0] - p[0]) * d1[1] - (r[1] - p[1]) * d1[0]) / den
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return (p[0] + t * d1[0], p[1] + t * d1[1])
        return None

    hits: list[tuple[float, float]] = []
    nseg = len(pts) - 1
    for i in range(nseg):
        for j in range(i + 2, nseg):
            got = seg_inter(pts[i], pts[i + 1], pts[j], pts[j + 1])
            if got is not None:
                hits.append(got)
    # de-duplicate near-coincident hits from refined sampling
    uniq: list[tuple[float, float]] = []
    for h in hits:
        if all(math.hypot(h[0] - u[0], h[1] - u[1]) > 1e-9 for u in uniq):
            uniq.append(h)
    return uniq
