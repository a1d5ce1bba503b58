"""Rough phase-portrait classification, slice diagrams, consistency audit.

The atlas ties the algebraic curve sections, the nonlocal continuation
traces, and the trajectory-level detectors together into per-slice
bifurcation diagrams: a parameter window is decomposed into connected
components by the curve arrangement on a rejection grid, one
representative point per component is classified into a portrait
signature, and a transition audit cross-checks every adjacent component
pair against the kind of curve separating it.
"""

from __future__ import annotations

import hashlib
import math
import re
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Optional

from .bifcurves import BifCurve, BifKind, section_polyline, slice_section
from .dynamics import (
    CycleStability,
    LimitCycle,
    NoReturn,
    PoincareSection,
    Trajectory,
    TrajectoryEnd,
    find_limit_cycles,
    separatrices,
)
from .model import (
    DomainError,
    Equilibrium,
    EquilibriumClass,
    OriginRegime,
    Params,
    State,
    boundary_saddle_direction,
    origin_structure,
    solve_equilibria,
)
from .nonlocal_curves import nonlocal_sections

__all__ = [
    "NonRoughParameters",
    "PortraitSignature",
    "SliceDiagram",
    "TransitionViolation",
    "UnmatchedSignatureWarning",
    "classify_portrait",
    "build_slice",
    "transition_audit",
    "default_window",
]


class NonRoughParameters(DomainError):
    """Classification requested too close to the bifurcation set.

    Portrait classification is only well-posed for structurally stable
    (rough) parameter points; a nearly degenerate equilibrium, a
    near-multiple root, or a neutrally stable cycle means the point sits
    within numerical tolerance of a bifurcation surface.
    """


class UnmatchedSignatureWarning(UserWarning):
    """A portrait signature had no entry in the region-label catalog."""


# The curve kinds that actually separate regions of rough portraits; the
# trace-neutral saddle section and the codim-2 point markers are chart
# decorations, not portrait transitions.
_CUTTING_KINDS = (
    BifKind.FOLD,
    BifKind.HOPF,
    BifKind.DOUBLE_CYCLE,
    BifKind.SADDLE_LOOP,
)


# ======================================================================
# portrait signatures


@dataclass(frozen=True)
class PortraitSignature:
    """Topological summary of one rough phase portrait.

    equilibria   : per interior steady state (sorted by x-coordinate),
                   a (class, stability) pair such as ("focus", "stable")
                   or ("saddle", "-").
    cycles       : per detected limit cycle, (enclosing index, stability);
                   the index is the position of the single enclosed
                   antisaddle in ``equilibria``, or -1 for a large cycle
                   enclosing more than one steady state.  Cycles around
                   the same index are listed inside-out.
    connections  : separatrix-connection descriptors — where each branch
                   of the interior saddle limits, where the inward branch
                   of the boundary saddle at (1, 0) limits, and the
                   sector regime at the origin.
    region_label : stable region identifier (see ``_assign_label``).
    """

    equilibria: tuple
    cycles: tuple
    connections: tuple
    region_label: Optional[str] = None

    def swapped(self) -> "PortraitSignature":
        """The signature with the roles of the two antisaddles exchanged.

        For three-equilibria portraits (one saddle between two
        antisaddles) this is the primed-partner involution; portraits
        with fewer steady states are fixed points of the swap.
        """
        if len(self.equilibria) != 3:
            return self
        eqs, cycles, conns = _swap_parts(
            self.equilibria, self.cycles, self.connections
        )
        label, _ = _assign_label(eqs, cycles, conns)
        return PortraitSignature(eqs, cycles, conns, label)


def _swap_descriptor(d: str, n: int) -> str:
    """Rewrite a connection descriptor under the antisaddle swap: branch
    signs flip (the positive branch heads toward the other antisaddle in
    the mirrored portrait), equilibrium indices reverse, and cycle
    enclosure lists are remapped and re-sorted."""
    d = d.replace("u+", "u\0").replace("u-", "u+").replace("u\0", "u-")
    d = d.replace("s+", "s\0").replace("s-", "s+").replace("s\0", "s-")
    d = re.sub(r"eq(\d+)", lambda m: f"eq{n - 1 - int(m.group(1))}", d)

    def remap_cycle(m) -> str:
        idx = sorted(n - 1 - int(t) for t in m.group(1).split(",") if t)
        return "cycle(" + ",".join(map(str, idx)) + ")"

    return re.sub(r"cycle\(([\d,]*)\)", remap_cycle, d)


_CONN_ORDER = ("sep[u+]", "sep[u-]", "sep[s+]", "sep[s-]", "bsep", "origin")


def _conn_rank(d: str) -> int:
    for k, prefix in enumerate(_CONN_ORDER):
        if d.startswith(prefix):
            return k
    return len(_CONN_ORDER)


def _swap_parts(eqs, cycles, conns) -> tuple:
    """The (equilibria, cycles, connections) triple under the antisaddle
    swap: the x-order reverses, cycle indices remap i -> n-1-i (large
    cycles stay -1, and same-index cycles keep their inside-out order),
    and connection descriptors get their indices and branch signs
    rewritten, then return to canonical branch order — so the swap of a
    signature equals the signature the mirrored portrait classifies to."""
    n = len(eqs)
    eqs2 = tuple(reversed(eqs))
    remapped = [((n - 1 - i) if i >= 0 else -1, s) for i, s in cycles]
    cycles2 = tuple(sorted(remapped, key=lambda c: c[0]))
    conns2 = tuple(
        sorted((_swap_descriptor(d, n) for d in conns), key=_conn_rank)
    )
    return eqs2, cycles2, conns2


def _reduced_key(eqs, cycles, conns) -> str:
    return repr((eqs, cycles, conns))


def _content_label(eqs, cycles, conns) -> str:
    """Deterministic region identifier derived from signature content.

    The label is a short digest of the signature's canonical form: a
    signature and its antisaddle-swap share the same stem, and the
    lexicographically larger member of an asymmetric pair carries a
    prime.  Labels are therefore stable under window refinement, and the
    primed involution holds by construction.
    """
    key = _reduced_key(eqs, cycles, conns)
    twin = _reduced_key(*_swap_parts(eqs, cycles, conns)) if len(eqs) == 3 else key
    stem = hashlib.sha1(min(key, twin).encode()).hexdigest()[:6]
    if key == twin:
        return f"R{stem}"
    return f"R{stem}" if key < twin else f"R{stem}'"


#: Empirical signature->label catalog.  Populated only by verified
#: correspondences; signatures not present are labeled by content digest
#: (with a warning), never forced onto the 1-16 numbering.
LABEL_CATALOG: dict[str, str] = {}


def _assign_label(eqs, cycles, conns) -> tuple[str, bool]:
    key = _reduced_key(eqs, cycles, conns)
    if key in LABEL_CATALOG:
        return LABEL_CATALOG[key], True
    return _content_label(eqs, cycles, conns), False


# ======================================================================
# classification


def _describe_equilibrium(e: Equilibrium) -> tuple:
    table = {
        EquilibriumClass.STABLE_NODE: ("node", "stable"),
        EquilibriumClass.UNSTABLE_NODE: ("node", "unstable"),
        EquilibriumClass.STABLE_FOCUS: ("focus", "stable"),
        EquilibriumClass.UNSTABLE_FOCUS: ("focus", "unstable"),
        EquilibriumClass.SADDLE: ("saddle", "-"),
    }
    return table[e.classification]


def _check_roughness(eqs: list, degeneracy_tol: float) -> None:
    for e in eqs:
        if e.multiplicity > 1 or e.classification in (
            EquilibriumClass.SADDLE_NODE,
            EquilibriumClass.DEGENERATE,
        ):
            raise NonRoughParameters(
                f"equilibrium at x0={e.x0:.6g} is degenerate "
                f"(multiplicity {e.multiplicity}, {e.classification.value})"
            )
        if abs(e.det_j) < degeneracy_tol:
            raise NonRoughParameters(
                f"|det J| = {abs(e.det_j):.2e} at x0={e.x0:.6g}: "
                "on a fold surface within tolerance"
            )
        if e.is_antisaddle and abs(e.tr_j) < degeneracy_tol:
            raise NonRoughParameters(
                f"|tr J| = {abs(e.tr_j):.2e} at x0={e.x0:.6g}: "
                "on a trace-zero surface within tolerance"
            )


def _ray_reach(p: Params, anchor: State, direction: tuple) -> float:
    """Largest radius along the scan ray inside the invariant strip.

    The strip is 0 < x < 1, y > 0; upward the reach is capped a little
    above the predator nullcline's ceiling delta/beta, which every
    recurrent orbit stays near.
    """
    y_cap = 2.5 * p.delta / p.beta + 0.2
    r = math.inf
    dx, dy = direction
    for pos, vel, lo, hi in (
        (anchor.x, dx, 1e-3, 1.0 - 1e-3),
        (anchor.y, dy, 1e-3, y_cap),
    ):
        if vel > 0:
            r = min(r, (hi - pos) / vel)
        elif vel < 0:
            r = min(r, (lo - pos) / vel)
    return 0.97 * r


def _orbit_encloses(orbit: list, pt: State) -> bool:
    """Even-odd point-in-polygon test of pt against a closed orbit."""
    inside = False
    n = len(orbit)
    for k in range(n):
        x1, y1 = orbit[k].x, orbit[k].y
        x2, y2 = orbit[(k + 1) % n].x, orbit[(k + 1) % n].y
        if (y1 > pt.y) != (y2 > pt.y):
            x_cross = x1 + (pt.y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > pt.x:
                inside = not inside
    return inside


def _enclosed_antisaddles(orbit: list, eqs: list) -> tuple:
    return tuple(
        i
        for i, e in enumerate(eqs)
        if e.is_antisaddle and _orbit_encloses(orbit, e.state)
    )


def _collect_cycles(
    p: Params, eqs: list, n_scan: int, neutral_tol: float
) -> list[tuple[tuple, LimitCycle]]:
    """Limit cycles found from every antisaddle's scan ray, deduplicated.

    Returns (enclosed-antisaddle-indices, cycle) pairs.  A large cycle
    crosses the rays of several antisaddles and is detected repeatedly;
    detections with the same enclosure set and matching period are
    merged.
    """
    found: list[tuple[tuple, LimitCycle]] = []
    for i, e in enumerate(eqs):
        if not e.is_antisaddle:
            continue
        others = [q for q in eqs if abs(q.x0 - e.x0) > 1e-9]
        if others:
            near = min(
                others, key=lambda q: math.hypot(q.x0 - e.x0, q.y0 - e.y0)
            )
            d = math.hypot(e.x0 - near.x0, e.y0 - near.y0)
            direction = ((e.x0 - near.x0) / d, (e.y0 - near.y0) / d)
        else:
            direction = (1.0, 0.0)
        section = PoincareSection(anchor=e.state, direction=direction)
        r_max = _ray_reach(p, e.state, direction)
        if not r_max > 0:
            continue
        cycles = find_limit_cycles(
            p, e, r_max=r_max, n_scan=n_scan, section=section,
            neutral_tol=neutral_tol,
        )
        for c in cycles:
            enclosed = _enclosed_antisaddles(c.orbit, eqs)
            if not enclosed:
                continue  # section artifact: a cycle encloses its focus
            dup = any(
                enc == enclosed
                and abs(c.period - known.period) < 1e-3 * max(1.0, known.period)
                for enc, known in found
            )
            if not dup:
                found.append((enclosed, c))
    found.sort(key=lambda ec: (ec[0][0] if len(ec[0]) == 1 else -1, ec[1].radius))
    return found


def _canonical_branch_vectors(vu, vs):
    def canon(v):
        if v[0] > 1e-12 or (abs(v[0]) <= 1e-12 and v[1] > 0):
            return v
        return (-v[0], -v[1])

    return canon(vu), canon(vs)


def _tail_states(traj: Trajectory, frac: float = 0.25) -> list:
    k = max(2, int(len(traj.states) * frac))
    return traj.states[-k:]


def _limit_label(traj: Trajectory, eqs: list, boundary_pts: list) -> str:
    """Name the limit set a separatrix branch ran into."""
    if traj.terminated is TrajectoryEnd.LEFT_WINDOW:
        return "window"
    final = traj.final
    targets = [(f"eq{i}", e.state) for i, e in enumerate(eqs)] + boundary_pts
    name, s = min(
        targets, key=lambda ns: math.hypot(final.x - ns[1].x, final.y - ns[1].y)
    )
    if traj.terminated is TrajectoryEnd.CONVERGED_TO_POINT:
        return name
    if math.hypot(final.x - s.x, final.y - s.y) < 1e-5:
        return name
    tail = _tail_states(traj)
    xs = [q.x for q in tail]
    ys = [q.y for q in tail]
    if max(xs) - min(xs) < 1e-6 and max(ys) - min(ys) < 1e-6:
        # crept to a stop short of the convergence monitor
        return name
    enclosed = _enclosed_antisaddles(tail, eqs)
    if enclosed:
        return "cycle(" + ",".join(map(str, enclosed)) + ")"
    return "unresolved"


def classify_portrait(
    p: Params,
    n_scan: int = 40,
    neutral_tol: float = 1e-6,
    degeneracy_tol: float = 1e-8,
) -> PortraitSignature:
    """Portrait signature of a rough parameter point.

    Combines the equilibrium solver, return-map cycle scans around each
    antisaddle, and separatrix shooting of the interior and boundary
    saddles into a :class:`PortraitSignature`.

    Roughness is screened through computable degeneracy indicators: a
    multiple root, a near-zero Jacobian determinant or antisaddle trace,
    or a neutrally stable cycle raises :class:`NonRoughParameters`.
    Proximity to a nonlocal (homoclinic) surface has no cheap local
    indicator; callers sampling near one should expect the separatrix
    targets, not this screen, to reflect it.
    """
    eqs = solve_equilibria(p)
    _check_roughness(eqs, degeneracy_tol)

    eq_desc = tuple(_describe_equilibrium(e) for e in eqs)

    pairs = _collect_cycles(p, eqs, n_scan, neutral_tol)
    for _, c in pairs:
        if c.stability is CycleStability.NEUTRAL:
            raise NonRoughParameters(
                f"neutrally stable cycle (|multiplier - 1| < {neutral_tol:g}): "
                "on a fold-of-cycles surface within tolerance"
            )
    cycles = tuple(
        ((enc[0] if len(enc) == 1 else -1), c.stability.value) for enc, c in pairs
    )

    boundary_pts = [("origin", State(0.0, 0.0)), ("bsaddle", State(1.0, 0.0))]
    conns: list[str] = []
    saddles = [e for e in eqs if e.is_saddle]
    for s in saddles:
        sep = separatrices(p, s)
        vu, vs = _canonical_branch_vectors(sep.unstable_eigvec, sep.stable_eigvec)
        flip_u = vu != sep.unstable_eigvec
        flip_s = vs != sep.stable_eigvec
        branches = [
            ("u+", sep.unstable_minus if flip_u else sep.unstable_plus, "->"),
            ("u-", sep.unstable_plus if flip_u else sep.unstable_minus, "->"),
            ("s+", sep.stable_minus if flip_s else sep.stable_plus, "<-"),
            ("s-", sep.stable_plus if flip_s else sep.stable_minus, "<-"),
        ]
        for name, traj, arrow in branches:
            conns.append(
                f"sep[{name}]{arrow}{_limit_label(traj, eqs, boundary_pts)}"
            )
    # the boundary saddle's inward branch shapes every portrait
    bs = separatrices(p, State(1.0, 0.0))
    _, vin = boundary_saddle_direction(p)
    pick = (
        bs.unstable_plus
        if (bs.unstable_eigvec[0] * vin[0] + bs.unstable_eigvec[1] * vin[1]) > 0
        else bs.unstable_minus
    )
    conns.append(f"bsep->{_limit_label(pick, eqs, boundary_pts)}")
    regime = origin_structure(p).regime
    conns.append(
        "origin[hp]" if regime is OriginRegime.HYPERBOLIC_AND_PARABOLIC else "origin[h]"
    )

    conns_t = tuple(conns)
    label, matched = _assign_label(eq_desc, cycles, conns_t)
    if not matched:
        _warnings.warn(
            f"portrait signature not in the region catalog; content label {label}",
            UnmatchedSignatureWarning,
            stacklevel=2,
        )
    return PortraitSignature(eq_desc, cycles, conns_t, label)


# ======================================================================
# slice diagrams


@dataclass
class SliceDiagram:
    """One fixed-delta bifurcation diagram with its region census.

    regions holds one (sample point, signature) entry per connected
    component of the grid decomposition; cell_region maps grid cells to
    indices into it (-1 where classification failed); adjacency records,
    for every neighboring cell pair, the curve kinds crossing the
    segment between their centers (with multiplicity).
    """

    delta: float
    window: tuple
    curves: list
    codim2_points: list
    regions: list
    warnings: list = field(default_factory=list)
    grid_shape: tuple = (0, 0)
    cell_region: dict = field(default_factory=dict)
    adjacency: list = field(default_factory=list)

    def signature_at(self, i: int, j: int) -> Optional[PortraitSignature]:
        k = self.cell_region.get((i, j), -1)
        return self.regions[k][1] if k >= 0 else None


def default_window(delta: float) -> tuple:
    """Window covering the organizing structure of a slice: the full
    a-extent of the fold and Hopf sections with headroom, and beta up to
    three times the cusp height."""
    s_b = 27.0 * delta / 8.0
    a_hi = 1.0 / 27.0
    for q in section_polyline(BifKind.HOPF, delta, n=256):
        a_hi = max(a_hi, float(q.params.a))
    return ((0.0, 1.15 * a_hi), (0.0, 3.0 * s_b))


def _orient(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    o1 = _orient(p1, p2, q1)
    o2 = _orient(p1, p2, q2)
    o3 = _orient(q1, q2, p1)
    o4 = _orient(q1, q2, p2)
    return o1 * o2 < 0.0 and o3 * o4 < 0.0


def _point_segment_dist(pt, a, b) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(pt[0] - ax, pt[1] - ay)
    t = ((pt[0] - ax) * dx + (pt[1] - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(pt[0] - ax - t * dx, pt[1] - ay - t * dy)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _cutting_chains(curves: list) -> list[tuple[str, list]]:
    chains = []
    for c in curves:
        if c.kind in _CUTTING_KINDS and c.codim == 1 and len(c.points) >= 2:
            chains.append((c.kind.value, c.ab_polyline()))
    return chains


def _segment_crossings(chains, p1, p2) -> tuple:
    kinds = []
    for kind_value, poly in chains:
        for k in range(len(poly) - 1):
            if _segments_cross(p1, p2, poly[k], poly[k + 1]):
                kinds.append(kind_value)
    return tuple(sorted(kinds))


def _clearance(chains, pt) -> float:
    best = math.inf
    for _, poly in chains:
        for k in range(len(poly) - 1):
            best = min(best, _point_segment_dist(pt, poly[k], poly[k + 1]))
    return best


def _classify_worker(args: tuple):
    """Top-level worker for parallel component classification."""
    a, beta, delta, n_scan = args
    try:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", UnmatchedSignatureWarning)
            return classify_portrait(
                Params(a=a, beta=beta, delta=delta), n_scan=n_scan
            ), None
    except (DomainError, RuntimeError) as e:
        return None, f"{type(e).__name__}: {e}"


def build_slice(
    delta: float,
    window: Optional[tuple] = None,
    resolution: int = 20,
    curve_samples: int = 400,
    arc_step: float = 0.02,
    max_curve_points: int = 450,
    include_nonlocal: bool = True,
    classify_retries: int = 4,
    n_scan: int = 40,
    workers: int = 1,
) -> SliceDiagram:
    """Assemble the bifurcation diagram of one fixed-delta slice.

    Computes all curve sections (algebraic ones in closed form, nonlocal
    ones by seeded continuation — their failures become warnings, never
    aborts), locates the codim-2 points, decomposes the window into
    connected components on a resolution-by-resolution grid cut by the
    curve polylines, and classifies one representative parameter point
    per component, retrying on nearby cells when the sample lands too
    close to the bifurcation set.

    Component classification is independent across components; with
    ``workers`` > 1 the first-choice representatives are classified in a
    process pool, retries stay sequential, and the assembled diagram is
    identical to the single-worker result.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if resolution < 2:
        raise DomainError(f"resolution must be at least 2, got {resolution}")
    if window is None:
        window = default_window(delta)
    (a_lo, a_hi), (b_lo, b_hi) = window

    warn: list[str] = []
    extra: list[BifCurve] = []
    if include_nonlocal:
        extra = nonlocal_sections(
            delta,
            arc_step=arc_step,
            max_points=max_curve_points,
            warnings_out=warn,
        )
    curves = slice_section(
        delta, (a_lo, a_hi), (b_lo, b_hi), n=curve_samples, extra_curves=extra
    )
    codim2 = [(c.kind, c.points[0].params) for c in curves if c.codim == 2]
    chains = _cutting_chains(curves)

    nx = ny = resolution
    da, db = (a_hi - a_lo) / nx, (b_hi - b_lo) / ny

    def center(i: int, j: int) -> tuple:
        return (a_lo + (i + 0.5) * da, b_lo + (j + 0.5) * db)

    uf = _UnionFind(nx * ny)
    adjacency = []
    for i in range(nx):
        for j in range(ny):
            for i2, j2 in ((i + 1, j), (i, j + 1)):
                if i2 >= nx or j2 >= ny:
                    continue
                kinds = _segment_crossings(chains, center(i, j), center(i2, j2))
                adjacency.append(((i, j), (i2, j2), kinds))
                if not kinds:
                    uf.union(i * ny + j, i2 * ny + j2)

    components: dict[int, list] = {}
    for i in range(nx):
        for j in range(ny):
            components.setdefault(uf.find(i * ny + j), []).append((i, j))

    ranked_by_root: dict[int, list] = {}
    for root in sorted(components):
        ranked_by_root[root] = sorted(
            components[root], key=lambda c: (-_clearance(chains, center(*c)), c)
        )

    first_results: dict[int, tuple] = {}
    if workers > 1 and len(ranked_by_root) > 1:
        import concurrent.futures

        roots = sorted(ranked_by_root)
        jobs = []
        for root in roots:
            pt = center(*ranked_by_root[root][0])
            jobs.append((pt[0], pt[1], delta, n_scan))
        try:
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers
            ) as pool:
                for root, res in zip(roots, pool.map(_classify_worker, jobs)):
                    first_results[root] = res
        except (OSError, concurrent.futures.process.BrokenProcessPool):
            first_results = {}  # pool unavailable: classify sequentially

    regions: list = []
    cell_region: dict = {}
    for root in sorted(components):
        cells = components[root]
        ranked = ranked_by_root[root]
        sig = None
        sample = None
        for k, cand in enumerate(ranked[: max(1, classify_retries)]):
            pt = center(*cand)
            q = Params(a=pt[0], beta=pt[1], delta=delta)
            if k == 0 and root in first_results:
                sig_k, err = first_results[root]
            else:
                try:
                    sig_k, err = classify_portrait(q, n_scan=n_scan), None
                except (DomainError, RuntimeError) as e:
                    sig_k, err = None, f"{type(e).__name__}: {e}"
            if sig_k is not None:
                sig, sample = sig_k, q
                break
            warn.append(
                f"classification failed at (a={pt[0]:.6g}, beta={pt[1]:.6g}): {err}"
            )
        if sig is None:
            for c in cells:
                cell_region[c] = -1
            continue
        idx = len(regions)
        regions.append((sample, sig))
        for c in cells:
            cell_region[c] = idx

    return SliceDiagram(
        delta=delta,
        window=window,
        curves=curves,
        codim2_points=codim2,
        regions=regions,
        warnings=warn,
        grid_shape=(nx, ny),
        cell_region=cell_region,
        adjacency=adjacency,
    )


# ======================================================================
# transition audit


@dataclass(frozen=True)
class TransitionViolation:
    """One adjacent region pair whose signature change contradicts the
    kind of curve separating it."""

    cell_a: tuple
    cell_b: tuple
    kind: str
    expected: str
    observed: str

    def __str__(self) -> str:
        return (
            f"cells {self.cell_a}-{self.cell_b} across {self.kind}: "
            f"expected {self.expected}, observed {self.observed}"
        )


_EXPECTATION = {
    "T": "equilibrium count change of 2",
    "H": "cycle count change of 1 with a focus stability flip",
    "C": "cycle count change of 2",
    "L": "cycle count change of 1 with a connection change",
}


def _stability_flip(su: PortraitSignature, sv: PortraitSignature) -> bool:
    if len(su.equilibria) != len(sv.equilibria):
        return False
    for eu, ev in zip(su.equilibria, sv.equilibria):
        if {eu[1], ev[1]} == {"stable", "unstable"}:
            return True
    return False


def _transition_ok(kind: str, su: PortraitSignature, sv: PortraitSignature) -> bool:
    dn = abs(len(su.equilibria) - len(sv.equilibria))
    dc = abs(len(su.cycles) - len(sv.cycles))
    if kind == "T":
        return dn == 2
    if kind == "H":
        return dn == 0 and dc == 1 and _stability_flip(su, sv)
    if kind == "C":
        return dn == 0 and dc == 2
    if kind == "L":
        return dn == 0 and dc == 1 and su.connections != sv.connections
    return True


def transition_audit(diagram: SliceDiagram) -> list[TransitionViolation]:
    """Check every audited cell adjacency against its separating curve.

    For each neighboring cell pair the recorded crossing kinds are
    reduced to parity: kinds crossing an even number of times cancel (the
    segment re-enters the region it left), and a pair separated by
    exactly one odd-parity kind must show that kind's signature delta —
    fold: equilibria change by 2; Hopf: one cycle appears or disappears
    and a focus flips stability; double cycle: two cycles; loop: one
    cycle plus a separatrix-connection change.  Pairs crossing several
    distinct kinds (near curve intersections) or touching unclassified
    components are not attributable and are skipped.  One violation is
    reported per (region pair, kind).
    """
    violations: list[TransitionViolation] = []
    seen: set = set()
    for u, v, kinds in diagram.adjacency:
        if not kinds:
            continue
        odd = sorted(k for k in set(kinds) if kinds.count(k) % 2 == 1)
        if len(odd) != 1:
            continue
        ru = diagram.cell_region.get(u, -1)
        rv = diagram.cell_region.get(v, -1)
        if ru < 0 or rv < 0:
            continue
        su = diagram.regions[ru][1]
        sv = diagram.regions[rv][1]
        kind = odd[0]
        if ru == rv:
            # the crossing curve doubled back between the centers without
            # separating them in the arrangement; nothing to audit
            continue
        if not _transition_ok(kind, su, sv):
            dedup = (min(ru, rv), max(ru, rv), kind)
            if dedup in seen:
                continue
            seen.add(dedup)
            violations.append(
                TransitionViolation(
                    cell_a=u,
                    cell_b=v,
                    kind=kind,
                    expected=_EXPECTATION.get(kind, "no change"),
                    observed=(
                        f"equilibria {len(su.equilibria)}->{len(sv.equilibria)}, "
                        f"cycles {len(su.cycles)}->{len(sv.cycles)}, "
                        f"connections "
                        f"{'changed' if su.connections != sv.connections else 'kept'}"
                    ),
                )
            )
    return violations
