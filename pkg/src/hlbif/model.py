"""Scaled predator-prey vector fields, equilibria, and linearization.

The model lives on the open strip {0 < x < 1, y > 0} with three positive
parameters (a, beta, delta)::

    x' = x (1 - x) - x y / (a + x^2)
    y' = y (delta - beta y / x)

Multiplying both components by x rescales time (for x > 0) and yields a
polynomial companion field that is analytic at the origin::

    x' = x^2 (1 - x) - x^2 y / (a + x^2)
    y' = delta x y - beta y^2

Both fields trace the same orbits inside the strip.  Interior equilibria
satisfy y0 = (delta/beta) x0 where x0 is a root in (0, 1) of the cubic

    F(x) = x^3 - x^2 + (a + delta/beta) x - a.

F is negative at 0 and positive at 1, and has no real roots outside (0, 1),
so there are always one to three interior equilibria, counted with
multiplicity.

Arithmetic here is written polymorphically: every evaluation helper accepts
``float`` or ``fractions.Fraction`` inputs and preserves the type, so the
algebraic identities in the test suite can be checked in exact rational
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

__all__ = [
    "Params",
    "State",
    "Tolerances",
    "EquilibriumClass",
    "Equilibrium",
    "OriginRegime",
    "OriginStructure",
    "BoundaryState",
    "DomainError",
    "rhs_original",
    "rhs_rescaled",
    "cubic_coefficients",
    "equilibrium_cubic",
    "equilibrium_cubic_deriv",
    "jacobian_entries",
    "jacobian",
    "det_indicator",
    "trace_indicator",
    "solve_cubic",
    "solve_equilibria",
    "solve_equilibria_exact",
    "classify_equilibrium",
    "origin_structure",
    "boundary_states",
    "boundary_saddle_direction",
    "from_unscaled",
]


class DomainError(ValueError):
    """A parameter or state fell outside the model's domain."""


@dataclass(frozen=True)
class Params:
    """Positive model parameters (a, beta, delta)."""

    a: float
    beta: float
    delta: float

    def __post_init__(self) -> None:
        for name in ("a", "beta", "delta"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"parameter {name} must be positive, got {v!r}")


@dataclass(frozen=True)
class State:
    """A phase-space point."""

    x: float
    y: float


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the algebraic routines.

    residual     : max |F(x0)| accepted for a polished equilibrium root
    degenerate   : |det J| (and |tr J|) below this counts as degenerate
    clustering   : relative root separation below this merges into one
                   multiple root
    """

    residual: float = 1e-10
    degenerate: float = 1e-8
    clustering: float = 1e-7


DEFAULT_TOL = Tolerances()


class EquilibriumClass(Enum):
    STABLE_NODE = "stable_node"
    UNSTABLE_NODE = "unstable_node"
    STABLE_FOCUS = "stable_focus"
    UNSTABLE_FOCUS = "unstable_focus"
    SADDLE = "saddle"
    SADDLE_NODE = "saddle_node"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Equilibrium:
    """An interior steady state with its linearization summary."""

    x0: float
    y0: float
    multiplicity: int
    det_j: float
    tr_j: float
    classification: EquilibriumClass

    @property
    def state(self) -> State:
        return State(self.x0, self.y0)

    @property
    def is_saddle(self) -> bool:
        return self.classification is EquilibriumClass.SADDLE

    @property
    def is_antisaddle(self) -> bool:
        """Node or focus (det > 0), whatever the stability."""
        return self.classification in (
            EquilibriumClass.STABLE_NODE,
            EquilibriumClass.UNSTABLE_NODE,
            EquilibriumClass.STABLE_FOCUS,
            EquilibriumClass.UNSTABLE_FOCUS,
        )


class OriginRegime(Enum):
    #: delta <= 1: the interior angle at the origin is a single hyperbolic
    #: sector; no trajectory leaves the origin into the interior.
    HYPERBOLIC_ONLY = "hyperbolic_only"
    #: delta > 1: a parabolic sector of outgoing trajectories appears below
    #: the separating trajectory.
    HYPERBOLIC_AND_PARABOLIC = "hyperbolic_and_parabolic"


@dataclass(frozen=True)
class OriginStructure:
    """Sector decomposition of the rescaled field at the origin.

    ``outgoing_angle`` is the polar angle of the single trajectory separating
    the hyperbolic sector (above) from the parabolic sector (below); it is
    None when delta <= 1.  Trajectories inside the parabolic sector leave the
    origin tangent to the x-axis with asymptotics y ~ k x**exponent.
    """

    regime: OriginRegime
    outgoing_angle: float | None
    asymptotic_exponent: float


@dataclass(frozen=True)
class BoundaryState:
    """A boundary steady state of the rescaled field."""

    state: State
    kind: str                      # "origin" or "prey_capacity_saddle"
    eigenvalues: tuple[float, float] | None


# ----------------------------------------------------------------------
# vector fields


def rhs_original(p: Params, s: State) -> tuple[float, float]:
    """Right-hand side of the strip system; requires x > 0."""
    x, y = s.x, s.y
    if not x > 0:
        raise DomainError(f"x must be positive for the original field, got {x!r}")
    return (
        x * (1 - x) - x * y / (p.a + x * x),
        y * (p.delta - p.beta * y / x),
    )


def rhs_rescaled(p: Params, s: State) -> tuple[float, float]:
    """Right-hand side of the time-rescaled polynomial field (x >= 0)."""
    x, y = s.x, s.y
    return (
        x * x * (1 - x) - x * x * y / (p.a + x * x),
        p.delta * x * y - p.beta * y * y,
    )


# ----------------------------------------------------------------------
# equilibrium cubic


def cubic_coefficients(a, beta, delta) -> tuple:
    """Monic coefficients (1, c2, c1, c0) of the equilibrium cubic F."""
    one = a / a  # preserves Fraction vs float
    return (one, -one, a + delta / beta, -a)


def equilibrium_cubic(a, beta, delta, x):
    """F(x) = x^3 - x^2 + (a + delta/beta) x - a."""
    return ((x - 1) * x + (a + delta / beta)) * x - a


def equilibrium_cubic_deriv(a, beta, delta, x):
    """F'(x) = 3x^2 - 2x + (a + delta/beta)."""
    return (3 * x - 2) * x + (a + delta / beta)


# ----------------------------------------------------------------------
# linearization


def jacobian_entries(a, beta, delta, x, y) -> tuple:
    """Partial derivatives of the strip field at (x, y), row-major.

    Polymorphic over float/Fraction; x must be nonzero.
    """
    d = a + x * x
    j11 = 1 - 2 * x - y * (a - x * x) / (d * d)
    j12 = -x / d
    j21 = beta * y * y / (x * x)
    j22 = delta - 2 * beta * y / x
    return (j11, j12, j21, j22)


def jacobian(p: Params, s: State):
    """2x2 Jacobian of the strip field at ``s`` as a numpy array."""
    import numpy as np

    j11, j12, j21, j22 = jacobian_entries(p.a, p.beta, p.delta, s.x, s.y)
    return np.array([[j11, j12], [j21, j22]], dtype=float)


def det_indicator(a, beta, delta, x0):
    """Polynomial sharing the *sign* of det J at an interior equilibrium.

    Equals (beta (a + x0^2)^2 / delta) * det J whenever x0 solves the
    equilibrium cubic, i.e. a positive multiple of the determinant.
    """
    return (
        -(a * a) * beta
        + 2 * a * a * beta * x0
        + 2 * a * delta * x0
        - 2 * a * beta * x0**2
        + 4 * a * beta * x0**3
        - beta * x0**4
        + 2 * beta * x0**5
    )


def trace_indicator(a, delta, x0):
    """Polynomial sharing the sign of *minus* tr J at an interior equilibrium.

    Equals -(a + x0^2) * tr J on the equilibrium set: positive exactly where
    the trace is negative.  (The sign convention is pinned down by the
    concrete case a = beta = delta = 1, whose unique equilibrium has tr < 0
    while this polynomial is positive.)
    """
    return a * delta + a * x0 - 2 * x0**2 + delta * x0**2 + 3 * x0**3


# ----------------------------------------------------------------------
# numeric cubic solver


def solve_cubic(c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of x^3 + c2 x^2 + c1 x + c0, unsorted and unpolished.

    Uses the trigonometric form when all roots are real and the signed cube
    root otherwise.  A conjugate pair whose imaginary part is below ~1e-9 of
    the root scale is collapsed onto the real axis (the caller's clustering
    step decides the multiplicity).
    """
    # depressed cubic t^3 + p t + q, x = t - c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0
    scale = max(1.0, abs(p)) ** 0.5
    disc = -4.0 * p * p * p - 27.0 * q * q
    if disc >= 0.0 and p < 0.0:
        # three real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        den = p * m  # can underflow to -0.0 for subnormal coefficients
        if den == 0.0:
            arg = 0.0 if q == 0.0 else -math.copysign(1.0, q)
        else:
            arg = 3.0 * q / den
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        return [
            m * math.cos(theta) - shift,
            m * math.cos(theta - 2.0 * math.pi / 3.0) - shift,
            m * math.cos(theta - 4.0 * math.pi / 3.0) - shift,
        ]
    # one real root via the signed cube root; possibly a near-real pair
    half_q = q / 2.0
    rad = half_q * half_q + p * p * p / 27.0
    if rad >= 0.0:
        root = math.sqrt(rad)
        u = math.copysign(abs(-half_q + root) ** (1.0 / 3.0), -half_q + root)
        v = math.copysign(abs(-half_q - root) ** (1.0 / 3.0), -half_q - root)
        t1 = u + v
    else:  # disc ~ 0 rounding: fall back to trig on clamped argument
        m = 2.0 * math.sqrt(max(-p, 0.0) / 3.0)
        den = p * m
        if den == 0.0:
            arg = 0.0 if q == 0.0 else -math.copysign(1.0, q)
        else:
            arg = 3.0 * q / den
        t1 = m * math.cos(math.acos(min(1.0, max(-1.0, arg))) / 3.0)
    roots = [t1 - shift]
    # remaining quadratic t^2 + t1 t + (t1^2 + p); a conjugate pair whose
    # imaginary part is below the clustering scale collapses to a double root
    disc2 = -3.0 * t1 * t1 - 4.0 * p
    if disc2 >= 0.0:
        half = math.sqrt(disc2) / 2.0
        roots.append(-t1 / 2.0 + half - shift)
        roots.append(-t1 / 2.0 - half - shift)
    elif disc2 > -4e-14 * max(1.0, scale * scale):
        roots.append(-t1 / 2.0 - shift)
        roots.append(-t1 / 2.0 - shift)
    return roots


def _newton_polish(a: float, beta: float, delta: float, x: float, steps: int = 3) -> float:
    for _ in range(steps):
        fp = equilibrium_cubic_deriv(a, beta, delta, x)
        if fp == 0.0:
            break
        step = equilibrium_cubic(a, beta, delta, x) / fp
        if abs(step) > 0.1:  # far from a simple root; leave as-is
            break
        x -= step
    return x


def _cluster_roots(roots: Sequence[float], tol_rel: float) -> list[list[float]]:
    ordered = sorted(roots)
    groups: list[list[float]] = [[ordered[0]]]
    for r in ordered[1:]:
        if abs(r - groups[-1][-1]) <= tol_rel * max(1.0, abs(r)):
            groups[-1].append(r)
        else:
            groups.append([r])
    return groups


def classify_equilibrium(
    det_j: float,
    tr_j: float,
    cubic_curvature: float,
    tol: Tolerances = DEFAULT_TOL,
) -> EquilibriumClass:
    """Classify a linearization by determinant and trace.

    ``cubic_curvature`` is F''(x0); it separates a saddle-node (fold of the
    cubic, curvature nonzero) from a fully degenerate root.
    """
    if abs(det_j) <= tol.degenerate:
        if abs(tr_j) <= tol.degenerate or abs(cubic_curvature) <= tol.degenerate:
            return EquilibriumClass.DEGENERATE
        return EquilibriumClass.SADDLE_NODE
    if det_j < 0.0:
        return EquilibriumClass.SADDLE
    disc = tr_j * tr_j - 4.0 * det_j
    if disc >= 0.0:
        return (
            EquilibriumClass.STABLE_NODE if tr_j < 0.0 else EquilibriumClass.UNSTABLE_NODE
        )
    return (
        EquilibriumClass.STABLE_FOCUS if tr_j < 0.0 else EquilibriumClass.UNSTABLE_FOCUS
    )


def solve_equilibria(p: Params, tol: Tolerances = DEFAULT_TOL) -> list[Equilibrium]:
    """All interior equilibria, sorted by x0, with multiplicities.

    Roots are found in closed form, polished by Newton, and clustered at
    relative separation ``tol.clustering``; a cluster of two is refined as a
    root of F', a cluster of three collapses to the exact triple root 1/3
    (forced by the root-sum identity of the monic cubic).
    """
    a, beta, delta = p.a, p.beta, p.delta
    _, c2, c1, c0 = cubic_coefficients(a, beta, delta)
    raw = solve_cubic(c2, c1, c0)
    polished = [_newton_polish(a, beta, delta, r) for r in raw]
    inside = [r for r in polished if -0.01 < r < 1.01]
    if not inside:
        raise DomainError(
            f"no equilibrium root found in (0, 1) for {p}; roots were {polished}"
        )
    out: list[Equilibrium] = []
    for group in _cluster_roots(inside, tol.clustering):
        mult = len(group)
        if mult == 1:
            x0 = group[0]
        elif mult == 2:
            # double root: Newton on F', which has a simple root there
            x0 = sum(group) / 2.0
            for _ in range(40):
                step = equilibrium_cubic_deriv(a, beta, delta, x0) / (6.0 * x0 - 2.0)
                x0 -= step
                if abs(step) < 1e-16:
                    break
        else:
            x0 = 1.0 / 3.0
        resid = abs(equilibrium_cubic(a, beta, delta, x0))
        if mult == 1 and resid > tol.residual:
            raise DomainError(
                f"equilibrium residual {resid:.3e} exceeds {tol.residual:.1e} at x0={x0!r}"
            )
        y0 = delta / beta * x0
        j11, j12, j21, j22 = jacobian_entries(a, beta, delta, x0, y0)
        det_j = j11 * j22 - j12 * j21
        tr_j = j11 + j22
        cls = classify_equilibrium(det_j, tr_j, 6.0 * x0 - 2.0, tol)
        out.append(Equilibrium(x0, y0, mult, det_j, tr_j, cls))
    if sum(e.multiplicity for e in out) > 3:
        raise DomainError(f"equilibrium multiplicities exceed 3 for {p}")
    return out


# ----------------------------------------------------------------------
# exact mode


def solve_equilibria_exact(
    a: Fraction, beta: Fraction, delta: Fraction
) -> list[tuple[Fraction, int]] | None:
    """Exact multiple-root structure of the equilibrium cubic over Q.

    Returns [(root, multiplicity), ...] sorted by root when F has a multiple
    root (double and triple roots of a rational cubic are always rational),
    and None when all roots are simple (generically irrational; callers fall
    back to the float solver).  Uses the Euclidean gcd of F and F'.
    """
    c = [Fraction(1), Fraction(-1), a + delta / beta, -a]
    dc = [Fraction(3), Fraction(-2), c[2]]

    def poly_mod(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
        num = list(num)
        while len(num) >= len(den) and any(num):
            if num[0] == 0:
                num.pop(0)
                continue
            q = num[0] / den[0]
            for i in range(len(den)):
                num[i] -= q * den[i]
            num.pop(0)
        while num and num[0] == 0:
            num.pop(0)
        return num

    g1, g2 = c, dc
    while g2:
        g1, g2 = g2, poly_mod(g1, g2)
    gcd = g1
    if len(gcd) == 1:  # constant gcd: all roots simple
        return None
    if len(gcd) == 2:  # linear gcd: one double root
        double = -gcd[1] / gcd[0]
        simple = 1 - 2 * double  # roots of the monic cubic sum to 1
        pair = [(double, 2), (simple, 1)]
        return sorted(pair, key=lambda t: t[0])
    # quadratic gcd: triple root, necessarily at 1/3
    return [(Fraction(1, 3), 3)]


# ----------------------------------------------------------------------
# boundary of the strip


def origin_structure(p: Params) -> OriginStructure:
    """Sector decomposition of the rescaled field at (0, 0).

    The quadratic leading part has interior characteristic direction
    tan(theta) = (delta - 1)/beta, which exists precisely for delta > 1; the
    outgoing trajectories below it satisfy y ~ k x**delta.
    """
    if p.delta > 1.0:
        return OriginStructure(
            OriginRegime.HYPERBOLIC_AND_PARABOLIC,
            math.atan2(p.delta - 1.0, p.beta),
            p.delta,
        )
    return OriginStructure(OriginRegime.HYPERBOLIC_ONLY, None, p.delta)


def boundary_saddle_direction(p: Params) -> tuple[float, tuple[float, float]]:
    """Unstable eigenvalue and inward unit eigenvector at (1, 0).

    The Jacobian there is triangular with eigenvalues (-1, delta), so (1, 0)
    is always a hyperbolic saddle; the returned eigenvector points into the
    strip (negative x-component, positive y-component).
    """
    lam = p.delta
    v = (-1.0, (1.0 + p.delta) * (p.a + 1.0))
    n = math.hypot(*v)
    return lam, (v[0] / n, v[1] / n)


def boundary_states(p: Params) -> list[BoundaryState]:
    """The two boundary steady states of the rescaled field."""
    lam, _ = boundary_saddle_direction(p)
    return [
        BoundaryState(State(0.0, 0.0), "origin", None),
        BoundaryState(State(1.0, 0.0), "prey_capacity_saddle", (-1.0, lam)),
    ]


# ----------------------------------------------------------------------
# dimensional reduction


def from_unscaled(
    r: float, s: float, K: float, h: float, m: float, b: float
) -> tuple[Params, dict[str, float]]:
    """Map the dimensional model to scaled parameters.

    The dimensional system
        X' = r X (1 - X/K) - m X Y / (b + X^2)
        Y' = s Y (1 - Y/(h X))
    becomes the scaled one under x = X/K, y = m Y/(r K^2), t_scaled = r t:

        a = b / K^2,   delta = s / r,   beta = s K / (m h).

    Returns the Params plus the state/time scale factors, so trajectories
    can be mapped back: X = K x, Y = (r K^2/m) y, t = t_scaled / r.
    """
    for name, v in (("r", r), ("s", s), ("K", K), ("h", h), ("m", m), ("b", b)):
        if not v > 0:
            raise DomainError(f"dimensional parameter {name} must be positive, got {v!r}")
    p = Params(a=b / K**2, beta=s * K / (m * h), delta=s / r)
    scales = {"x": K, "y": r * K**2 / m, "t": 1.0 / r}
    return p, scales
