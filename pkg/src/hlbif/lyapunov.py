"""Focal (Lyapunov) quantities of a fine focus.

A fine focus is an equilibrium whose linearization has a conjugate
imaginary pair (tr J = 0, det J > 0).  Its stability is decided by the
first nonzero focal quantity.  This module provides

* ``canonicalize``: an affine change of variables plus time rescaling that
  brings the model to the canonical *clockwise* frame

      u' =  v + P(u, v),      v' = -u + Q(u, v),

  with P = sum a_ij u^i v^j, Q = sum b_ij u^i v^j through degree 5;
* ``first_focal_value`` / ``second_focal_value``: closed-form polynomial
  expressions in the a_ij, b_ij (negative value = stable focus);
* ``hopf_stability_poly``: a factored expression of the first quantity
  specialized to this model's Hopf locus, as a polynomial in (delta, x0);
* ``focal_values_lyapunov_function``: an independent computation of the
  same quantities by building a formal Lyapunov function degree by degree
  (exact over Fractions), used to cross-validate the closed forms;
* ``return_map_coefficient``: a numeric oracle fitting the leading
  coefficient of the return-map displacement on a ray.

Orientation matters and is easy to get wrong: the strip field rotates
*counterclockwise* about an interior focus (its Jacobian has lower-left
entry beta (y/x)^2 > 0), so the canonicalizing transform is
orientation-reversing, taking that rotation to the clockwise frame above.
The closed-form coefficient expressions are only sign-correct in this
frame; the cross-validation tests pin the convention down against the
return map.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .model import DomainError, Equilibrium, Params, jacobian_entries
from .series import (
    Poly,
    compose_linear,
    poly_add,
    poly_mul,
    poly_scale,
    reciprocal_series,
    solve_linear,
)

__all__ = [
    "TaylorCoeffs",
    "FineFocusFrame",
    "OracleInconclusive",
    "model_taylor",
    "canonicalize",
    "first_focal_value",
    "second_focal_value",
    "FIRST_FOCAL_TERMS",
    "SECOND_FOCAL_TERMS",
    "hopf_stability_poly",
    "focal_values_lyapunov_function",
    "return_map_coefficient",
]


class OracleInconclusive(RuntimeError):
    """The return-map fit could not establish a sign."""


@dataclass(frozen=True)
class TaylorCoeffs:
    """Canonical-frame Taylor coefficients, total degree 2 through 5.

    ``a`` holds the coefficients of the u-equation's nonlinearity P,
    ``b`` those of the v-equation's Q, keyed by (i, j) with i + j >= 2.
    """

    a: Poly
    b: Poly

    def a_(self, i: int, j: int):
        return self.a.get((i, j), 0)

    def b_(self, i: int, j: int):
        return self.b.get((i, j), 0)


@dataclass(frozen=True)
class FineFocusFrame:
    """Result of canonicalizing the model at a fine focus.

    The affine map is s = center + T z with z the canonical coordinates;
    time is rescaled by the frequency.  ``linear_residual`` is the largest
    deviation of the transformed linear part from ((0, 1), (-1, 0)).
    """

    center: tuple[float, float]
    frequency: float
    transform: tuple[tuple[float, float], tuple[float, float]]
    inverse: tuple[tuple[float, float], tuple[float, float]]
    coeffs: TaylorCoeffs
    linear_residual: float


# ----------------------------------------------------------------------
# Taylor expansion of the model about an interior point


def model_taylor(a, beta, delta, x0, y0, order: int = 5) -> tuple[Poly, Poly]:
    """Taylor polynomials of the strip field about (x0, y0).

    Returns (f, g) as truncated polynomials in the offsets (u, w); exact
    when all inputs are Fractions.  The only non-polynomial ingredients are
    1/(a + x^2) and 1/x, both expanded as geometric series.
    """
    one = (a + x0) / (a + x0)  # 1 in the input field
    D = a + x0 * x0
    # S(u) = 1/(a + (x0+u)^2), a series in u alone
    S = reciprocal_series({(0, 0): D, (1, 0): 2 * x0, (2, 0): one}, order)
    xs: Poly = {(0, 0): x0, (1, 0): one}
    G = poly_mul(xs, S, order)  # (x0+u) / (a + (x0+u)^2)
    yw: Poly = {(0, 0): y0, (0, 1): one}
    f = poly_add(
        poly_add(xs, poly_scale(poly_mul(xs, xs, order), -1)),
        poly_scale(poly_mul(yw, G, order), -1),
    )
    H = reciprocal_series({(0, 0): x0, (1, 0): one}, order)  # 1/(x0+u)
    ysq = poly_mul(yw, yw, order)
    g = poly_add(poly_scale(yw, delta), poly_scale(poly_mul(ysq, H, order), -beta))
    return f, g


# ----------------------------------------------------------------------
# canonical frame


def canonicalize(
    p: Params,
    e: Equilibrium,
    order: int = 5,
    trace_tol: float = 1e-8,
) -> FineFocusFrame:
    """Bring the model at a fine focus to the clockwise canonical frame.

    Requires |tr J| <= trace_tol and det J > 0; the trace is projected out
    before the transform is built, so the linear part is canonical to
    rounding.  The new-time field is (1/frequency) T^-1 F(center + T z).
    """
    x0, y0 = e.x0, e.y0
    j11, j12, j21, j22 = jacobian_entries(p.a, p.beta, p.delta, x0, y0)
    tr = j11 + j22
    det = j11 * j22 - j12 * j21
    if not det > 0:
        raise DomainError(f"not a focus candidate: det J = {det:.3e} <= 0")
    if abs(tr) > trace_tol:
        raise DomainError(f"not a fine focus: |tr J| = {abs(tr):.3e} > {trace_tol:.1e}")
    jj = (j11 - j22) / 2.0  # traceless diagonal
    om = math.sqrt(det + tr * tr / 4.0)
    # columns: real and imaginary part of the +i*omega eigenvector of the
    # traceless part; this basis is orientation-reversing (j12 < 0 here)
    t11, t12 = j12, 0.0
    t21, t22 = -jj, om
    dt = t11 * t22 - t12 * t21
    i11, i12 = t22 / dt, -t12 / dt
    i21, i22 = -t21 / dt, t11 / dt

    f, g = model_taylor(p.a, p.beta, p.delta, x0, y0, order)
    fc = compose_linear(f, t11, t12, t21, t22, order)
    gc = compose_linear(g, t11, t12, t21, t22, order)
    comp1 = poly_add(poly_scale(fc, i11 / om), poly_scale(gc, i12 / om))
    comp2 = poly_add(poly_scale(fc, i21 / om), poly_scale(gc, i22 / om))

    resid = 0.0
    for poly, lin in ((comp1, {(0, 1): 1.0}), (comp2, {(1, 0): -1.0})):
        for key in ((0, 0), (1, 0), (0, 1)):
            resid = max(resid, abs(poly.get(key, 0.0) - lin.get(key, 0.0)))
    coeffs = TaylorCoeffs(
        a={k: v for k, v in comp1.items() if 2 <= k[0] + k[1] <= order},
        b={k: v for k, v in comp2.items() if 2 <= k[0] + k[1] <= order},
    )
    return FineFocusFrame(
        center=(x0, y0),
        frequency=om,
        transform=((t11, t12), (t21, t22)),
        inverse=((i11, i12), (i21, i22)),
        coeffs=coeffs,
        linear_residual=resid,
    )


# ----------------------------------------------------------------------
# closed-form focal quantities

FIRST_FOCAL_TERMS = """
-1 a02 a11
+1 a12
-1 a11 a20
+3 a30
-2 a02 b02
+3 b03
+1 b02 b11
+2 a20 b20
+1 b11 b20
+1 b21
"""

SECOND_FOCAL_TERMS = """
+10 a02^3 a11
+30 a02 a03 a11
-9 a04 a11
-10 a02^2 a12
-15 a03 a12
-15 a02 a13
+9 a14
+97 a02^2 a11 a20
+27 a03 a11 a20
-72 a02 a12 a20
-21 a13 a20
+176 a02 a11 a20^2
-80 a12 a20^2
+89 a11 a20^3
+15 a02 a11 a21
-12 a12 a21
+18 a11 a20 a21
-3 a11 a22
-75 a02^2 a30
-18 a03 a30
-6 a11^2 a30
-288 a02 a20 a30
-267 a20^2 a30
-27 a21 a30
-9 a02 a31
-27 a20 a31
+9 a32
+15 a11 a40
+45 a50
+20 a02^3 b02
+60 a02 a03 b02
-18 a04 b02
+34 a02 a11^2 b02
-28 a11 a12 b02
+174 a02^2 a20 b02
+24 a03 a20 b02
+31 a11^2 a20 b02
+208 a02 a20^2 b02
+18 a20^3 b02
-30 a20 a21 b02
+12 a22 b02
-63 a11 a30 b02
+66 a40 b02
+121 a02 a11 b02^2
-71 a12 b02^2
+68 a11 a20 b02^2
-174 a30 b02^2
+106 a02 b02^3
-18 a20 b02^3
-30 a02^2 b03
-45 a03 b03
-9 a11^2 b03
-246 a02 a20 b03
-282 a20^2 b03
-18 a21 b03
-75 a11 b02 b03
-159 b02^2 b03
-60 a02 b04
-66 a20 b04
+45 b05
+31 a02^2 a11 b11
+6 a03 a11 b11
-31 a02 a12 b11
-6 a13 b11
+110 a02 a11 a20 b11
-70 a12 a20 b11
+79 a11 a20^2 b11
-120 a02 a30 b11
-237 a20 a30 b11
+52 a02^2 b02 b11
-3 a03 b02 b11
-3 a11^2 b02 b11
+56 a02 a20 b02 b11
-104 a20^2 b02 b11
-6 a21 b02 b11
-25 a11 b02^2 b11
-53 b02^3 b11
-108 a02 b03 b11
-225 a20 b03 b11
-15 b04 b11
+21 a02 a11 b11^2
-21 a12 b11^2
+21 a11 a20 b11^2
-63 a30 b11^2
-4 a02 b02 b11^2
-85 a20 b02 b11^2
-60 b03 b11^2
-18 b02 b11^3
+15 a02 a11 b12
-15 a12 b12
+12 a11 a20 b12
-36 a30 b12
-30 a20 b02 b12
-27 b03 b12
+27 b02 b13
+25 a02 a11^2 b20
-25 a11 a12 b20
-50 a02^2 a20 b20
-12 a03 a20 b20
+22 a11^2 a20 b20
-192 a02 a20^2 b20
-178 a20^3 b20
-6 a02 a21 b20
-36 a20 a21 b20
+6 a22 b20
-54 a11 a30 b20
+60 a40 b20
+110 a02 a11 b02 b20
-66 a12 b02 b20
+16 a11 a20 b02 b20
-138 a30 b02 b20
+120 a02 b02^2 b20
-136 a20 b02^2 b20
-66 a11 b03 b20
-180 b02 b03 b20
-25 a02^2 b11 b20
-6 a03 b11 b20
-3 a11^2 b11 b20
-182 a02 a20 b11 b20
-265 a20^2 b11 b20
-3 a21 b11 b20
-38 a11 b02 b11 b20
-104 b02^2 b11 b20
-43 a02 b11^2 b20
-124 a20 b11^2 b20
-18 b11^3 b20
-6 a02 b12 b20
-36 a20 b12 b20
-3 b11 b12 b20
+9 b13 b20
+25 a02 a11 b20^2
-25 a12 b20^2
-16 a11 a20 b20^2
-30 a30 b20^2
+50 a02 b02 b20^2
-102 a20 b02 b20^2
-75 b03 b20^2
-13 a11 b11 b20^2
-61 b02 b11 b20^2
-20 a20 b20^3
-10 b11 b20^3
-25 a02^2 b21
-6 a03 b21
-3 a11^2 b21
-102 a02 a20 b21
-107 a20^2 b21
-3 a21 b21
-16 a11 b02 b21
-44 b02^2 b21
-43 a02 b11 b21
-82 a20 b11 b21
-18 b11^2 b21
-6 b12 b21
-13 a11 b20 b21
-36 b02 b20 b21
-10 b20^2 b21
-6 a02 b22
-12 a20 b22
+3 b11 b22
+9 b23
+12 a02 a11 b30
-12 a12 b30
+15 a11 a20 b30
-9 a30 b30
+24 a02 b02 b30
+24 a20 b02 b30
-36 b03 b30
+6 a11 b11 b30
+9 b02 b11 b30
+24 a20 b20 b30
+12 b11 b20 b30
-3 b21 b30
+6 a11 b31
+21 b02 b31
+15 b20 b31
+18 a20 b40
+9 b11 b40
+9 b41
"""

_TERM_RE = re.compile(r"([ab])(\d)(\d)(?:\^(\d))?")


def parse_focal_terms(text: str) -> tuple[tuple[int, tuple[tuple[str, int, int, int], ...]], ...]:
    """Parse a term table into ((coeff, ((var, i, j, power), ...)), ...)."""
    terms = []
    for line in text.strip().splitlines():
        parts = line.split()
        coeff = int(parts[0])
        factors = []
        for tok in parts[1:]:
            m = _TERM_RE.fullmatch(tok)
            if m is None:
                raise ValueError(f"bad factor {tok!r} in term {line!r}")
            var, i, j, pw = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
            factors.append((var, i, j, int(pw) if pw else 1))
        terms.append((coeff, tuple(factors)))
    return tuple(terms)


_L1 = parse_focal_terms(FIRST_FOCAL_TERMS)
_L2 = parse_focal_terms(SECOND_FOCAL_TERMS)


def _eval_terms(terms, c: TaylorCoeffs):
    total = 0
    for coeff, factors in terms:
        prod = coeff
        for var, i, j, pw in factors:
            v = c.a_(i, j) if var == "a" else c.b_(i, j)
            if v == 0:
                prod = 0
                break
            prod = prod * v**pw
        total = total + prod
    return total


def first_focal_value(c: TaylorCoeffs):
    """First focal quantity in the clockwise frame; negative = stable."""
    return _eval_terms(_L1, c)


def second_focal_value(c: TaylorCoeffs):
    """Second focal quantity; its sign is intrinsic only where the first
    one vanishes."""
    return _eval_terms(_L2, c)


# ----------------------------------------------------------------------
# model-specialized first quantity on the Hopf locus


def hopf_stability_poly(delta, x0):
    """Sign of the first focal quantity along this model's Hopf locus.

    A polynomial in (delta, x0) equal to the first focal value up to a
    positive factor at a Hopf point with equilibrium abscissa x0.  Accepts
    floats or Fractions.
    """
    return (
        6 * delta
        - 11 * delta**2
        + 8 * delta**3
        - 2 * delta**4
        + 4 * x0
        - 39 * delta * x0
        + 42 * delta**2 * x0
        - 14 * delta**3 * x0
        - 24 * x0**2
        + 72 * delta * x0**2
        - 33 * delta**2 * x0**2
        + 36 * x0**3
        - 33 * delta * x0**3
        - 12 * x0**4
    )


# ----------------------------------------------------------------------
# independent route: formal Lyapunov function


def focal_values_lyapunov_function(c: TaylorCoeffs, count: int = 2) -> list:
    """Focal quantities by the classical normal-function construction.

    Builds V = (u^2+v^2)/2 + V_3 + ... term by term so that dV/dt along the
    canonical flow is g_4 (u^2+v^2)^2 + g_6 (u^2+v^2)^3 + ...; returns
    [g_4, g_6, ...][:count].  Each g_2m is a positive multiple of the m-th
    focal quantity once the earlier ones vanish.  Exact over Fractions.

    The construction solves one small linear system per degree: for odd
    degree the rotation operator is invertible; for even degree the system
    is bordered with the radial monomial and the kernel direction is pinned
    by zeroing the v^k coefficient.
    """
    exact = any(
        isinstance(v, Fraction) for v in list(c.a.values()) + list(c.b.values())
    )
    half = Fraction(1, 2) if exact else 0.5
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    P = dict(c.a)
    Q = dict(c.b)
    V: Poly = {(2, 0): half, (0, 2): half}
    gs: list = []
    kmax = 2 * count + 2
    for k in range(3, kmax + 1):
        # degree-k part of grad(V) . (P, Q)
        Vu: Poly = {(i - 1, j): i * v for (i, j), v in V.items() if i > 0}
        Vv: Poly = {(i, j - 1): j * v for (i, j), v in V.items() if j > 0}
        W = poly_add(poly_mul(Vu, P, k), poly_mul(Vv, Q, k))
        Wk = [W.get((alpha, k - alpha), zero) for alpha in range(k + 1)]
        # rotation operator on monomials u^alpha v^(k-alpha):
        #   D[u^a v^b] = a u^(a-1) v^(b+1) - b u^(a+1) v^(b-1)
        n = k + 1
        even = k % 2 == 0
        size = n + 1 if even else n
        A = [[zero] * size for _ in range(size)]
        rhs = [zero] * size
        for alpha in range(n):
            b = k - alpha
            if alpha > 0:
                A[alpha - 1][alpha] += alpha * one
            if b > 0:
                A[alpha + 1][alpha] += -b * one
            rhs[alpha] = -Wk[alpha]
        if even:
            m = k // 2
            for t in range(m + 1):  # (u^2+v^2)^m: coefficient of u^(2t) v^(k-2t)
                A[2 * t][n] = -one * math.comb(m, t)
            for col in range(size):  # pin kernel: V_k's v^k coefficient = 0
                A[n][col] = one if col == 0 else zero
            rhs[n] = zero
        sol = solve_linear(A, rhs)
        for alpha in range(n):
            if sol[alpha] != 0:
                V[(alpha, k - alpha)] = sol[alpha]
        if even:
            gs.append(sol[n])
    return gs


# ----------------------------------------------------------------------
# numeric oracle: return-map displacement fit


def return_map_coefficient(
    p: Params,
    e: Equilibrium,
    radii: tuple[float, ...] = (0.002, 0.004, 0.008, 0.016),
    degree: int = 3,
    rtol: float = 1e-11,
    atol: float = 1e-14,
) -> tuple[float, list[float]]:
    """Fit P(r) - r ~ c r^degree on a canonical-frame ray.

    Integrates the strip field from ray points z = (r, 0) of the canonical
    frame and measures the first return to the ray; fits the displacement
    against r^degree by least squares.  Raises OracleInconclusive when the
    displacement signs disagree across radii or sit at the integrator's
    noise floor.  Returns (c, displacements).
    """
    from .rk import Event, Termination, integrate_ode

    frame = canonicalize(p, e)
    (t11, t12), (t21, t22) = frame.transform
    (i11, i12), (i21, i22) = frame.inverse
    cx, cy = frame.center

    def rhs(t, s):
        x, y = s
        return (
            x * (1 - x) - x * y / (p.a + x * x),
            y * (p.delta - p.beta * y / x),
        )

    def z_of(s):
        dx, dy = s[0] - cx, s[1] - cy
        return (i11 * dx + i12 * dy, i21 * dx + i22 * dy)

    period_guess = 2 * math.pi / frame.frequency
    disps: list[float] = []
    for r in radii:
        start = (cx + t11 * r, cy + t21 * r)
        ev = Event(
            func=lambda t, s: z_of(s)[1],
            direction=-1,
            terminal=True,
            accept=lambda t, s: z_of(s)[0] > 0.0 and t > 0.1 * period_guess,
        )
        sol = integrate_ode(
            rhs,
            (0.0, 20.0 * period_guess),
            start,
            rtol=rtol,
            atol=atol,
            events=[ev],
            record=False,
        )
        if sol.status is not Termination.EVENT:
            raise OracleInconclusive(f"no return at radius {r} for {p}")
        disps.append(z_of(sol.y_final)[0] - r)

    noise = 100.0 * max(atol, rtol * max(abs(cx), abs(cy)))
    signs = {math.copysign(1.0, d) for d in disps if abs(d) > noise}
    if len(signs) != 1:
        raise OracleInconclusive(
            f"displacement signs inconclusive: {disps} (noise floor {noise:.1e})"
        )
    num = sum(d * r**degree for d, r in zip(disps, radii))
    den = sum(r ** (2 * degree) for r in radii)
    return num / den, disps
