"""Model layer: vector fields, equilibrium cubic, classification, origin."""

import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hlbif.model import (
    DomainError,
    EquilibriumClass,
    OriginRegime,
    Params,
    State,
    boundary_saddle_direction,
    boundary_states,
    cubic_coefficients,
    equilibrium_cubic,
    equilibrium_cubic_deriv,
    from_unscaled,
    jacobian,
    jacobian_entries,
    origin_structure,
    rhs_original,
    rhs_rescaled,
    solve_cubic,
    solve_equilibria,
    solve_equilibria_exact,
)

params_st = st.builds(
    Params,
    a=st.floats(1e-4, 0.3),
    beta=st.floats(0.05, 5.0),
    delta=st.floats(0.02, 2.0),
)

state_st = st.builds(
    State, x=st.floats(1e-3, 0.999), y=st.floats(1e-3, 3.0)
)


def test_params_validate_positivity():
    with pytest.raises(DomainError):
        Params(a=-0.1, beta=1.0, delta=0.5)
    with pytest.raises(DomainError):
        Params(a=0.1, beta=0.0, delta=0.5)
    with pytest.raises(DomainError):
        Params(a=0.1, beta=1.0, delta=-2.0)


@given(params_st, state_st)
@settings(max_examples=80, deadline=None)
def test_rescaled_field_is_x_times_original(p, s):
    """Multiplying the field by the positive factor x preserves orbits in
    the open strip; the rescaled right-hand side must equal x * original."""
    fx, fy = rhs_original(p, s)
    gx, gy = rhs_rescaled(p, s)
    assert gx == pytest.approx(s.x * fx, rel=1e-12, abs=1e-12)
    assert gy == pytest.approx(s.y * (p.delta * s.x - p.beta * s.y),
                               rel=1e-12, abs=1e-12)
    assert gy == pytest.approx(s.x * fy, rel=1e-9, abs=1e-9)


@given(params_st)
@settings(max_examples=100, deadline=None)
def test_equilibria_sorted_with_small_residuals(p):
    eqs = solve_equilibria(p)
    assert 1 <= len(eqs) <= 3
    xs = [e.x0 for e in eqs]
    assert xs == sorted(xs)
    for e in eqs:
        assert abs(equilibrium_cubic(p.a, p.beta, p.delta, e.x0)) < 1e-8
        assert e.y0 == pytest.approx(p.delta * e.x0 / p.beta, rel=1e-12)
        assert 0.0 < e.x0 < 1.0


@given(
    x1=st.floats(0.02, 0.30),
    x2=st.floats(0.05, 0.48),
    delta=st.floats(0.05, 1.5),
)
@settings(max_examples=100, deadline=None)
def test_three_simple_roots_recovered_and_alternate(x1, x2, delta):
    """Parameters built from three chosen roots: the solver must return
    exactly those roots, middle one a saddle, outer ones antisaddles."""
    assume(x2 > x1 + 0.03)
    x3 = 1.0 - x1 - x2
    assume(x3 > x2 + 0.03)
    assume(x3 < 0.97)
    a = x1 * x2 * x3
    e2 = x1 * x2 + x1 * x3 + x2 * x3
    beta = delta / (e2 - a)  # makes a + delta/beta the cubic's c1
    p = Params(a=a, beta=beta, delta=delta)
    eqs = solve_equilibria(p)
    assert len(eqs) == 3
    for e, want in zip(eqs, (x1, x2, x3)):
        assert e.x0 == pytest.approx(want, rel=1e-7, abs=1e-9)
    assert sum(e.x0 for e in eqs) == pytest.approx(1.0, abs=1e-7)
    assert eqs[1].classification is EquilibriumClass.SADDLE
    assert eqs[0].is_antisaddle and eqs[2].is_antisaddle


@given(params_st)
@settings(max_examples=60, deadline=None)
def test_classification_matches_jacobian_signs(p):
    for e in solve_equilibria(p):
        if e.multiplicity > 1:
            continue
        det = e.det_j
        if abs(det) < 1e-8:
            continue
        if det < 0:
            assert e.classification is EquilibriumClass.SADDLE
        else:
            stable = e.tr_j < 0
            assert (
                e.classification
                in (
                    (EquilibriumClass.STABLE_NODE, EquilibriumClass.STABLE_FOCUS)
                    if stable
                    else (EquilibriumClass.UNSTABLE_NODE, EquilibriumClass.UNSTABLE_FOCUS)
                )
            )


def test_jacobian_entries_match_finite_differences():
    p = Params(a=0.05, beta=0.8, delta=0.3)
    s = State(0.4, 0.15)
    j = jacobian(p, s)
    h = 1e-7

    def field(x, y):
        return rhs_original(p, State(x, y))

    for i in range(2):
        for k, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            up = field(s.x + dx, s.y + dy)[i]
            dn = field(s.x - dx, s.y - dy)[i]
            assert j[i][k] == pytest.approx((up - dn) / (2 * h), abs=2e-5)


def test_cubic_coefficients_and_derivative_consistent():
    a, beta, delta = 0.04, 0.9, 0.3
    c2, c1, c0 = cubic_coefficients(a, beta, delta)[1:]
    x = 0.37
    val = x**3 + c2 * x**2 + c1 * x + c0
    assert equilibrium_cubic(a, beta, delta, x) == pytest.approx(val, rel=1e-12)
    h = 1e-6
    num = (
        equilibrium_cubic(a, beta, delta, x + h)
        - equilibrium_cubic(a, beta, delta, x - h)
    ) / (2 * h)
    assert equilibrium_cubic_deriv(a, beta, delta, x) == pytest.approx(
        num, abs=1e-8
    )


@given(
    st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5)
)
@settings(max_examples=120, deadline=None)
def test_solve_cubic_returns_actual_roots(c2, c1, c0):
    roots = solve_cubic(c2, c1, c0)
    assert 1 <= len(roots) <= 3
    for r in roots:
        val = r**3 + c2 * r**2 + c1 * r + c0
        scale = 1.0 + abs(r) ** 3 + abs(c2) + abs(c1) + abs(c0)
        assert abs(val) / scale < 1e-7


def test_exact_triple_root_at_cusp_parameters():
    roots = solve_equilibria_exact(
        Fraction(1, 27), Fraction(27, 8) * Fraction(3, 5), Fraction(3, 5)
    )
    assert roots == [(Fraction(1, 3), 3)]


def test_exact_double_root_from_fold_parameterization():
    # fold point tau = 1/4: a = tau^2 - 2 tau^3, beta = delta/(2 tau (1-tau)^2)
    tau = Fraction(1, 4)
    delta = Fraction(1, 2)
    a = tau * tau - 2 * tau**3
    beta = delta / (2 * tau * (1 - tau) ** 2)
    roots = solve_equilibria_exact(a, beta, delta)
    assert roots is not None
    by_mult = {mult: x for x, mult in roots}
    assert by_mult[2] == tau
    # remaining simple root makes the root sum 1
    assert by_mult[1] == 1 - 2 * tau


def test_exact_returns_none_for_simple_roots():
    assert solve_equilibria_exact(
        Fraction(1, 50), Fraction(1), Fraction(1, 4)
    ) is None


def test_origin_regimes_split_at_unit_ratio():
    low = origin_structure(Params(a=0.1, beta=1.0, delta=0.8))
    assert low.regime is OriginRegime.HYPERBOLIC_ONLY
    assert low.outgoing_angle is None
    high = origin_structure(Params(a=0.1, beta=1.3, delta=1.7))
    assert high.regime is OriginRegime.HYPERBOLIC_AND_PARABOLIC
    assert high.outgoing_angle == pytest.approx(
        math.atan2(0.7, 1.3), abs=1e-12
    )


def test_boundary_saddle_points_into_strip():
    p = Params(a=0.05, beta=0.7, delta=0.4)
    lam, vec = boundary_saddle_direction(p)
    assert lam == pytest.approx(p.delta)
    assert vec[0] < 0  # into x < 1
    assert vec[1] > 0  # into y > 0
    assert math.hypot(*vec) == pytest.approx(1.0, abs=1e-12)


def test_boundary_states_are_field_zeros():
    p = Params(a=0.08, beta=1.1, delta=0.6)
    pts = boundary_states(p)
    assert {(round(b.state.x, 12), round(b.state.y, 12)) for b in pts} >= {
        (0.0, 0.0),
        (1.0, 0.0),
    }
    for b in pts:
        fx, fy = rhs_rescaled(p, b.state)
        assert abs(fx) < 1e-12 and abs(fy) < 1e-12


def test_from_unscaled_parameter_map():
    p, scales = from_unscaled(r=2.0, s=1.0, K=3.0, h=0.5, m=4.0, b=0.9)
    assert p.a == pytest.approx(0.9 / 9.0)
    assert p.delta == pytest.approx(0.5)
    assert p.beta == pytest.approx(1.0 * 3.0 / (4.0 * 0.5))
    assert scales["x"] == pytest.approx(3.0)
    assert scales["t"] == pytest.approx(0.5)
    with pytest.raises(DomainError):
        from_unscaled(r=2.0, s=1.0, K=-3.0, h=0.5, m=4.0, b=0.9)


def test_rescaling_preserves_orbit_direction():
    p = Params(a=0.05, beta=0.8, delta=0.3)
    s = State(0.5, 0.2)
    fx, fy = rhs_original(p, s)
    gx, gy = rhs_rescaled(p, s)
    # positive time reparameterization: same direction
    assert math.copysign(1, fx) == math.copysign(1, gx)
    assert math.copysign(1, fy) == math.copysign(1, gy)
