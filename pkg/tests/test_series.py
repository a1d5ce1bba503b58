"""Truncated bivariate polynomial arithmetic."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlbif.series import (
    compose_linear,
    poly_add,
    poly_eval,
    poly_mul,
    poly_pow,
    poly_scale,
    reciprocal_series,
    solve_linear,
)

ORDER = 5


def frac(n, d=1):
    return Fraction(n, d)


coeffs = st.fractions(
    min_value=-3, max_value=3, max_denominator=7
).filter(lambda q: q != 0)


@st.composite
def polys(draw, max_terms=5, order=ORDER, with_constant=False):
    n = draw(st.integers(1, max_terms))
    p = {}
    for _ in range(n):
        i = draw(st.integers(0, order))
        j = draw(st.integers(0, order - i))
        p[(i, j)] = draw(coeffs)
    if with_constant:
        p[(0, 0)] = draw(coeffs)
    return p


def test_add_is_termwise():
    p = {(1, 0): frac(2), (0, 1): frac(3)}
    q = {(1, 0): frac(-2), (1, 1): frac(5)}
    assert poly_add(p, q) == {(0, 1): frac(3), (1, 1): frac(5)}


def test_scale_by_zero_empties():
    assert poly_scale({(2, 1): frac(7)}, 0) == {}


def test_mul_matches_hand_expansion():
    p = {(1, 0): frac(1), (0, 1): frac(1)}  # x + y
    sq = poly_mul(p, p, ORDER)  # (x + y)^2
    assert sq == {(2, 0): frac(1), (1, 1): frac(2), (0, 2): frac(1)}


def test_mul_truncates_total_degree():
    p = {(3, 0): frac(1)}
    q = {(0, 3): frac(1)}
    assert poly_mul(p, q, 5) == {}


def test_pow_matches_repeated_mul():
    p = {(1, 0): frac(1), (0, 0): frac(1)}
    direct = poly_pow(p, 3, ORDER)
    manual = poly_mul(poly_mul(p, p, ORDER), p, ORDER)
    assert direct == manual


@given(polys(), polys())
@settings(max_examples=60, deadline=None)
def test_mul_commutes(p, q):
    assert poly_mul(p, q, ORDER) == poly_mul(q, p, ORDER)


@given(polys(), polys(), polys())
@settings(max_examples=40, deadline=None)
def test_mul_associates_under_truncation(p, q, r):
    left = poly_mul(poly_mul(p, q, ORDER), r, ORDER)
    right = poly_mul(p, poly_mul(q, r, ORDER), ORDER)
    assert left == right


@given(polys(), polys())
@settings(max_examples=60, deadline=None)
def test_eval_is_ring_homomorphism(p, q):
    x, y = frac(2, 3), frac(-1, 2)
    # degree cap high enough that nothing truncates for order<=5 inputs
    prod = poly_mul(p, q, 2 * ORDER)
    assert poly_eval(prod, x, y) == poly_eval(p, x, y) * poly_eval(q, x, y)
    assert poly_eval(poly_add(p, q), x, y) == poly_eval(p, x, y) + poly_eval(
        q, x, y
    )


@given(polys(with_constant=True))
@settings(max_examples=40, deadline=None)
def test_reciprocal_inverts_up_to_order(p):
    r = reciprocal_series(p, ORDER)
    prod = poly_mul(p, r, ORDER)
    assert prod.get((0, 0)) == 1
    assert all(v == 0 for k, v in prod.items() if k != (0, 0))


def test_reciprocal_needs_nonzero_constant():
    with pytest.raises(ZeroDivisionError):
        reciprocal_series({(1, 0): frac(1)}, 3)


@given(polys())
@settings(max_examples=40, deadline=None)
def test_compose_linear_agrees_with_pointwise_eval(p):
    m = (frac(1, 2), frac(1, 3), frac(-1), frac(2))
    q = compose_linear(p, *m, order=ORDER)
    for u, v in ((frac(1, 5), frac(1, 7)), (frac(-2, 3), frac(1, 2))):
        x = m[0] * u + m[1] * v
        y = m[2] * u + m[3] * v
        assert poly_eval(q, u, v) == poly_eval(p, x, y)


def test_solve_linear_exact_2x2():
    sol = solve_linear(
        [[frac(2), frac(1)], [frac(1), frac(3)]], [frac(5), frac(10)]
    )
    assert sol == [frac(1), frac(3)]


def test_solve_linear_pivots_past_zero():
    sol = solve_linear(
        [[frac(0), frac(1)], [frac(1), frac(0)]], [frac(4), frac(9)]
    )
    assert sol == [frac(9), frac(4)]
