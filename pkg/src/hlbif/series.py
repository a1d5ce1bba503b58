"""Truncated bivariate polynomials with pluggable coefficient arithmetic.

A polynomial is a dict mapping (i, j) exponent pairs to coefficients, with
total degree capped at a fixed order; zero coefficients are never stored.
The arithmetic only uses +, -, *, /, so float and fractions.Fraction
coefficients both work, and mixing stays exact as long as the inputs are
exact.  Degree caps make products cheap (at most a few dozen monomials).
"""

from __future__ import annotations

from typing import Mapping

Poly = dict  # {(i, j): coeff}

__all__ = [
    "poly_add",
    "poly_scale",
    "poly_mul",
    "poly_pow",
    "reciprocal_series",
    "compose_linear",
    "poly_eval",
    "solve_linear",
]


def _clean(p: Poly) -> Poly:
    return {k: v for k, v in p.items() if v != 0}


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + v
    return _clean(out)


def poly_scale(p: Poly, c) -> Poly:
    if c == 0:
        return {}
    return {k: c * v for k, v in p.items()}


def poly_mul(p: Poly, q: Poly, order: int) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            i, j = i1 + i2, j1 + j2
            if i + j > order:
                continue
            k = (i, j)
            out[k] = out.get(k, 0) + c1 * c2
    return _clean(out)


def poly_pow(p: Poly, n: int, order: int) -> Poly:
    out: Poly = {(0, 0): 1}
    for _ in range(n):
        out = poly_mul(out, p, order)
    return out


def reciprocal_series(p: Poly, order: int) -> Poly:
    """1/p as a truncated series; requires a nonzero constant term.

    Writes p = c (1 + e) and sums the geometric series in e up to ``order``.
    """
    c = p.get((0, 0), 0)
    if c == 0:
        raise ZeroDivisionError("reciprocal of a series with zero constant term")
    e = poly_scale({k: v for k, v in p.items() if k != (0, 0)}, 1 / c)
    term: Poly = {(0, 0): 1}
    acc: Poly = {(0, 0): 1}
    sign = 1
    for _ in range(order):
        term = poly_mul(term, e, order)
        if not term:
            break
        sign = -sign
        acc = poly_add(acc, poly_scale(term, sign))
    return poly_scale(acc, 1 / c)


def compose_linear(p: Poly, m11, m12, m21, m22, order: int) -> Poly:
    """Substitute (u, v) -> (m11 z1 + m12 z2, m21 z1 + m22 z2) into p."""
    lin_u: Poly = _clean({(1, 0): m11, (0, 1): m12})
    lin_v: Poly = _clean({(1, 0): m21, (0, 1): m22})
    # cache powers of the two linear forms
    max_i = max((i for i, _ in p), default=0)
    max_j = max((j for _, j in p), default=0)
    pow_u = [{(0, 0): 1}]
    for _ in range(max_i):
        pow_u.append(poly_mul(pow_u[-1], lin_u, order))
    pow_v = [{(0, 0): 1}]
    for _ in range(max_j):
        pow_v.append(poly_mul(pow_v[-1], lin_v, order))
    out: Poly = {}
    for (i, j), c in p.items():
        out = poly_add(out, poly_scale(poly_mul(pow_u[i], pow_v[j], order), c))
    return out


def poly_eval(p: Poly, x, y):
    total = 0
    for (i, j), c in p.items():
        total = total + c * x**i * y**j
    return total


def solve_linear(A: list[list], b: list) -> list:
    """Solve A z = b by Gaussian elimination with partial pivoting.

    Works over floats or Fractions.  A must be square and nonsingular.
    """
    n = len(A)
    M = [list(row) + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise ZeroDivisionError("singular linear system")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / inv
            if f == 0:
                continue
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    z = [0] * n
    for r in range(n - 1, -1, -1):
        acc = M[r][n]
        for c in range(r + 1, n):
            acc -= M[r][c] * z[c]
        z[r] = acc / M[r][r]
    return z
