"""Curve algebra: evaluation, critical systems, resultants, Newton."""

from __future__ import annotations

import numpy as np
import pytest
import sympy as sp

from rsurf.curves import (
    BivariateCurve,
    UnivariatePoly,
    critical_newton_system,
    discriminant_points,
    newton_2d,
    resultant,
)
from zoo import CUBIC, KLEIN, NONIC, mono, padd


def normalized(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    return c / c[np.argmax(np.abs(c))]


def test_univariate_eval_and_roots():
    p = UnivariatePoly([2.0, 0.0, 1.0])  # x^2 + 2
    assert p.degree == 2
    assert abs(p(1j) - 1.0) < 1e-15
    r = p.roots()
    assert sorted(np.round(z.imag, 10) for z in r) == [-round(np.sqrt(2), 10), round(np.sqrt(2), 10)]


def test_bivariate_eval_matches_direct_sum():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    f = BivariateCurve(a)
    x, y = 0.3 - 0.8j, -1.1 + 0.4j
    direct = sum(a[i, j] * x**i * y**j for i in range(4) for j in range(3))
    assert abs(f(x, y) - direct) < 1e-12 * abs(direct)


def test_critical_system_cancels_top_power():
    g1, _ = CUBIC.critical_system()
    assert g1.deg_y == 1  # 4x^3 y - 3x^7
    g1k, _ = KLEIN.critical_system()
    assert g1k.deg_y == 0  # -7x(x-1)^2
    g1n, _ = NONIC.critical_system()
    assert g1n.deg_y == 6


def test_resultant_parabola_both_eliminations():
    f = BivariateCurve(padd(mono(0, 2), mono(1, 0, -1.0)))  # y^2 - x
    ry = discriminant_points(f, eliminate="y")
    assert ry.degree == 1
    assert abs(ry.roots()[0]) < 1e-14
    rx = discriminant_points(f, eliminate="x")
    assert rx.degree == 1
    assert abs(rx.roots()[0]) < 1e-14


def test_resultant_cubic_closed_form():
    # critical system of y^3 + 2x^3 y - x^7 gives Res = const * x^9 (27x^5 + 32)
    r = discriminant_points(CUBIC)
    expected = np.zeros(15, dtype=complex)
    expected[9] = 32.0
    expected[14] = 27.0
    assert r.degree == 14
    assert np.allclose(normalized(r.coeffs), normalized(expected), atol=1e-10)


def test_resultant_klein_closed_form():
    # first system polynomial is -7x(x-1)^2, y-degree 0, so Res = (-7x(x-1)^2)^6
    r = discriminant_points(KLEIN)
    x = sp.symbols("x")
    exact = sp.Poly((x * (x - 1) ** 2) ** 6, x).all_coeffs()[::-1]
    expected = np.array([complex(c) for c in exact])
    assert r.degree == 18
    assert np.allclose(normalized(r.coeffs), normalized(expected), atol=1e-9)


def test_resultant_x_klein_closed_form():
    r = discriminant_points(KLEIN, eliminate="x")
    expected = np.zeros(19, dtype=complex)
    expected[18] = 1.0
    assert r.degree == 18
    assert np.allclose(normalized(r.coeffs), normalized(expected), atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_resultant_matches_sympy(seed):
    rng = np.random.default_rng(seed)
    ap = rng.integers(-5, 6, size=(3, 3)).astype(float)
    aq = rng.integers(-5, 6, size=(4, 2)).astype(float)
    ap[0, -1] = ap[0, -1] or 1.0
    aq[0, -1] = aq[0, -1] or 1.0
    p, q = BivariateCurve(ap), BivariateCurve(aq)
    mine = resultant(p, q, eliminate="y")

    x, y = sp.symbols("x y")
    sp_p = sum(sp.Integer(int(ap[i, j])) * x**i * y**j for i in range(3) for j in range(3))
    sp_q = sum(sp.Integer(int(aq[i, j])) * x**i * y**j for i in range(4) for j in range(2))
    sp_r = sp.Poly(sp.resultant(sp_p, sp_q, y), x)
    expected = np.array([complex(c) for c in sp_r.all_coeffs()[::-1]])
    expected = np.trim_zeros(expected, "b")
    if len(expected) == 0:
        pytest.skip("degenerate random draw")
    assert mine.degree == len(expected) - 1
    assert np.allclose(normalized(mine.coeffs), normalized(expected), atol=1e-8)


def test_points_at_infinity():
    pts_cubic = CUBIC.homogenize().points_at_infinity()
    assert len(pts_cubic) == 7 and all(abs(p[0]) < 1e-8 for p in pts_cubic)
    pts_klein = KLEIN.homogenize().points_at_infinity()
    assert pts_klein == [(1.0 + 0.0j, 0.0j, 0.0j)]
    pts_nonic = NONIC.homogenize().points_at_infinity()
    assert pts_nonic == [(1.0 + 0.0j, 0.0j, 0.0j)]


def test_newton_refines_perturbed_ring_point():
    # ring roots of the cubic discriminant satisfy x^5 = -32/27
    x_exact = (32.0 / 27.0) ** 0.2 * np.exp(1j * np.pi / 5)
    y_exact = None
    # critical y on this fibre: g1 = 4x^3 y - 3x^7 -> y = (3/4) x^4
    y_exact = 0.75 * x_exact**4
    F, J, scale = critical_newton_system(CUBIC)
    x, y, rel, ok = newton_2d(F, J, x_exact * (1 + 1e-4), y_exact * (1 - 1e-4), scale)
    assert ok
    assert abs(x**5 + 32.0 / 27.0) < 1e-12
    assert abs(y - 0.75 * x**4) < 1e-12
