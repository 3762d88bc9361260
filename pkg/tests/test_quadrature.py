"""Chebyshev/Clenshaw-Curtis machinery and analytic continuation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsurf.curves import BivariateCurve
from rsurf.errors import AmbiguousContinuation
from rsurf.quadrature import (
    CircleTrace,
    chebyshev_coefficients,
    chebyshev_cumulative,
    chebyshev_diff_matrix,
    chebyshev_points,
    clenshaw_curtis_weights,
    match_columns,
    solve_fiber,
    trace_circle,
    trace_line,
)
from zoo import CUBIC, mono, padd

PARABOLA = BivariateCurve(padd(mono(0, 2), mono(1, 0, -1.0)))  # y^2 - x


def test_weights_integrate_monomials_exactly():
    for n in (8, 17, 64, 128):
        x = chebyshev_points(n)
        w = clenshaw_curtis_weights(n)
        for k in range(n + 1):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            assert abs(w @ x**k - exact) < 1e-13


@settings(max_examples=60, deadline=None)
@given(
    n=st.sampled_from([8, 16, 33]),
    coeffs=st.lists(st.floats(-1, 1), min_size=1, max_size=34),
)
def test_weights_integrate_random_polynomials(n, coeffs):
    c = np.array(coeffs[: n + 1])
    x = chebyshev_points(n)
    w = clenshaw_curtis_weights(n)
    p = np.polynomial.polynomial.polyval(x, c)
    exact = sum(2.0 * c[k] / (k + 1) for k in range(0, len(c), 2))
    assert abs(w @ p - exact) < 1e-13 * (1.0 + np.abs(c).sum())


def test_coefficients_recover_chebyshev_basis():
    n = 16
    x = chebyshev_points(n)
    v = 4 * x**3 - 3 * x  # T_3
    a = chebyshev_coefficients(v)
    expected = np.zeros(n + 1)
    expected[3] = 1.0
    assert np.allclose(a, expected, atol=1e-13)


def test_cumulative_integral_exponential():
    n = 32
    x = chebyshev_points(n)
    I = chebyshev_cumulative(np.exp(x))
    assert np.allclose(I, np.exp(x) - np.e, atol=1e-13)


def test_cumulative_complex_and_batched():
    n = 24
    x = chebyshev_points(n)
    v = np.stack([np.exp(1j * x), np.cos(x)])
    I = chebyshev_cumulative(v)
    assert np.allclose(I[0], (np.exp(1j * x) - np.exp(1j)) / 1j, atol=1e-13)
    assert np.allclose(I[1], np.sin(x) - np.sin(1), atol=1e-13)


def test_diff_matrix_differentiates():
    n = 24
    x = chebyshev_points(n)
    D = chebyshev_diff_matrix(n)
    assert np.allclose(D @ np.exp(x), np.exp(x), atol=1e-10)


def test_circle_cumulative_phase_integral():
    n = 64
    phi = (1.0 - chebyshev_points(n)) * np.pi
    trace = CircleTrace(
        center=0.0,
        radius=1.0,
        theta0=0.0,
        z_nodes=np.exp(1j * phi),
        phi=phi,
        Y=np.zeros((1, n + 1)),
        cycle=np.array([0]),
    )
    g = np.exp(1j * phi)
    total = trace.integrate_dphi(g)
    assert abs(total) < 1e-13  # int_0^2pi e^{i phi} dphi = 0
    cum = trace.cumulative_dphi(g)
    assert np.allclose(cum, (np.exp(1j * phi) - 1.0) / 1j, atol=1e-12)


def test_solve_fiber_parabola():
    r = np.sort_complex(solve_fiber(PARABOLA, 2.0))
    assert np.allclose(r, [-np.sqrt(2), np.sqrt(2)], atol=1e-14)


def test_trace_line_follows_sqrt():
    t = trace_line(PARABOLA, 4.0 + 0.0j, 1.0 + 0.0j, 16)
    # canonical order at z1=4: rows (-2, 2); sqrt continues to (-1, 1)
    assert np.allclose(t.Y[:, 0], [-2.0, 2.0], atol=1e-13)
    assert np.allclose(t.Y[:, -1], [-1.0, 1.0], atol=1e-13)
    # integral of y dz along the segment, exact: [2/3 x^(3/2)] branchwise
    vals = t.integrate_dz(t.Y)
    assert np.allclose(vals, [-(2.0 / 3.0) * (1 - 8), (2.0 / 3.0) * (1 - 8)], atol=1e-12)


def test_trace_circle_branch_transposition():
    t = trace_circle(PARABOLA, 0.0 + 0.0j, 1.0, 0.0, 64)
    assert np.allclose(t.Y[:, 0], [-1.0, 1.0], atol=1e-13)
    assert t.cycle.tolist() == [1, 0]


def test_trace_circle_away_from_branch_is_identity():
    t = trace_circle(CUBIC, 3.0 + 0.0j, 0.3, 0.0, 64)
    assert t.cycle.tolist() == list(range(3))
    assert np.allclose(t.Y[:, 0], t.Y[:, -1], atol=1e-10)


def test_match_columns_raises_on_ambiguity():
    prev = np.array([1.0 + 0.0j, -1.0 + 0.0j])
    new = np.array([1j, -1j])
    with pytest.raises(AmbiguousContinuation):
        match_columns(prev, new)


def test_adaptive_subdivision_recovers_coarse_trace():
    # deliberately coarse trace around a tight pair of branch points
    t = trace_circle(PARABOLA, 0.0 + 0.0j, 1.0, 0.0, 8, adaptive=True)
    assert t.cycle.tolist() == [1, 0]
