"""Adjoint condition system and holomorphic differential basis.

Reference values worked by hand:

* cubic y^3 + 2x^3 y - x^7: the origin carries branches y ~ x^4/2 (simple)
  and y^2 ~ -2x^3 (two-cycle), whose residue conditions kill c00, c10, c20
  and c01, so delta = 4 there; at (0:1:0) the pullback order of
  x^i y^j dx/f_y is 10 - 3i - 7j, negative for 9 of the 15 monomials, so
  delta = 9 and the basis spans {x y, x^3}.  Genus 2.
* y^7 - x(x-1)^2: the origin is smooth (f_x = -1 there); the affine
  singularity sits at (1, 0) with conditions at pullback orders -6, -4, -2,
  one per y power 0..2, so delta = 3; at (1:0:0) the order is 10 - 7i - 3j,
  giving delta = 9.  Genus 3.
* Trott quartic: smooth everywhere including infinity, no conditions,
  genus (4-1)(4-2)/2 = 3.
* hyperelliptic y^2 = (x^2+1)((x+1)^2+1)((x+2)^2+1): both far branches
  y ~ +-x^3 run to (0:1:0), pullback order 1 - i - 3j, eight negative, so
  delta = 8 and the basis spans {1, x}.  Genus 2.
"""

import dataclasses

import numpy as np
import pytest
from zoo import CUBIC, HYPEREX, KLEIN, NONIC, TROTT

from rsurf.config import Config
from rsurf.critical import find_critical_points
from rsurf.differentials import (
    adjunction_conditions,
    candidate_monomials,
    compute_differentials,
    differential_basis,
    eval_differentials,
    riemann_hurwitz_genus,
)
from rsurf.errors import GenusMismatch, NearCriticalEvaluation
from rsurf.monodromy import compute_monodromy
from rsurf.quadrature import solve_fiber

CFG = Config()


def run(curve, config=CFG):
    crit = find_critical_points(curve, config)
    mon = compute_monodromy(curve, crit, config)
    return crit, mon


def span_residual(basis, i, j):
    """Distance from the monomial direction x^i y^j to the basis span."""
    target = np.zeros(len(basis.monomials), dtype=complex)
    target[basis.monomials.index((i, j))] = 1.0
    resid = target - basis.vectors @ (basis.vectors.conj().T @ target)
    return float(np.linalg.norm(resid))


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def test_candidate_monomials_count():
    for d in range(2, 10):
        assert len(candidate_monomials(d)) == (d - 1) * (d - 2) // 2


def test_cubic_deltas_and_genus():
    crit, mon = run(CUBIC)
    system, basis = compute_differentials(CUBIC, crit, mon, CFG)
    assert system.genus == 2
    assert basis.genus == 2
    assert system.rank == 13
    assert system.delta_at((0.0, 0.0, 1.0)) == 4
    assert system.delta_at((0.0, 1.0, 0.0)) == 9
    assert riemann_hurwitz_genus(mon) == 2


def test_klein_deltas_and_genus():
    crit, mon = run(KLEIN)
    system, basis = compute_differentials(KLEIN, crit, mon, CFG)
    assert system.genus == 3
    assert system.delta_at((1.0, 0.0, 1.0)) == 3
    assert system.delta_at((1.0, 0.0, 0.0)) == 9
    with pytest.raises(KeyError):
        system.delta_at((0.0, 0.0, 1.0))
    assert riemann_hurwitz_genus(mon) == 3


def test_trott_is_smooth():
    crit, mon = run(TROTT)
    system, basis = compute_differentials(TROTT, crit, mon, CFG)
    assert system.H.shape == (0, 3)
    assert system.delta_by_point == {}
    assert system.genus == 3
    assert np.allclose(basis.vectors, np.eye(3))


def test_nonic_genus():
    cfg = dataclasses.replace(CFG, adaptive_continuation=True)
    crit, mon = run(NONIC, cfg)
    system, _ = compute_differentials(NONIC, crit, mon, cfg)
    assert system.genus == 16
    assert riemann_hurwitz_genus(mon) == 16


# ---------------------------------------------------------------------------
# the basis itself
# ---------------------------------------------------------------------------


def test_cubic_basis_spans_xy_and_x_cubed():
    crit, mon = run(CUBIC)
    _, basis = compute_differentials(CUBIC, crit, mon, CFG)
    assert span_residual(basis, 1, 1) <= 1e-8
    assert span_residual(basis, 3, 0) <= 1e-8


def test_hyperelliptic_basis_spans_one_and_x():
    crit, mon = run(HYPEREX)
    system, basis = compute_differentials(HYPEREX, crit, mon, CFG)
    assert system.genus == 2
    assert system.delta_at((0.0, 1.0, 0.0)) == 8
    assert span_residual(basis, 0, 0) <= 1e-8
    assert span_residual(basis, 1, 0) <= 1e-8


def test_conditions_annihilate_basis():
    for curve in (CUBIC, KLEIN, HYPEREX):
        crit, mon = run(curve)
        system, basis = compute_differentials(curve, crit, mon, CFG)
        if system.rank:
            assert np.abs(system.H @ basis.vectors).max() <= 1e-10
        # columns come back orthonormal
        gram = basis.vectors.conj().T @ basis.vectors
        assert np.abs(gram - np.eye(basis.genus)).max() <= 1e-12


def test_rank_equals_delta_total():
    for curve in (CUBIC, KLEIN, HYPEREX):
        crit, mon = run(curve)
        system = adjunction_conditions(curve, crit, mon, CFG)
        assert sum(system.delta_by_point.values()) == system.rank
        assert system.H.shape[0] == system.rank


def test_rows_agree_across_resolutions():
    lo = CFG
    hi = dataclasses.replace(CFG, n_modes=256)
    sys_lo = adjunction_conditions(CUBIC, *run(CUBIC, lo), lo)
    sys_hi = adjunction_conditions(CUBIC, *run(CUBIC, hi), hi)
    assert sys_lo.delta_by_point.keys() == sys_hi.delta_by_point.keys()
    for key in sys_lo.delta_by_point:
        assert sys_lo.delta_by_point[key] == sys_hi.delta_by_point[key]
    assert np.abs(sys_lo.H - sys_hi.H).max() <= 1e-9


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_eval_matches_polynomial_over_fy():
    crit, mon = run(CUBIC)
    _, basis = compute_differentials(CUBIC, crit, mon, CFG)
    x = 0.31 + 0.12j
    y = solve_fiber(CUBIC, x)
    vals = eval_differentials(basis, x, y)
    assert vals.shape == (2, 3)
    fy = CUBIC.deriv(dy=1)
    expect = basis.polynomial_values(x, y) / fy(x, y)
    assert np.allclose(vals, expect, rtol=0, atol=1e-13 * np.abs(expect).max())


def test_eval_near_branch_point_raises():
    crit, mon = run(CUBIC)
    _, basis = compute_differentials(CUBIC, crit, mon, CFG)
    with pytest.raises(NearCriticalEvaluation):
        eval_differentials(basis, 0.0, np.array([0.0]))


def test_coefficient_table_roundtrip():
    crit, mon = run(CUBIC)
    _, basis = compute_differentials(CUBIC, crit, mon, CFG)
    d = CUBIC.total_degree
    rng = np.random.default_rng(7)
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    direct = basis.polynomial_values(x, y)
    for k in range(basis.genus):
        table = basis.coefficient_table(k)
        manual = sum(
            table[n, m] * x ** (d - 3 - n) * y ** (d - 3 - m)
            for n in range(d - 2)
            for m in range(d - 2)
        )
        assert np.allclose(manual, direct[k], atol=1e-12 * np.abs(direct[k]).max())


# ---------------------------------------------------------------------------
# consistency gate
# ---------------------------------------------------------------------------


def test_injected_corruption_trips_genus_gate():
    crit, mon = run(CUBIC)
    outer = int(np.argmax(np.abs(mon.contours.centers)))
    broken = list(mon.permutations)
    broken[outer] = np.arange(mon.sheet_count)
    bad = dataclasses.replace(mon, permutations=broken)
    with pytest.raises(GenusMismatch):
        compute_differentials(CUBIC, crit, bad, CFG)


def test_genus_agreement_is_checked_everywhere():
    for curve, g in ((CUBIC, 2), (KLEIN, 3), (TROTT, 3), (HYPEREX, 2)):
        crit, mon = run(curve)
        system, basis = compute_differentials(curve, crit, mon, CFG)
        assert system.genus == g == basis.genus
