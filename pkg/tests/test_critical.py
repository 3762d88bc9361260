"""Branch points, singular points, poles, and multiplicity clustering."""

from __future__ import annotations

import numpy as np
import pytest

from rsurf.config import Config
from rsurf.critical import cluster_resultant_roots, find_critical_points
from rsurf.curves import BivariateCurve, UnivariatePoly
from zoo import CUBIC, HYPEREX, KLEIN, NONIC, mono, padd

CFG = Config()


def test_klein_multiplicity_clusters():
    data = find_critical_points(KLEIN, CFG)
    branch = [p for p in data.points if p.multiplicity > 0]
    assert len(branch) == 2
    by_mult = {p.multiplicity: p for p in branch}
    assert set(by_mult) == {6, 12}
    assert abs(by_mult[6].x) < 1e-10
    assert abs(by_mult[12].x - 1.0) < 1e-10
    # both resolve to critical points with y = 0
    for p in branch:
        assert len(p.y_values) == 1 and abs(p.y_values[0]) < 1e-3
    # (1, 0) is a cusp, (0, 0) is a regular branch point
    assert not by_mult[6].singular
    assert by_mult[12].singular
    assert len(data.singular_affine) == 1
    x1, y1 = data.singular_affine[0]
    assert abs(x1 - 1.0) < 1e-10 and abs(y1) < 1e-3
    assert data.singular_infinite == [(1.0 + 0.0j, 0.0j, 0.0j)]


def test_cubic_critical_points():
    data = find_critical_points(CUBIC, CFG)
    branch = [p for p in data.points if p.multiplicity > 0]
    assert len(branch) == 6
    mults = sorted(p.multiplicity for p in branch)
    assert mults == [1, 1, 1, 1, 1, 9]
    centre = next(p for p in branch if p.multiplicity == 9)
    assert abs(centre.x) < 1e-13
    assert centre.singular
    ring = [p for p in branch if p.multiplicity == 1]
    for p in ring:
        assert abs(p.x**5 + 32.0 / 27.0) < 1e-12
        assert not p.singular
    assert abs(data.rho - (32.0 / 27.0) ** 0.2) < 1e-10
    # projective singular point (0 : 1 : 0)
    assert len(data.singular_infinite) == 1
    X, Y, Z = data.singular_infinite[0]
    assert abs(X) < 1e-12 and abs(Y - 1.0) < 1e-12 and abs(Z) < 1e-12


def test_hyperex_branch_points_exact():
    data = find_critical_points(HYPEREX, CFG)
    branch = [p for p in data.points if p.multiplicity > 0]
    assert len(branch) == 6
    expected = np.array([1j, -1j, -1 + 1j, -1 - 1j, -2 + 1j, -2 - 1j])
    got = np.array([p.x for p in branch])
    for e in expected:
        assert np.min(np.abs(got - e)) < 1e-12
    assert all(p.multiplicity == 1 and not p.singular for p in branch)
    assert data.singular_affine == []


def test_nonic_count_and_spacing():
    data = find_critical_points(NONIC, CFG)
    branch = [p for p in data.points if p.multiplicity > 0]
    assert len([p for p in branch if not p.singular]) == 42
    assert 0.0175 < data.rho < 0.0185
    assert any(abs(p.x) < 1e-10 and p.singular for p in branch)
    assert data.singular_infinite == [(1.0 + 0.0j, 0.0j, 0.0j)]


def test_pole_detection():
    # (x - 2) y^2 - x: branch point x=0, pole of y(x) at x=2
    f = BivariateCurve(padd(mono(1, 2), mono(0, 2, -2.0), mono(1, 0, -1.0)))
    data = find_critical_points(f, CFG)
    kinds = {round(p.x.real): p.kind for p in data.points}
    assert kinds == {0: "branch", 2: "pole"}


def test_anchor_synthesis():
    f = BivariateCurve(padd(mono(0, 1), mono(2, 0, -1.0)))  # y - x^2
    data = find_critical_points(f, CFG)
    assert len(data.points) == 1
    assert data.points[0].kind == "anchor"
    assert data.points[0].x == 0


def test_cluster_validation_on_perturbed_poly():
    # (x-1)^6 (x+1) with relative coefficient noise 1e-13
    base = np.polynomial.polynomial.polyfromroots([1.0] * 6 + [-1.0])
    rng = np.random.default_rng(3)
    noisy = base * (1.0 + 1e-13 * rng.normal(size=base.shape))
    R = UnivariatePoly(noisy)
    raw = R.roots()
    clusters = cluster_resultant_roots(R, raw, 1e-6)
    assert sorted(m for _, m in clusters) == [1, 6]
    for centre, m in clusters:
        target = 1.0 if m == 6 else -1.0
        assert abs(centre - target) < 1e-11
