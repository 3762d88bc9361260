"""Sheet permutations around problem points and at infinity."""

import numpy as np

from rsurf.config import Config
from rsurf.critical import find_critical_points
from rsurf.curves import BivariateCurve
from rsurf.geometry import build_contours
from rsurf.monodromy import (
    base_order,
    compose,
    compute_monodromy,
    cycle_type,
    invert,
)

from zoo import CUBIC, DIVG3, DIVG6, HYPEREX, KLEIN, TROTT, mono, padd

CFG = Config()


def run(curve, config=CFG):
    crit = find_critical_points(curve, config)
    return compute_monodromy(curve, crit, config)


def perm_at(mon, x):
    k = int(np.argmin(np.abs(mon.contours.centers - x)))
    assert abs(mon.contours.centers[k] - x) < 1e-3
    return mon.permutations[k]


# ---------------------------------------------------------------------------
# direction fix: y^3 = x, counterclockwise loop advances each root by a cube
# root of unity, and the base ordering puts the fibre as [r w, r, r w^2]


def test_cyclic_cover_direction():
    f = BivariateCurve(padd(mono(0, 3), mono(1, 0, -1.0)))  # y^3 - x
    mon = run(f)
    yb = mon.base_fiber
    r = abs(yb[1])
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(yb, [r * w, r, r * w**2], atol=1e-12)
    sigma = perm_at(mon, 0.0)
    assert sigma.tolist() == [2, 0, 1]
    assert mon.sigma_infinity.tolist() == [1, 2, 0]


# ---------------------------------------------------------------------------
# trinomial cubic: full permutation table in visiting order


def test_cubic_base_fiber():
    mon = run(CUBIC, Config(kappa=1 / 2.9))
    assert abs(mon.contours.base_point - (-0.6778)) < 1e-4
    assert np.allclose(mon.base_fiber, [-0.8374, 0.7299, 0.1075], atol=1e-4)


def test_cubic_permutation_table():
    mon = run(CUBIC, Config(kappa=1 / 2.9))
    expected = {
        -0.3197 - 0.9839j: [2, 1, 0],
        0.8370 - 0.6081j: [0, 2, 1],
        0.8370 + 0.6081j: [2, 1, 0],
        -0.3197 + 0.9839j: [0, 2, 1],
        0.0: [1, 0, 2],
        -1.0346: [0, 2, 1],
    }
    for x, perm in expected.items():
        assert perm_at(mon, x).tolist() == perm
    assert mon.sigma_infinity.tolist() == [2, 0, 1]


def test_cubic_closure_and_transitivity():
    mon = run(CUBIC)
    composed = np.arange(3)
    for v in mon.contours.visit_order:
        composed = compose(composed, mon.permutations[v])
    assert compose(composed, mon.sigma_infinity).tolist() == [0, 1, 2]
    assert mon.is_transitive()


# ---------------------------------------------------------------------------
# seven-sheeted cyclic cover: every permutation is a 7-cycle


def test_klein_cycles():
    mon = run(KLEIN)
    assert cycle_type(perm_at(mon, 0.0)) == (7,)
    assert cycle_type(perm_at(mon, 1.0)) == (7,)
    assert cycle_type(mon.sigma_infinity) == (7,)
    assert mon.is_transitive()


# ---------------------------------------------------------------------------
# hyperelliptic: two sheets swapped at every branch point, trivial at infinity


def test_hyperelliptic_transpositions():
    mon = run(HYPEREX)
    assert mon.sheet_count == 2
    branch = [p.x for p in find_critical_points(HYPEREX, CFG).points]
    for x in branch:
        assert perm_at(mon, x).tolist() == [1, 0]
    assert mon.sigma_infinity.tolist() == [0, 1]


# ---------------------------------------------------------------------------
# smooth quartic: twelve simple branch points, some sharing an x-projection


def test_trott_structure():
    mon = run(TROTT)
    assert mon.sheet_count == 4
    # symmetric pairs of branch points project to the same x, so a circle can
    # pick up two disjoint transpositions at once; twelve two-cycles in total
    two_cycles = sum(cycle_type(p).count(2) for p in mon.permutations)
    assert two_cycles == 12
    for p in mon.permutations:
        assert cycle_type(p) in ((2, 1, 1), (2, 2))
    assert cycle_type(mon.sigma_infinity) == (1, 1, 1, 1)
    assert mon.is_transitive()


def test_trott_base_fiber():
    mon = run(TROTT, Config(kappa=1 / 2.9))
    assert abs(mon.contours.base_point - (-0.9871)) < 1e-3
    expected = [0.9047j, -0.9047j, -0.1137, 0.1137]
    assert np.allclose(mon.base_fiber, expected, atol=1e-4)


# ---------------------------------------------------------------------------
# dividing curves: published sheet labels at the base point


def test_divg3_base_fiber():
    mon = run(DIVG3, Config(kappa=1 / 2.9))
    assert abs(mon.contours.base_point - (-1.8931 - 0.1931j)) < 1e-3
    expected = [
        -11.1415 - 0.8713j,
        -4.5308 - 0.4989j,
        -3.9376 - 0.5035j,
        -1.2143 - 0.2500j,
    ]
    assert np.allclose(mon.base_fiber, expected, atol=1e-3)


def test_divg6_base_fiber():
    # the quintic fibre moves fast along the tree lines; let the walk bisect
    mon = run(DIVG6, Config(kappa=1 / 2.9, adaptive_continuation=True))
    assert abs(mon.contours.base_point - (-1.8243 - 0.4642j)) < 1e-3
    expected = [
        -11.0742 - 2.7527j,
        -10.8111 - 2.0894j,
        -4.0601 - 1.2074j,
        -3.9298 - 1.2330j,
        -1.1382 - 0.6088j,
    ]
    assert np.allclose(mon.base_fiber, expected, atol=1e-3)


# ---------------------------------------------------------------------------
# permutation helpers


def test_compose_invert_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = rng.permutation(6)
        q = rng.permutation(6)
        pq = compose(p, q)
        assert compose(pq, invert(pq)).tolist() == list(range(6))
        assert invert(compose(p, q)).tolist() == compose(invert(q), invert(p)).tolist()


def test_base_order_rule():
    vals = np.array([1.0, -1.0, 2j, -2j, 3.0])
    got = vals[base_order(vals)]
    assert got.tolist() == [3.0, 2j, -2j, -1.0, 1.0]
