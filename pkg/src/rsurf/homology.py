"""Canonical homology basis and period matrices from the monodromy data.

Branch places on the covering are the nontrivial cycles of the loop
permutations.  Sheets and branch places form a bipartite graph; its
spanning tree, embedded in the plane with the angular order of the loops
around the base point, closes up into 2g+N-1 independent cycles, one per
non-tree edge.  Pairwise intersection numbers drop out of the chord
crossing pattern on the boundary walk of the thickened tree.  An exact
integer congruence brings the intersection form to canonical symplectic
shape; the same combination assembles a- and b-periods out of loop
integrals of the candidate differentials, and the Riemann matrix follows
by solving the a-period system.  The asymmetry of the result and the size
of the null-cycle periods form the accuracy diagnostic err.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import Config
from .curves import BivariateCurve
from .differentials import DifferentialBasis
from .errors import (
    AccuracyWarning,
    ConsistencyError,
    GenusMismatch,
    InternalGraph,
    NotUnimodular,
    SingularAMatrix,
)
from .monodromy import MonodromyData, cycles_of, invert


@dataclass(frozen=True)
class BranchPlace:
    """One ramification point of the covering: a permutation cycle over a
    problem point; node None marks the place over infinity."""

    node: int | None
    sheets: tuple[int, ...]

    @property
    def branching_number(self) -> int:
        return len(self.sheets) - 1


@dataclass
class RamificationProfile:
    places: list[BranchPlace]
    sheet_count: int

    @property
    def genus(self) -> int:
        total = sum(p.branching_number for p in self.places)
        if total % 2:
            raise GenusMismatch(f"odd total branching number {total}")
        return total // 2 - self.sheet_count + 1


def ramification_from_monodromy(mon: MonodromyData) -> RamificationProfile:
    """Branch places in loop order (finite loops by visit order, infinity
    last), cycles within one permutation by their smallest sheet."""
    places = []
    for v in mon.contours.visit_order:
        for cyc in cycles_of(mon.permutations[v]):
            if len(cyc) > 1:
                places.append(BranchPlace(node=int(v), sheets=tuple(cyc)))
    for cyc in cycles_of(mon.sigma_infinity):
        if len(cyc) > 1:
            places.append(BranchPlace(node=None, sheets=tuple(cyc)))
    return RamificationProfile(places=places, sheet_count=mon.sheet_count)


# ---------------------------------------------------------------------------
# the bipartite sheet/place graph and its planar spanning tree
# ---------------------------------------------------------------------------


def _place_rotation_key(profile: RamificationProfile, mon: MonodromyData) -> list[int]:
    """Angular position of each place's loop around the base point."""
    pos = {int(v): k for k, v in enumerate(mon.contours.visit_order)}
    far = len(pos)
    return [far if p.node is None else pos[p.node] for p in profile.places]


@dataclass
class _Graph:
    """Spanning tree plus chords of the sheet/place incidence graph.

    Vertices are ('s', sheet) and ('p', place index).  Rotations list the
    incident edges of each vertex in planar order: places around a sheet
    by the angular order of their loops, sheets around a place in cycle
    order.  Cycles c_j correspond to the chords, oriented from their
    sheet end to their place end and numbered by where the reverse dart
    sits on the boundary walk of the thickened tree.
    """

    rotations: dict
    parent: dict
    chords: list
    order: list


def _build_graph(profile: RamificationProfile, mon: MonodromyData) -> _Graph:
    key = _place_rotation_key(profile, mon)
    n_sheets = profile.sheet_count
    incident = [[] for _ in range(n_sheets)]
    for i, place in enumerate(profile.places):
        for s in place.sheets:
            incident[s].append(i)
    for s in range(n_sheets):
        incident[s].sort(key=lambda i: key[i])

    rotations: dict = {}
    for s in range(n_sheets):
        rotations[("s", s)] = [("p", i) for i in incident[s]]
    for i, place in enumerate(profile.places):
        rotations[("p", i)] = [("s", s) for s in place.sheets]

    root = ("s", 0)
    parent: dict = {root: None}
    used = set()
    chords = []
    order = [root]
    queue = [root]
    while queue:
        u = queue.pop(0)
        neighbors = rotations[u]
        if u[0] == "p" and parent[u] is not None:
            # children of a place in cycle order starting after the
            # sheet the tree arrived from
            k = neighbors.index(parent[u])
            neighbors = neighbors[k + 1 :] + neighbors[:k]
        for w in neighbors:
            e = frozenset((u, w))
            if e in used:
                continue
            used.add(e)
            if w in parent:
                chords.append((u, w))
            else:
                parent[w] = u
                order.append(w)
                queue.append(w)
    return _Graph(rotations=rotations, parent=parent, chords=chords, order=order)


def _boundary_slots(graph: _Graph) -> dict:
    """Slot of every chord dart along the boundary walk of the thickened
    spanning tree, walking the rotations as given."""
    root = graph.order[0]
    is_tree = {frozenset((v, p)) for v, p in graph.parent.items() if p is not None}

    start = None
    for w in graph.rotations[root]:
        if frozenset((root, w)) in is_tree:
            start = (root, w)
            break
    if start is None:
        return {}

    # follow tree darts; at each vertex continue with the rotation
    # successor of the arrival edge, stepping over chord ends
    slots: dict = {}
    counter = 0
    dart = start
    while True:
        u, v = dart
        rot = graph.rotations[v]
        k = rot.index(u)
        for step in range(1, len(rot) + 1):
            w = rot[(k + step) % len(rot)]
            if frozenset((v, w)) in is_tree:
                dart = (v, w)
                break
            slots[(v, w)] = counter
            counter += 1
        if dart == start:
            break
    return slots


def _canonical_chords(graph: _Graph, slots: dict) -> list:
    """Chords oriented sheet -> place and sorted by the boundary slot of
    the reverse (place -> sheet) dart.  Fixes the cycle numbering
    independently of tree traversal order."""
    oriented = []
    for u, w in graph.chords:
        s, p = (u, w) if u[0] == "s" else (w, u)
        oriented.append((s, p))
    oriented.sort(key=lambda sp: slots[(sp[1], sp[0])])
    return oriented


def _crossing_sign(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Signed crossing of two oriented chords of a circle; slots are
    positions on the (counterclockwise) boundary walk."""
    a0, a1 = a
    b0, b1 = b

    def between(x, lo, hi):
        if lo < hi:
            return lo < x < hi
        return x > lo or x < hi

    first_inside = between(b0, a0, a1)
    second_inside = between(b1, a0, a1)
    if first_inside == second_inside:
        return 0
    return 1 if first_inside else -1


def intersection_matrix(graph: _Graph, slots: dict | None = None) -> np.ndarray:
    if slots is None:
        slots = _boundary_slots(graph)
    pairs = [(slots[(u, w)], slots[(w, u)]) for u, w in graph.chords]
    n = len(pairs)
    K = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i != j:
                K[i, j] = _crossing_sign(pairs[i], pairs[j])
    return K


def _walk_of_chord(graph: _Graph, chord) -> list:
    """Closed vertex walk root -> u -> w -> root for one chord (u, w)."""
    u, w = chord

    def path_to_root(v):
        out = [v]
        while graph.parent[out[-1]] is not None:
            out.append(graph.parent[out[-1]])
        return out

    up = path_to_root(u)
    down = path_to_root(w)
    return up[::-1] + down


# ---------------------------------------------------------------------------
# symplectic normalization, exact integer congruence
# ---------------------------------------------------------------------------


def _int_det(M: np.ndarray) -> int:
    """Exact determinant of an integer matrix, fraction-free elimination."""
    a = [[int(v) for v in row] for row in M]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def symplectic_normalize(K: np.ndarray) -> tuple[np.ndarray, int]:
    """Unimodular alpha with alpha K alpha^T in canonical block form;
    returns (alpha, g).

    Greedy pairing: scan row-major for the first pair of basis vectors
    with pairing +-1, set (a, b) to their negatives ordered so a o b = 1,
    then remove the pair from every remaining vector symplectically.
    Vectors left with all pairings zero are the null combinations.
    Integer arithmetic throughout."""
    K = np.asarray(K, dtype=np.int64)
    if not np.array_equal(K, -K.T):
        raise NotUnimodular("intersection matrix is not antisymmetric")
    n = K.shape[0]
    vecs = [row.copy() for row in np.eye(n, dtype=np.int64)]

    def form(u, v):
        return int(u @ K @ v)

    a_rows: list[np.ndarray] = []
    b_rows: list[np.ndarray] = []
    while True:
        pivot = None
        fallback = None
        m = len(vecs)
        for i in range(m):
            for j in range(i + 1, m):
                p = form(vecs[i], vecs[j])
                if abs(p) == 1:
                    pivot = (i, j, p)
                    break
                if p and (fallback is None or abs(p) < abs(fallback[2])):
                    fallback = (i, j, p)
            if pivot:
                break
        if pivot is None:
            if fallback is None:
                break
            # no unit pairing anywhere; shrink the smallest by shears
            i, j, p = fallback
            reduced = False
            for k in range(m):
                if k in (i, j):
                    continue
                q = form(vecs[i], vecs[k])
                if q % p:
                    vecs[k] = vecs[k] - (q // p) * vecs[j]
                    reduced = True
                    break
                q = form(vecs[j], vecs[k])
                if q % p:
                    vecs[k] = vecs[k] + (q // p) * vecs[i]
                    reduced = True
                    break
            if not reduced:
                raise NotUnimodular(
                    f"elementary divisor {abs(p)} in the intersection form"
                )
            continue
        i, j, p = pivot
        a, b = (-vecs[i], -vecs[j]) if p > 0 else (-vecs[j], -vecs[i])
        a_rows.append(a)
        b_rows.append(b)
        rest = [vecs[k] for k in range(m) if k not in (i, j)]
        vecs = [v - form(v, b) * a + form(v, a) * b for v in rest]

    g = len(a_rows)
    alpha = np.array(a_rows + b_rows + vecs, dtype=np.int64).reshape(n, n)
    if _int_det(alpha) not in (1, -1):
        raise NotUnimodular("basis transform is not unimodular")
    # exact defining identity
    J = np.zeros((n, n), dtype=np.int64)
    J[:g, g : 2 * g] = np.eye(g, dtype=np.int64)
    J[g : 2 * g, :g] = -np.eye(g, dtype=np.int64)
    if not np.array_equal(alpha @ K @ alpha.T, J):
        raise NotUnimodular("reduction failed to reach the canonical block form")
    return alpha, g


# ---------------------------------------------------------------------------
# homology basis
# ---------------------------------------------------------------------------


@dataclass
class HomologyBasis:
    profile: RamificationProfile
    cycles: list          # vertex walks of the c_j in canonical chord order
    K: np.ndarray
    alpha: np.ndarray
    genus: int

    @property
    def a_rows(self) -> np.ndarray:
        return self.alpha[: self.genus]

    @property
    def b_rows(self) -> np.ndarray:
        return self.alpha[self.genus : 2 * self.genus]

    @property
    def null_rows(self) -> np.ndarray:
        return self.alpha[2 * self.genus :]

    def encoded_cycle(self, j: int) -> list[int]:
        """Walk of c_j in print form: sheets at odd positions (1-based),
        place indices at even positions."""
        out = []
        for v in self.cycles[j]:
            out.append(int(v[1]) + 1)
        return out

    def encoded_combination(self, coeffs) -> list[int]:
        """Walk of an integer combination of the c_j in print form.

        Terms are concatenated in ascending cycle index, negative
        coefficients reverse the walk; all chord walks share the root
        sheet as base point, so consecutive terms glue end to start.
        """
        walk: list[int] = []
        for j, m in enumerate(np.asarray(coeffs, dtype=np.int64)):
            if m == 0:
                continue
            piece = self.cycles[j] if m > 0 else self.cycles[j][::-1]
            seq = [int(v[1]) + 1 for v in piece]
            for _ in range(abs(int(m))):
                walk = seq.copy() if not walk else walk[:-1] + seq
        return walk


def tretkoff_basis(profile: RamificationProfile, mon: MonodromyData) -> HomologyBasis:
    graph = _build_graph(profile, mon)
    expected = 2 * profile.genus + profile.sheet_count - 1
    if len(graph.chords) != expected:
        raise InternalGraph(
            f"{len(graph.chords)} independent cycles, expected {expected}"
        )
    slots = _boundary_slots(graph)
    graph.chords = _canonical_chords(graph, slots)
    K = intersection_matrix(graph, slots)
    alpha, g = symplectic_normalize(K)
    if g != profile.genus:
        raise InternalGraph(f"intersection rank gives genus {g}, profile {profile.genus}")
    walks = [_walk_of_chord(graph, chord) for chord in graph.chords]
    return HomologyBasis(profile=profile, cycles=walks, K=K, alpha=alpha, genus=g)


# ---------------------------------------------------------------------------
# loop integrals of the candidate differentials
# ---------------------------------------------------------------------------


def candidate_loop_integrals(
    curve: BivariateCurve, mon: MonodromyData, monomials: list[tuple[int, int]]
) -> tuple[list[np.ndarray], np.ndarray]:
    """Integrals of x^i y^j / f_y dx around every problem loop and around
    infinity, per base sheet; shape (n_sheets, n_monomials) each."""
    fy = curve.deriv(dy=1)
    n = mon.sheet_count
    m_count = len(monomials)

    def trace_integrals(x_nodes, Y, integrate):
        vals = np.empty((Y.shape[0], m_count), dtype=complex)
        base = 1.0 / fy(x_nodes[None, :], Y)
        for m, (i, j) in enumerate(monomials):
            vals[:, m] = integrate(x_nodes[None, :] ** i * Y**j * base)
        return vals

    circle_ints = {}
    for v, circ in enumerate(mon.circles):
        dz = circ.dz_dphi()[None, :]
        circle_ints[v] = trace_integrals(
            circ.z_nodes, circ.Y, lambda w: circ.integrate_dphi(w * dz)
        )

    sys = mon.contours
    path_ints: dict[int, np.ndarray] = {sys.base_index: np.zeros((n, m_count), dtype=complex)}
    # accumulate edge pieces from the root outward; edges store row maps in
    # base sheet order
    pending = [sys.base_index]
    while pending:
        u = pending.pop()
        for w in sys.nodes[u].children:
            walkE = mon.edges[(u, w)]
            piece = np.zeros((n, m_count), dtype=complex)
            if walkE.arc is not None:
                dz = walkE.arc.dz_dphi()[None, :]
                arc_vals = trace_integrals(
                    walkE.arc.z_nodes,
                    walkE.arc.Y,
                    lambda z: walkE.arc.integrate_dphi(z * dz),
                )
                piece += arc_vals[walkE.arc_rows]
            line_vals = trace_integrals(
                walkE.line.z_nodes, walkE.line.Y, walkE.line.integrate_dz
            )
            piece += line_vals[walkE.line_rows]
            path_ints[w] = path_ints[u] + piece
            pending.append(w)

    loops = [None] * len(mon.circles)
    for v in range(len(mon.circles)):
        rows = mon.circle_rows[v]
        sigma = mon.permutations[v]
        loops[v] = path_ints[v] + circle_ints[v][rows] - path_ints[v][sigma]

    # loop around infinity: inverse of the product of all loops in visit
    # order, transported sheet by sheet
    prod = np.zeros((n, m_count), dtype=complex)
    chain = np.arange(n)
    for v in mon.contours.visit_order:
        prod += loops[v][chain]
        chain = mon.permutations[v][chain]
    # chain now equals the composed product = sigma_infinity^{-1}
    inf_loop = -prod[mon.sigma_infinity]
    return loops, inf_loop


def _steps_of_walk(walk) -> list[tuple[int, int, int]]:
    """(sheet_from, place, sheet_to) triples of a closed vertex walk."""
    out = []
    for k in range(1, len(walk) - 1, 2):
        out.append((walk[k - 1][1], walk[k][1], walk[k + 1][1]))
    return out


def cycle_period_rows(
    basis: HomologyBasis,
    mon: MonodromyData,
    loops: list[np.ndarray],
    inf_loop: np.ndarray,
) -> np.ndarray:
    """Integral of every candidate differential along every cycle c_j."""
    m_count = loops[0].shape[1] if loops else inf_loop.shape[1]
    out = np.zeros((len(basis.cycles), m_count), dtype=complex)
    for j, walk in enumerate(basis.cycles):
        total = np.zeros(m_count, dtype=complex)
        for s_from, place_idx, s_to in _steps_of_walk(walk):
            place = basis.profile.places[place_idx]
            if place.node is None:
                sigma = mon.sigma_infinity
                table = inf_loop
            else:
                sigma = mon.permutations[place.node]
                table = loops[place.node]
            t = s_from
            for _ in range(len(place.sheets)):
                total += table[t]
                t = int(sigma[t])
                if t == s_to:
                    break
            else:
                raise InternalGraph(
                    f"walk step {s_from}->{s_to} never closes around place {place_idx}"
                )
        out[j] = total
    return out


# ---------------------------------------------------------------------------
# periods and the Riemann matrix
# ---------------------------------------------------------------------------


@dataclass
class PeriodData:
    A: np.ndarray
    B: np.ndarray
    riemann: np.ndarray
    err: float
    err_asymmetry: float
    err_null: float


def riemann_matrix(
    curve: BivariateCurve,
    mon: MonodromyData,
    homology: HomologyBasis,
    diff_basis: DifferentialBasis,
    config: Config,
) -> PeriodData:
    loops, inf_loop = candidate_loop_integrals(curve, mon, diff_basis.monomials)
    rows_mono = cycle_period_rows(homology, mon, loops, inf_loop)
    rows = rows_mono @ diff_basis.vectors

    g = homology.genus
    if rows.shape[1] != g:
        raise ConsistencyError(
            f"{rows.shape[1]} holomorphic differentials against homology "
            f"rank {g}; the two genus computations disagree"
        )
    A = homology.a_rows @ rows
    B = homology.b_rows @ rows
    null_p = homology.null_rows @ rows
    err_null = float(np.abs(null_p).max()) if null_p.size else 0.0

    if g:
        if np.linalg.cond(A) > 1e13:
            raise SingularAMatrix(
                "a-period matrix is numerically singular; homology and "
                "differential basis are inconsistent"
            )
        # rows index cycles, columns differentials, so the normalized
        # matrix is B A^{-1}
        riem = np.linalg.solve(A.T, B.T).T
    else:
        riem = np.zeros((0, 0), dtype=complex)
    err_asym = float(np.abs(riem - riem.T).max()) if g else 0.0
    err = max(err_asym, err_null)
    if err > config.tol:
        warnings.warn(
            f"period consistency residual {err:.3e} exceeds tolerance {config.tol:.1e}",
            AccuracyWarning,
            stacklevel=2,
        )
    if g:
        eig = np.linalg.eigvalsh(riem.imag)
        if eig.min() <= 0:
            raise ConsistencyError(
                f"imaginary part of the Riemann matrix is not positive definite "
                f"(smallest eigenvalue {eig.min():.3e})"
            )
    return PeriodData(
        A=A, B=B, riemann=riem, err=err, err_asymmetry=err_asym, err_null=err_null
    )


def compute_homology(mon: MonodromyData) -> HomologyBasis:
    return tretkoff_basis(ramification_from_monodromy(mon), mon)
