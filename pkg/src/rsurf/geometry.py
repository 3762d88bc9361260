"""Contour system in the x-plane: circles around problem points, tree of lines.

Every problem point gets a circle of common radius kappa * rho.  A minimal
spanning tree on the centers, rooted at the leftmost point, provides the
connecting lines; the walk that generates all monodromy permutations starts
at the base point on the root circle and traverses the tree depth first,
ordering children counterclockwise as seen from the direction of arrival.
The resulting post-order visit sequence is the one in which the local
permutations compose to the inverse of the permutation at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Config
from .critical import CriticalData
from .errors import GeometryError

_TWO_PI = 2.0 * np.pi


@dataclass
class ContourNode:
    index: int
    center: complex
    entry_angle: float
    parent: int | None
    children: list[int] = field(default_factory=list)


@dataclass
class ContourSystem:
    centers: np.ndarray
    radius: float
    rho: float
    base_index: int
    base_point: complex
    nodes: list[ContourNode]
    edges: list[tuple[int, int]]
    visit_order: list[int]

    def exit_angle(self, u: int, v: int) -> float:
        """Angle on circle u pointing at center v."""
        return float(np.angle(self.centers[v] - self.centers[u]))

    def circle_point(self, u: int, angle: float) -> complex:
        return complex(self.centers[u] + self.radius * np.exp(1j * angle))

    def line_endpoints(self, u: int, v: int) -> tuple[complex, complex]:
        """Start and end of the segment joining circle u to circle v."""
        a = self.exit_angle(u, v)
        return self.circle_point(u, a), self.circle_point(v, a + np.pi)


def _group_close(keys: np.ndarray, tol: float) -> np.ndarray:
    """Label values that agree within tol with a common ascending group id."""
    order = np.argsort(keys)
    labels = np.empty(len(keys), dtype=int)
    g = 0
    prev = None
    for idx in order:
        if prev is not None and keys[idx] - prev > tol:
            g += 1
        labels[idx] = g
        prev = keys[idx]
    return labels


def _segment_distance(z: complex, a: complex, b: complex) -> float:
    """Distance from z to the segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return abs(z - a)
    t = ((z - a) * np.conj(d)).real / L2
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * d))


def _prim_mst(centers: np.ndarray, root: int) -> list[tuple[int, int]]:
    n = len(centers)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[root] = True
    dist = np.abs(centers - centers[root])
    best = np.full(n, root)
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        dist_masked = np.where(in_tree, np.inf, dist)
        k = int(np.argmin(dist_masked))
        edges.append((int(best[k]), k))
        in_tree[k] = True
        newd = np.abs(centers - centers[k])
        closer = newd < dist
        dist = np.where(closer, newd, dist)
        best = np.where(closer, k, best)
    return edges


def build_contours(critical: CriticalData, config: Config) -> ContourSystem:
    centers = np.array([p.x for p in critical.points], dtype=complex)
    if len(centers) == 0:
        raise GeometryError("no problem points to encircle")
    rho = critical.rho
    radius = config.kappa * rho

    # root: leftmost problem point, conjugate pairs broken toward lower half
    real_group = _group_close(centers.real, 1e-9 * (1.0 + float(np.abs(centers).max())))
    order = np.lexsort((centers.imag, real_group))
    root = int(order[0])

    # the base sits on the root circle facing the nearest other point, which
    # is where the first tree edge leaves the circle
    if len(centers) >= 2:
        gaps = np.abs(centers - centers[root])
        gaps[root] = np.inf
        u = centers[int(np.argmin(gaps))] - centers[root]
        u /= abs(u)
    else:
        u = 1.0 + 0.0j
    base_point = complex(centers[root] + radius * u)
    base_angle = float(np.angle(u))

    edges = _prim_mst(centers, root)

    # circles of radius kappa*rho with kappa <= 1/2 cannot overlap, and by the
    # cycle property of the MST no connecting line can come closer than rho/2
    # to a third center; verify both instead of rerouting
    n = len(centers)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(centers[i] - centers[j]) < 2.0 * radius * (1.0 - 1e-12):
                raise GeometryError(
                    f"circles around {centers[i]:.6g} and {centers[j]:.6g} overlap"
                )
    sys = ContourSystem(
        centers=centers,
        radius=radius,
        rho=rho,
        base_index=root,
        base_point=base_point,
        nodes=[],
        edges=edges,
        visit_order=[],
    )
    for u, v in edges:
        a, b = sys.line_endpoints(u, v)
        for k in range(n):
            if k == u or k == v:
                continue
            if _segment_distance(complex(centers[k]), a, b) < radius * (1.0 + 1e-12):
                raise GeometryError(
                    f"line {centers[u]:.6g} -> {centers[v]:.6g} passes through "
                    f"the circle around {centers[k]:.6g}"
                )

    adjacency: dict[int, list[int]] = {i: [] for i in range(n)}
    for u, v in edges:
        adjacency[u].append(v)

    nodes = [ContourNode(index=i, center=complex(centers[i]), entry_angle=0.0, parent=None) for i in range(n)]
    visit: list[int] = []

    def descend(v: int, parent: int | None) -> None:
        node = nodes[v]
        node.parent = parent
        if parent is None:
            node.entry_angle = base_angle
        else:
            node.entry_angle = float(np.angle(centers[parent] - centers[v]))
        kids = adjacency[v]
        keyed = sorted(
            kids,
            key=lambda c: (float(np.angle(centers[c] - centers[v])) - node.entry_angle) % _TWO_PI,
        )
        node.children = keyed
        for c in keyed:
            descend(c, v)
        visit.append(v)

    descend(root, None)
    sys.nodes = nodes
    sys.visit_order = visit
    return sys
