"""Monodromy permutations of the y-fibre along the contour system.

The fibre over the base point, ordered by descending magnitude, fixes the
sheet labels once and for all.  Walking the contour tree depth first while
matching fibres column by column transports that labelling to every circle;
the full loop around each problem point then reads off as a permutation of
the base sheets.  Composing all loops in visit order yields the inverse of
the permutation at infinity, whose cycle type is verified independently on
a single large circle enclosing every problem point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Config
from .critical import CriticalData
from .curves import BivariateCurve
from .errors import MonodromyMismatch
from .geometry import ContourSystem, _group_close, build_contours
from .quadrature import (
    CircleTrace,
    LineTrace,
    match_columns,
    solve_fiber,
    trace_circle,
    trace_line,
)

_TWO_PI = 2.0 * np.pi


def base_order(values: np.ndarray) -> np.ndarray:
    """Sheet ordering at the base point: descending magnitude, then
    descending imaginary part, then ascending real part.  Magnitude and
    imaginary part are compared up to a small tolerance so that symmetric
    fibres are ordered by the tie-breakers rather than by rounding noise."""
    tol = 1e-6 * max(1.0, float(np.abs(values).max()))
    mag = _group_close(np.abs(values), tol)
    im = _group_close(values.imag, tol)
    return np.lexsort((values.real, -im, -mag))


def compose(first: np.ndarray, then: np.ndarray) -> np.ndarray:
    """Permutation acting as `first` followed by `then`."""
    return then[first]


def invert(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv


def cycle_type(perm: np.ndarray) -> tuple[int, ...]:
    seen = np.zeros(len(perm), dtype=bool)
    lengths = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        length = 0
        j = s
        while not seen[j]:
            seen[j] = True
            j = int(perm[j])
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def cycles_of(perm: np.ndarray) -> list[list[int]]:
    seen = np.zeros(len(perm), dtype=bool)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        cyc = []
        j = s
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = int(perm[j])
        out.append(cyc)
    return out


@dataclass
class EdgeWalk:
    """Continuation pieces along one tree edge: the arc swept on the parent
    circle from its entry angle to the exit angle, then the straight line."""

    parent: int
    child: int
    arc: CircleTrace | None
    line: LineTrace
    arc_rows: np.ndarray | None
    line_rows: np.ndarray


@dataclass
class MonodromyData:
    contours: ContourSystem
    base_fiber: np.ndarray
    circles: list[CircleTrace]
    circle_rows: list[np.ndarray]
    edges: dict[tuple[int, int], EdgeWalk]
    entry_frames: list[np.ndarray]
    permutations: list[np.ndarray]
    sigma_infinity: np.ndarray

    @property
    def sheet_count(self) -> int:
        return len(self.base_fiber)

    def is_transitive(self) -> bool:
        n = self.sheet_count
        reach = {0}
        frontier = [0]
        while frontier:
            s = frontier.pop()
            for perm in self.permutations:
                t = int(perm[s])
                if t not in reach:
                    reach.add(t)
                    frontier.append(t)
        return len(reach) == n


def compute_monodromy(
    curve: BivariateCurve,
    critical: CriticalData,
    config: Config,
    contours: ContourSystem | None = None,
) -> MonodromyData:
    sys = contours if contours is not None else build_contours(critical, config)
    adaptive = config.adaptive_continuation

    yb = solve_fiber(curve, sys.base_point)
    yb = yb[base_order(yb)]
    n_pts = len(sys.centers)

    circles: list[CircleTrace | None] = [None] * n_pts
    circle_rows: list[np.ndarray | None] = [None] * n_pts
    frames: list[np.ndarray | None] = [None] * n_pts
    perms: list[np.ndarray | None] = [None] * n_pts
    edge_walks: dict[tuple[int, int], EdgeWalk] = {}

    def handle(v: int) -> None:
        node = sys.nodes[v]
        frame = frames[v]
        circ = trace_circle(
            curve, complex(sys.centers[v]), sys.radius, node.entry_angle,
            config.n_modes, adaptive,
        )
        rows = match_columns(frame, circ.Y[:, 0], context=f"entering circle {v}")
        circles[v] = circ
        circle_rows[v] = rows
        inv_rows = invert(rows)
        perms[v] = inv_rows[circ.cycle[rows]]

        for w in node.children:
            exit_angle = sys.exit_angle(v, w)
            span = (exit_angle - node.entry_angle) % _TWO_PI
            if span < 1e-12:
                arc = None
                arc_rows = None
                exit_frame = frame
            else:
                arc = trace_circle(
                    curve, complex(sys.centers[v]), sys.radius, node.entry_angle,
                    config.n_modes, adaptive, span=span,
                )
                arc_rows = match_columns(frame, arc.Y[:, 0], context=f"arc at {v}")
                exit_frame = arc.Y[arc_rows, -1]
            z1, z2 = sys.line_endpoints(v, w)
            line = trace_line(curve, z1, z2, config.line_modes, adaptive)
            line_rows = match_columns(exit_frame, line.Y[:, 0], context=f"line {v}->{w}")
            frames[w] = line.Y[line_rows, -1]
            edge_walks[(v, w)] = EdgeWalk(
                parent=v, child=w, arc=arc, line=line,
                arc_rows=arc_rows, line_rows=line_rows,
            )
            handle(w)

    frames[sys.base_index] = yb
    handle(sys.base_index)

    composed = np.arange(len(yb))
    for v in sys.visit_order:
        composed = compose(composed, perms[v])
    sigma_inf = invert(composed)

    # independent closure check on one circle enclosing everything
    far = config.far_field_factor * (float(np.abs(sys.centers).max()) + sys.radius)
    big = trace_circle(curve, 0.0, far, 0.0, config.n_modes, adaptive)
    if cycle_type(big.cycle) != cycle_type(composed):
        raise MonodromyMismatch(
            f"composed loops have cycle type {cycle_type(composed)} but the "
            f"far circle gives {cycle_type(big.cycle)}"
        )

    return MonodromyData(
        contours=sys,
        base_fiber=yb,
        circles=circles,
        circle_rows=circle_rows,
        edges=edge_walks,
        entry_frames=frames,
        permutations=perms,
        sigma_infinity=sigma_inf,
    )
