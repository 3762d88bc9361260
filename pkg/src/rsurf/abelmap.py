"""Abel map of the surface, with a local jet at every point.

The integral of the normalized holomorphic differentials from a fixed base
point to a target point P is assembled from the stored monodromy traces:
tree paths carry the integral to the circle entries, partial circle sums
carry it around a problem point, and a fresh line trace covers the last
stretch.  Near a branch point, and near infinity, straight-line transport
degrades, so there the map is evaluated through Cauchy integrals on the
lifted circle in the local parameter t (t^r = x - b, resp. t^r = 1/x),
which also yields the first three t-derivatives used by the KP layer.

Results come with the characteristic pair (p, q) of the reduced vector,
omega = q + B p modulo the period lattice, with both entries in the
half-open box (-1/2, 1/2]^g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .differentials import DifferentialBasis, eval_differentials
from .errors import BranchSelectionFailure, CurveInputError, RegionMismatch
from .monodromy import base_order, cycles_of, invert
from .pipeline import SurfaceData
from .quadrature import (
    chebyshev_diff_matrix,
    match_columns,
    solve_fiber,
    trace_circle,
    trace_line,
)
from .theta import reduce_argument

_REGIME_TOL = 1e-9     # relative overlap of the regime boundaries
_EXACT_TOL = 1e-9      # below this distance a point is the branch place itself
_FAR_CLEARANCE = 1.25  # far circle radius over the rim of the problem circles
_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# points and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePoint:
    """A surface point: base coordinate x and a sheet number 1..N.

    x=None marks a point over infinity.  Over a regular x the sheet counts
    through the fiber in canonical order; over a branch point the fiber is
    degenerate and the sheet instead selects the place through the local
    monodromy cycle containing that base sheet label, so all sheets of one
    cycle name the same place.
    """

    x: complex | None
    sheet: int = 1


def surface_point(text: str) -> SurfacePoint:
    """Parse "x@sheet" with x a complex literal ("1.5-0.3i") or "inf"."""
    body, _, sheet_part = text.partition("@")
    body = body.strip().lower().replace(" ", "")
    try:
        sheet = int(sheet_part) if sheet_part else 1
        if body in ("inf", "infinity", "oo"):
            return SurfacePoint(None, sheet)
        return SurfacePoint(complex(body.replace("i", "j")), sheet)
    except ValueError:
        raise CurveInputError(f"cannot parse surface point {text!r}")


@dataclass
class AbelResult:
    """Abel vector at one point together with its local expansion data.

    omega is the representative obtained along the assembled path; (p, q)
    is its reduction into the fundamental cell.  u, v, w are the first
    three derivatives of the map in the local parameter (x - x_P away from
    the special regions, t otherwise), and param is the value of t at the
    point.  closure records how far the lifted evaluation circle was from
    closing up, a quadrature consistency measure; it is 0 in the general
    regime, which uses no closed circle.
    """

    omega: np.ndarray
    p: np.ndarray
    q: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    regime: str
    param: complex = 0.0
    closure: float = 0.0


@dataclass
class DivisorSum:
    """Weighted sum of reduced Abel vectors over the points of a divisor."""

    omega: np.ndarray
    p: np.ndarray
    q: np.ndarray


def reduce_to_fundamental(omega: np.ndarray, riemann: np.ndarray):
    """Split omega = q + B p + lattice with p, q in (-1/2, 1/2]^g."""
    omega = np.asarray(omega, dtype=complex)
    if omega.size == 0:
        return np.zeros(0), np.zeros(0)
    arg = reduce_argument(omega, riemann)
    return arg.p_box, arg.q_box


# ---------------------------------------------------------------------------
# cached transport tables
# ---------------------------------------------------------------------------


@dataclass
class _FarTables:
    """Transport onto the circle enclosing every problem point."""

    big: object            # CircleTrace around the origin
    rows: np.ndarray       # base sheet -> trace row at the start angle
    path: np.ndarray       # (N, g) integral base -> circle start, per sheet
    cum: np.ndarray        # (rows, g, nodes) running integral along each row
    full: np.ndarray       # (rows, g) full-turn integrals
    touch: float           # start angle of the trace


@dataclass
class _AbelTables:
    nu_basis: DifferentialBasis
    path: dict
    cum: dict
    full: dict
    connectors: np.ndarray
    far: _FarTables | None = None


def _normalized_basis(surface: SurfaceData) -> DifferentialBasis:
    """Differential basis rescaled so the a-period matrix is the identity."""
    vectors = surface.differentials.vectors @ np.linalg.inv(surface.periods.A)
    return replace(surface.differentials, vectors=vectors, genus=surface.genus)


def _nu_trace(nub: DifferentialBasis, x_nodes: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Normalized integrand on a stored trace; shape (rows, g, nodes)."""
    vals = eval_differentials(nub, x_nodes[None, :], Y)
    return np.moveaxis(vals, 0, 1)


def _tree_paths(surface: SurfaceData, nub: DifferentialBasis) -> dict:
    """Integral from the base point to every circle entry, per base sheet."""
    mon = surface.monodromy
    sys = mon.contours
    n, g = mon.sheet_count, nub.genus
    path = {sys.base_index: np.zeros((n, g), dtype=complex)}
    pending = [sys.base_index]
    while pending:
        u = pending.pop()
        for w in sys.nodes[u].children:
            e = mon.edges[(u, w)]
            piece = np.zeros((n, g), dtype=complex)
            if e.arc is not None:
                vals = _nu_trace(nub, e.arc.z_nodes, e.arc.Y)
                vals *= e.arc.dz_dphi()[None, None, :]
                piece += e.arc.integrate_dphi(vals)[e.arc_rows]
            vals = _nu_trace(nub, e.line.z_nodes, e.line.Y)
            piece += e.line.integrate_dz(vals)[e.line_rows]
            path[w] = path[u] + piece
            pending.append(w)
    return path


def _connectors(surface: SurfaceData, loops: list) -> np.ndarray:
    """Integral from the first sheet over the base point to every other
    sheet, along a word in the problem loops; any word works modulo the
    period lattice, so a breadth-first search picks one deterministically."""
    mon = surface.monodromy
    n, g = mon.sheet_count, loops[0].shape[1] if loops else 0
    out = np.zeros((n, g), dtype=complex)
    seen = [False] * n
    seen[0] = True
    queue = [0]
    while queue:
        s = queue.pop(0)
        for v in range(len(loops)):
            t = int(mon.permutations[v][s])
            if not seen[t]:
                seen[t] = True
                out[t] = out[s] + loops[v][s]
                queue.append(t)
    if not all(seen):
        raise BranchSelectionFailure("monodromy does not connect all sheets")
    return out


def _abel_tables(surface: SurfaceData) -> _AbelTables:
    cached = surface.cache.get("abel")
    if cached is not None:
        return cached
    mon = surface.monodromy
    nub = _normalized_basis(surface)
    path = _tree_paths(surface, nub)
    cum, full = {}, {}
    loops = [None] * len(mon.circles)
    for v, circ in enumerate(mon.circles):
        vals = _nu_trace(nub, circ.z_nodes, circ.Y)
        vals *= circ.dz_dphi()[None, None, :]
        cum[v] = circ.cumulative_dphi(vals)
        full[v] = cum[v][:, :, -1]
        rows = mon.circle_rows[v]
        loops[v] = path[v] + full[v][rows] - path[v][mon.permutations[v]]
    tables = _AbelTables(
        nu_basis=nub,
        path=path,
        cum=cum,
        full=full,
        connectors=_connectors(surface, loops),
    )
    surface.cache["abel"] = tables
    return tables


def _far_tables(surface: SurfaceData) -> _FarTables:
    """Trace the Abel far circle and accumulate the transport onto it.

    The radius keeps a modest clearance over the rim of the problem
    circles but stays inside the far evaluation region, so that every
    point of the region lies outside the circle."""
    tables = _abel_tables(surface)
    if tables.far is not None:
        return tables.far
    curve, mon, config = surface.curve, surface.monodromy, surface.config
    sys = mon.contours
    nub = tables.nu_basis
    n = mon.sheet_count

    outer = int(np.argmax(np.abs(sys.centers)))
    r_rim = float(np.abs(sys.centers[outer])) + sys.radius
    r_big = _FAR_CLEARANCE * r_rim
    touch = float(np.angle(sys.centers[outer])) if abs(sys.centers[outer]) > 0 else 0.0

    frame = mon.entry_frames[outer]
    path = tables.path[outer].copy()
    span = (touch - sys.nodes[outer].entry_angle) % _TWO_PI
    if span > 1e-12:
        arc = trace_circle(
            curve, complex(sys.centers[outer]), sys.radius,
            sys.nodes[outer].entry_angle, config.n_modes,
            config.adaptive_continuation, span=span,
        )
        rows = match_columns(frame, arc.Y[:, 0], context="arc to the far circle")
        vals = _nu_trace(nub, arc.z_nodes, arc.Y) * arc.dz_dphi()[None, None, :]
        path += arc.integrate_dphi(vals)[rows]
        frame = arc.Y[rows, -1]

    ray = trace_line(
        curve,
        r_rim * np.exp(1j * touch),
        r_big * np.exp(1j * touch),
        config.n_modes,
        config.adaptive_continuation,
    )
    rows = match_columns(frame, ray.Y[:, 0], context="ray to the far circle")
    path += ray.integrate_dz(_nu_trace(nub, ray.z_nodes, ray.Y))[rows]
    frame = ray.Y[rows, -1]

    big = trace_circle(
        curve, 0.0, r_big, touch, 2 * config.n_modes, config.adaptive_continuation
    )
    rows = match_columns(frame, big.Y[:, 0], context="entering the far circle")
    vals = _nu_trace(nub, big.z_nodes, big.Y) * big.dz_dphi()[None, None, :]
    cum = big.cumulative_dphi(vals)
    far = _FarTables(
        big=big, rows=rows, path=path, cum=cum, full=cum[:, :, -1], touch=touch
    )
    tables.far = far
    return far


# ---------------------------------------------------------------------------
# regime geometry and shared helpers
# ---------------------------------------------------------------------------


def _far_radius(surface: SurfaceData) -> float:
    sys = surface.monodromy.contours
    return _FAR_CLEARANCE * (float(np.abs(sys.centers).max()) + sys.radius)


def far_threshold(surface: SurfaceData) -> float:
    """|x| beyond which the far regime applies; at least a shade outside
    the far circle itself, so the Cauchy representation stays valid."""
    sys = surface.monodromy.contours
    bmax = float(np.abs(sys.centers).max())
    return max(surface.config.far_field_factor * bmax, 1.05 * _far_radius(surface))


def near_radius(surface: SurfaceData) -> float:
    """Distance to a problem point below which the circle regime applies."""
    sys = surface.monodromy.contours
    return surface.config.near_circle_factor * sys.radius


def _canonical_fiber(curve, x: complex) -> np.ndarray:
    y = solve_fiber(curve, complex(x))
    return y[base_order(y)]


def _sheet_index(point: SurfacePoint, n: int) -> int:
    if not (1 <= point.sheet <= n):
        raise CurveInputError(f"sheet {point.sheet} out of range 1..{n}")
    return point.sheet - 1


def _wrap_angle(a: float) -> float:
    """Into (-pi, pi]."""
    return float(-((-a + np.pi) % _TWO_PI - np.pi))


def _branch_row(curve, ref_column, z_from, x, y_target, n_line, context):
    """Continue the full fiber from a trace node to x and name the row that
    arrives at y_target."""
    line = trace_line(curve, complex(z_from), complex(x), n_line, True)
    lrows = match_columns(ref_column, line.Y[:, 0], context=context)
    end = line.Y[lrows, -1]
    d = np.abs(end - y_target)
    rho = int(np.argmin(d))
    others = np.delete(d, rho)
    scale = max(1.0, float(np.abs(end).max()))
    if d[rho] > 1e-6 * scale and (others.size == 0 or d[rho] > 0.01 * others.min()):
        raise BranchSelectionFailure(
            f"no continued sheet reaches y = {y_target:.6g} at x = {x:.6g} "
            f"(best miss {d[rho]:.3g})"
        )
    return rho, line, lrows


def _lifted_values(cum: np.ndarray, full: np.ndarray, cyc: list, base: np.ndarray):
    """Running Abel values along the r-turn lift of a circle, turn by turn.

    The lift closes on the surface, so the accumulated full turns must sum
    to zero; the defect is returned as a quadrature consistency measure."""
    r = len(cyc)
    F = np.empty((r,) + cum.shape[1:], dtype=complex)
    acc = base.astype(complex).copy()
    for m, rho in enumerate(cyc):
        F[m] = acc[:, None] + cum[rho]
        acc = acc + full[rho]
    closure = float(np.abs(acc - base).max()) if base.size else 0.0
    return F, closure


_resample_cache: dict = {}


def _resample_matrix(n: int, m: int) -> np.ndarray:
    """Barycentric interpolation from the n+1 Chebyshev points onto m
    equispaced angles of the circle (x = 1 - 2j/m).  The values live on a
    circle trace, whose angle phi is the Chebyshev variable folded by
    cos, so equispaced angles are equispaced points in x."""
    key = (n, m)
    hit = _resample_cache.get(key)
    if hit is not None:
        return hit
    from .quadrature import chebyshev_points

    xs = chebyshev_points(n)
    wts = np.where(np.arange(n + 1) % 2 == 0, 1.0, -1.0)
    wts[0] *= 0.5
    wts[-1] *= 0.5
    xe = 1.0 - 2.0 * np.arange(m) / m
    diff = xe[:, None] - xs[None, :]
    exact = np.abs(diff) < 1e-14
    diff[exact] = 1.0
    P = wts[None, :] / diff
    P /= P.sum(axis=1)[:, None]
    hit_rows = exact.any(axis=1)
    P[hit_rows] = 0.0
    P[exact] = 1.0
    _resample_cache[key] = P
    return P


def _cauchy_jets(F, t_p, circ, r, inward):
    """F and its first three derivatives at t_p from values on the r-turn
    lifted circle.

    The kernel 1/(t' - t_p) carries high circular harmonics when t_p sits
    close to the contour, and the Chebyshev angle grid resolves those
    poorly; so the stored values are first interpolated onto equispaced
    angles, where the trapezoid sum has full Fourier resolution.  F itself
    is analytic well past the contour and loses nothing in the resample."""
    m_eq = 2 * circ.n
    P = _resample_matrix(circ.n, m_eq)
    Feq = F @ P.T                                    # (r, g, m_eq)
    alpha = (
        circ.theta0
        + _TWO_PI * np.arange(r)[:, None, None]
        + _TWO_PI * np.arange(m_eq)[None, None, :] / m_eq
    )
    if inward:
        tprime = circ.radius ** (1.0 / r) * np.exp(1j * alpha / r)
        dtda = (1j / r) * tprime
        wind = 1.0
    else:
        tprime = circ.radius ** (-1.0 / r) * np.exp(-1j * alpha / r)
        dtda = (-1j / r) * tprime
        wind = -1.0
    out = []
    for order in range(4):
        integrand = Feq * dtda / (tprime - t_p) ** (order + 1)
        total = integrand.sum(axis=(0, 2)) * (_TWO_PI / m_eq)
        out.append(math.factorial(order) * wind * total / (2j * np.pi))
    return out


# ---------------------------------------------------------------------------
# the three regimes
# ---------------------------------------------------------------------------


def abel_general(surface: SurfaceData, point: SurfacePoint) -> AbelResult:
    """Abel map away from the problem circles: tree path, partial circle,
    straight line; the jet is differentiated along the final line."""
    if point.x is None:
        raise RegionMismatch("point over infinity is not in the general regime")
    x = complex(point.x)
    mon, config = surface.monodromy, surface.config
    sys = mon.contours
    dists = np.abs(x - sys.centers)
    i0 = int(np.argmin(dists))
    if dists[i0] < near_radius(surface) * (1.0 - _REGIME_TOL):
        raise RegionMismatch(
            f"x = {x:.6g} lies inside the circle around {sys.centers[i0]:.6g}"
        )
    tables = _abel_tables(surface)
    fiber = _canonical_fiber(surface.curve, x)
    s_req = _sheet_index(point, len(fiber))
    y_p = fiber[s_req]

    circ = mon.circles[i0]
    node_d = np.abs(circ.z_nodes - x)
    k = int(np.argmin(node_d))
    if node_d[k] < 1e-12 * (1.0 + abs(x)):
        # a zero-length line cannot be traced or differentiated along
        k = int(np.argsort(node_d)[1])
    rho, line, lrows = _branch_row(
        surface.curve, circ.Y[:, k], circ.z_nodes[k], x, y_p,
        config.line_modes, "line from the circle",
    )
    sheet_of_row = invert(mon.circle_rows[i0])
    s0 = int(sheet_of_row[rho])

    vals = _nu_trace(tables.nu_basis, line.z_nodes, line.Y)
    omega = (
        tables.connectors[s0]
        + tables.path[i0][s0]
        + tables.cum[i0][rho, :, k]
        + line.integrate_dz(vals)[lrows[rho]]
    )

    # jet in x - x_P from the Chebyshev values along the arrival line
    row = vals[lrows[rho]]
    D = chebyshev_diff_matrix(line.n)
    scale = 2.0 / (line.z1 - line.z2)
    d1 = row @ D.T * scale
    d2 = d1 @ D.T * scale
    u = eval_differentials(tables.nu_basis, x, y_p).ravel()
    p, q = reduce_to_fundamental(omega, surface.riemann)
    return AbelResult(
        omega=omega, p=p, q=q,
        u=u, v=d1[:, -1], w=d2[:, -1],
        regime="general",
    )


def _circle_regime_jets(surface, tables, circ, cum, full, base_path, cyc,
                        sheet_of_row, t_p, inward):
    """Cauchy evaluation on the r-turn lift of a circle; inward selects the
    finite-branch parameter (t^r = x - b) over the far one (t^r = 1/x)."""
    s_first = int(sheet_of_row[cyc[0]])
    base = tables.connectors[s_first] + base_path[s_first]
    F, closure = _lifted_values(cum, full, cyc, base)
    value, u, v, w = _cauchy_jets(F, t_p, circ, len(cyc), inward)
    return value, u, v, w, closure


def abel_near_critical(surface: SurfaceData, point: SurfacePoint) -> AbelResult:
    """Abel map inside a problem circle, through the local parameter of the
    place: values on the lifted circle feed a Cauchy integral, which stays
    accurate where straight-line continuation into the branch point fails."""
    if point.x is None:
        raise RegionMismatch("point over infinity is not near a finite branch point")
    x = complex(point.x)
    mon, config = surface.monodromy, surface.config
    sys = mon.contours
    dists = np.abs(x - sys.centers)
    i0 = int(np.argmin(dists))
    b = complex(sys.centers[i0])
    if dists[i0] > near_radius(surface) * (1.0 + _REGIME_TOL):
        raise RegionMismatch(
            f"x = {x:.6g} lies outside the inner region of every problem circle"
        )
    tables = _abel_tables(surface)
    circ = mon.circles[i0]
    rows = mon.circle_rows[i0]
    sheet_of_row = invert(rows)

    if dists[i0] <= _EXACT_TOL * max(1.0, abs(b)):
        s_req = _sheet_index(point, mon.sheet_count)
        rho_p = int(rows[s_req])
        t_p = 0.0j
    else:
        fiber = _canonical_fiber(surface.curve, x)
        s_req = _sheet_index(point, len(fiber))
        y_p = fiber[s_req]
        node_d = np.abs(circ.z_nodes - x)
        k = int(np.argmin(node_d))
        rho_p, _, _ = _branch_row(
            surface.curve, circ.Y[:, k], circ.z_nodes[k], x, y_p,
            config.line_modes, "descent from the circle",
        )
    for cyc in cycles_of(circ.cycle):
        if rho_p in cyc:
            break
    r = len(cyc)
    if not (dists[i0] <= _EXACT_TOL * max(1.0, abs(b))):
        m = cyc.index(rho_p)
        phi_k = float(circ.phi[k])
        delta = _wrap_angle(float(np.angle(x - b)) - (circ.theta0 + phi_k))
        alpha_p = circ.theta0 + phi_k + _TWO_PI * m + delta
        t_p = dists[i0] ** (1.0 / r) * np.exp(1j * alpha_p / r)

    value, u, v, w, closure = _circle_regime_jets(
        surface, tables, circ, tables.cum[i0], tables.full[i0],
        tables.path[i0], cyc, sheet_of_row, t_p, inward=True,
    )
    p, q = reduce_to_fundamental(value, surface.riemann)
    return AbelResult(
        omega=value, p=p, q=q, u=u, v=v, w=w,
        regime="near_critical", param=complex(t_p), closure=closure,
    )


def abel_near_infinity(surface: SurfaceData, point: SurfacePoint) -> AbelResult:
    """Abel map beyond the far threshold, through the parameter t with
    t^r = 1/x at the place over infinity."""
    mon, config = surface.monodromy, surface.config
    far = _far_tables(surface)
    big = far.big
    sheet_of_row = invert(far.rows)

    if point.x is None:
        s_req = _sheet_index(point, mon.sheet_count)
        rho_p = int(far.rows[s_req])
        t_p = 0.0j
    else:
        x = complex(point.x)
        if abs(x) < far_threshold(surface) * (1.0 - _REGIME_TOL):
            raise RegionMismatch(
                f"|x| = {abs(x):.6g} lies inside the far region threshold"
            )
        fiber = _canonical_fiber(surface.curve, x)
        s_req = _sheet_index(point, len(fiber))
        y_p = fiber[s_req]
        node_d = np.abs(big.z_nodes - x)
        k = int(np.argmin(node_d))
        rho_p, _, _ = _branch_row(
            surface.curve, big.Y[:, k], big.z_nodes[k], x, y_p,
            config.line_modes, "ray beyond the far circle",
        )
    for cyc in cycles_of(big.cycle):
        if rho_p in cyc:
            break
    r = len(cyc)
    if point.x is not None:
        m = cyc.index(rho_p)
        phi_k = float(big.phi[k])
        delta = _wrap_angle(float(np.angle(x)) - (big.theta0 + phi_k))
        alpha_p = big.theta0 + phi_k + _TWO_PI * m + delta
        t_p = abs(x) ** (-1.0 / r) * np.exp(-1j * alpha_p / r)

    tables = _abel_tables(surface)
    value, u, v, w, closure = _circle_regime_jets(
        surface, tables, big, far.cum, far.full,
        far.path, cyc, sheet_of_row, t_p, inward=False,
    )
    p, q = reduce_to_fundamental(value, surface.riemann)
    return AbelResult(
        omega=value, p=p, q=q, u=u, v=v, w=w,
        regime="near_infinity", param=complex(t_p), closure=closure,
    )


def abel_map(surface: SurfaceData, point: SurfacePoint) -> AbelResult:
    """Abel map with automatic regime selection."""
    if point.x is None:
        return abel_near_infinity(surface, point)
    x = complex(point.x)
    sys = surface.monodromy.contours
    if np.abs(x - sys.centers).min() <= near_radius(surface) * (1.0 + _REGIME_TOL):
        return abel_near_critical(surface, point)
    if abs(x) >= far_threshold(surface) * (1.0 - _REGIME_TOL):
        return abel_near_infinity(surface, point)
    return abel_general(surface, point)


def divisor_sum(surface: SurfaceData, items) -> DivisorSum:
    """Weighted Abel sum over (weight, point) pairs, each point reduced to
    the fundamental cell first, then the total reduced again."""
    g = surface.genus
    total = np.zeros(g, dtype=complex)
    for weight, point in items:
        res = abel_map(surface, point)
        total += weight * (surface.riemann @ res.p + res.q)
    p, q = reduce_to_fundamental(total, surface.riemann)
    return DivisorSum(omega=total, p=p, q=q)


__all__ = [
    "AbelResult",
    "DivisorSum",
    "SurfacePoint",
    "abel_general",
    "abel_map",
    "abel_near_critical",
    "abel_near_infinity",
    "divisor_sum",
    "far_threshold",
    "near_radius",
    "reduce_to_fundamental",
    "surface_point",
]
