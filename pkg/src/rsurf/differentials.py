"""Holomorphic 1-forms built from adjoint polynomials.

Every holomorphic differential on the desingularized curve is P(x,y)/f_y dx
with deg P <= d-3.  At each singular place the pullback to the local
parameter t must stay finite, and by the residue theorem each violated order
shows up as a non-vanishing Cauchy integral of t^k P/f_y dx over the small
contour, which is linear in the coefficients of P: one condition row per
(place, k).  Rows are harvested from the circle traces already computed for
the monodromy, deduplicated by incremental rank, and the null space of the
stacked system is the coefficient basis.  The genus this produces is
cross-checked against Riemann-Hurwitz from the monodromy cycle types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .config import Config
from .critical import CriticalData
from .curves import BivariateCurve
from .errors import (
    ConsistencyError,
    GenusMismatch,
    NearCriticalEvaluation,
    ResolutionError,
)
from .monodromy import MonodromyData, cycles_of
from .puiseux import far_circle_frame, laurent_window

_TWO_PI = 2.0 * np.pi


def candidate_monomials(degree: int) -> list[tuple[int, int]]:
    """Exponent pairs (i, j) of x^i y^j with i + j <= degree - 3."""
    return [
        (i, j)
        for i in range(max(0, degree - 2))
        for j in range(max(0, degree - 2 - i))
    ]


# ---------------------------------------------------------------------------
# sampled cycles: everything the residue integrals need, no series arithmetic
# ---------------------------------------------------------------------------


@dataclass
class _SampledCycle:
    """One local place: fibre samples along the r turns of a circle cycle."""

    r: int
    radius: float
    theta0: float
    phi: np.ndarray
    x: np.ndarray          # (npts,) base samples, shared by the turns
    y: np.ndarray          # (r, npts)
    dxdt: np.ndarray       # (r, npts) on the anchored branch of the parameter
    at_infinity: bool

    def window(self, values: np.ndarray, orders: np.ndarray) -> np.ndarray:
        """Coefficients of t^n for n in orders of the sampled function."""
        orders = np.asarray(orders, dtype=int)
        if self.at_infinity:
            return laurent_window(
                values, self.phi, self.theta0, self.radius, self.r, -orders
            )
        return laurent_window(
            values, self.phi, self.theta0, self.radius, self.r, orders
        )

    def mode_magnitude(self, coeffs: np.ndarray, orders: np.ndarray) -> np.ndarray:
        """Coefficient sizes rescaled to sample units, comparable to max|values|."""
        ns = np.asarray(orders, dtype=float)
        if self.at_infinity:
            return np.abs(coeffs) * self.radius ** (-ns / self.r)
        return np.abs(coeffs) * self.radius ** (ns / self.r)


def _finite_cycles(mon: MonodromyData, node: int) -> list[_SampledCycle]:
    circ = mon.circles[node]
    out = []
    for cyc in cycles_of(circ.cycle):
        r = len(cyc)
        arg = (circ.theta0 + circ.phi)[None, :] + _TWO_PI * np.arange(r)[:, None]
        t = circ.radius ** (1.0 / r) * np.exp(1j * arg / r)
        out.append(
            _SampledCycle(
                r=r,
                radius=circ.radius,
                theta0=circ.theta0,
                phi=circ.phi,
                x=circ.z_nodes,
                y=circ.Y[cyc],
                dxdt=r * t ** (r - 1),
                at_infinity=False,
            )
        )
    return out


def _infinity_cycles(curve: BivariateCurve, mon: MonodromyData, config: Config) -> list[_SampledCycle]:
    big, _, _ = far_circle_frame(curve, mon, config)
    out = []
    for cyc in cycles_of(big.cycle):
        r = len(cyc)
        arg = (big.theta0 + big.phi)[None, :] + _TWO_PI * np.arange(r)[:, None]
        t = big.radius ** (-1.0 / r) * np.exp(-1j * arg / r)
        out.append(
            _SampledCycle(
                r=r,
                radius=big.radius,
                theta0=big.theta0,
                phi=big.phi,
                x=big.z_nodes,
                y=big.Y[cyc],
                dxdt=-r * t ** (-(r + 1)),
                at_infinity=True,
            )
        )
    return out


def _lowest_order(cyc: _SampledCycle, values: np.ndarray, lo: int, hi: int, rel: float) -> int | None:
    """Smallest order in [lo, hi] whose coefficient rises above rel*max|values|."""
    orders = np.arange(lo, hi + 1)
    mags = cyc.mode_magnitude(cyc.window(values, orders), orders)
    amp = float(np.abs(values).max())
    hits = np.nonzero(mags > rel * amp)[0]
    if len(hits) == 0:
        return None
    return int(orders[hits[0]])


# ---------------------------------------------------------------------------
# the condition system
# ---------------------------------------------------------------------------


@dataclass
class AdjunctionSystem:
    """Stacked independent holomorphicity conditions H c = 0."""

    monomials: list[tuple[int, int]]
    H: np.ndarray
    delta_by_point: dict[tuple[complex, complex, complex], int]
    degree: int

    @property
    def rank(self) -> int:
        return 0 if self.H.size == 0 else self.H.shape[0]

    @property
    def genus(self) -> int:
        return len(self.monomials) - self.rank

    def delta_at(self, point: tuple, tol: float = 1e-6) -> int:
        target = _normalize_point(point)
        for key, val in self.delta_by_point.items():
            if _projective_distance(key, target) < tol:
                return val
        raise KeyError(f"no singular place near {point}")


def _normalize_point(point: tuple) -> tuple[complex, complex, complex]:
    v = np.array(point, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero projective vector")
    v = v / n
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    return (complex(v[0]), complex(v[1]), complex(v[2]))


def _projective_distance(a: tuple, b: tuple) -> float:
    va = np.array(_normalize_point(a))
    vb = np.array(_normalize_point(b))
    return float(min(np.linalg.norm(va - vb), np.linalg.norm(va + vb)))


class _RankAccumulator:
    """Rows kept only when they enlarge the row space, checked orthogonally."""

    def __init__(self, n_cols: int, rel_tol: float):
        self.q = np.zeros((0, n_cols), dtype=complex)
        self.rows: list[np.ndarray] = []
        self.rel_tol = rel_tol
        self.scale = 0.0

    def offer(self, row: np.ndarray) -> bool:
        norm = float(np.linalg.norm(row))
        self.scale = max(self.scale, norm)
        resid = row.copy()
        # two projection passes keep the basis orthonormal to roundoff
        for _ in range(2 if len(self.q) else 0):
            resid = resid - self.q.T.dot(self.q.conj().dot(resid))
        rnorm = float(np.linalg.norm(resid))
        if rnorm <= self.rel_tol * self.scale:
            return False
        self.q = np.vstack([self.q, resid / rnorm])
        self.rows.append(row / norm)
        return True


def _condition_rows(
    cyc: _SampledCycle,
    curve: BivariateCurve,
    fy: BivariateCurve,
    monomials: list[tuple[int, int]],
    config: Config,
) -> tuple[np.ndarray, np.ndarray] | None:
    """Residue condition rows of one place with per-row size bounds, None when regular."""
    fy_vals = fy(cyc.x[None, :], cyc.y)
    d = curve.total_degree
    if not cyc.at_infinity:
        cap = min(400, 4 * cyc.r * max(d, 2))
        n_f = _lowest_order(cyc, fy_vals, 0, cap, config.residue_zero_band)
        if n_f is None:
            raise ResolutionError(
                "f_y expansion sits entirely below the significance band"
            )
        if n_f == 0:
            return None
        depth = n_f
    else:
        # y may grow like x^deg or stay bounded; bound the integrand depth
        # from the measured leading order of y on this cycle
        l_y = _lowest_order(
            cyc, cyc.y, -cyc.r * curve.deg_x, cyc.r * curve.deg_x, config.residue_zero_band
        )
        if l_y is None:
            l_y = 0
        growth = max(cyc.r, -l_y)
        depth = growth * max(0, d - 3) + cyc.r + 1
    base = cyc.dxdt / fy_vals
    orders = -np.arange(1, depth + 1)
    rows = np.zeros((depth, len(monomials)), dtype=complex)
    amp = 0.0
    for m, (i, j) in enumerate(monomials):
        vals = cyc.x[None, :] ** i * cyc.y**j * base
        amp = max(amp, float(np.abs(vals).max()))
        rows[:, m] = cyc.window(vals, orders)
    # contour bound per row: |coeff at t^q| <= amp * |t|^(-q) on the circle
    t_abs = cyc.radius ** ((-1.0 if cyc.at_infinity else 1.0) / cyc.r)
    ref = amp * t_abs ** np.arange(1, depth + 1)
    return rows, ref


def _cycle_center(cyc: _SampledCycle) -> complex:
    return complex(cyc.window(cyc.y, np.array([0]))[0])


def _infinite_point_of(cyc: _SampledCycle, curve: BivariateCurve, config: Config) -> tuple:
    """Projective point (X : Y : 0) this far cycle tends to."""
    lo = -cyc.r * curve.deg_x
    orders = np.arange(lo, 1)
    coeffs = cyc.window(cyc.y, orders)
    mags = cyc.mode_magnitude(coeffs, orders)
    amp = float(np.abs(cyc.y).max())
    hits = np.nonzero(mags > config.residue_zero_band * amp)[0]
    l_y = int(orders[hits[0]]) if len(hits) else 0
    if l_y < -cyc.r:
        return (0.0 + 0.0j, 1.0 + 0.0j, 0.0 + 0.0j)
    if l_y == -cyc.r:
        lam = complex(coeffs[hits[0]])
        return (1.0 + 0.0j, lam, 0.0 + 0.0j)
    return (1.0 + 0.0j, 0.0 + 0.0j, 0.0 + 0.0j)


def adjunction_conditions(
    curve: BivariateCurve,
    crit: CriticalData,
    mon: MonodromyData,
    config: Config,
) -> AdjunctionSystem:
    """Harvest and deduplicate all holomorphicity conditions of the curve."""
    d = curve.total_degree
    monomials = candidate_monomials(d)
    fy = curve.deriv(dy=1)
    acc = _RankAccumulator(len(monomials), config.rank_tol)
    delta: dict[tuple, int] = {}

    singular_nodes: list[tuple[int, list[tuple[complex, complex]]]] = []
    for v in range(len(mon.contours.centers)):
        xc = mon.contours.centers[v]
        here = [p for p in crit.singular_affine if abs(p[0] - xc) <= config.cluster_tol * 10]
        if here:
            singular_nodes.append((v, here))

    for v, pairs in singular_nodes:
        for cyc in _finite_cycles(mon, v):
            yc = _cycle_center(cyc)
            matches = [p for p in pairs if abs(p[1] - yc) <= 1e-5 * max(1.0, abs(yc))]
            if not matches:
                # branch or plain cycle through a non-singular fibre point;
                # any apparent residue there is quadrature noise
                continue
            harvest = _condition_rows(cyc, curve, fy, monomials, config)
            if harvest is None:
                continue
            point = _normalize_point((*matches[0], 1.0))
            gained = _classify_and_rank(*harvest, acc, config)
            delta[point] = delta.get(point, 0) + gained

    if crit.singular_infinite:
        matched = 0
        for cyc in _infinity_cycles(curve, mon, config):
            point = _normalize_point(_infinite_point_of(cyc, curve, config))
            near = [
                q for q in crit.singular_infinite if _projective_distance(q, point) < 1e-6
            ]
            if not near:
                # the cycle tends to a smooth point at infinity, which imposes
                # no condition; its rows would be pure quadrature noise
                continue
            matched += 1
            rows, ref = _condition_rows(cyc, curve, fy, monomials, config)
            gained = _classify_and_rank(rows, ref, acc, config)
            key = _normalize_point(near[0])
            delta[key] = delta.get(key, 0) + gained
        if matched == 0:
            raise ConsistencyError(
                "singular points at infinity detected but no far cycle matched them"
            )

    H = np.array(acc.rows) if acc.rows else np.zeros((0, len(monomials)), dtype=complex)
    return AdjunctionSystem(monomials=monomials, H=H, delta_by_point=delta, degree=d)


def _classify_and_rank(
    rows: np.ndarray, ref: np.ndarray, acc: _RankAccumulator, config: Config
) -> int:
    """Feed one place's rows through the significance bands and the rank test."""
    norms = np.linalg.norm(rows, axis=1)
    scale = float(norms.max()) if len(norms) else 0.0
    if scale == 0.0:
        return 0
    gained = 0
    for k in range(rows.shape[0]):
        rel = norms[k] / scale
        if rel <= config.residue_zero_band or norms[k] <= config.residue_zero_band * ref[k]:
            continue
        if rel < config.residue_sig_band:
            raise ResolutionError(
                f"residue row at relative size {rel:.2e} sits in the ambiguous "
                f"band [{config.residue_zero_band:.0e}, {config.residue_sig_band:.0e}); "
                "increase the mode count"
            )
        if acc.offer(rows[k]):
            gained += 1
    return gained


# ---------------------------------------------------------------------------
# basis of the null space
# ---------------------------------------------------------------------------


@dataclass
class DifferentialBasis:
    """Orthonormal coefficient vectors c^(k) spanning the kernel of H."""

    curve: BivariateCurve
    monomials: list[tuple[int, int]]
    vectors: np.ndarray    # (n_monomials, g), orthonormal columns
    genus: int

    def coefficient_table(self, k: int) -> np.ndarray:
        """(d-2)x(d-2) table c_nm with P_k = sum c_nm x^(d-3-n) y^(d-3-m)."""
        d = self.curve.total_degree
        size = max(1, d - 2)
        out = np.zeros((size, size), dtype=complex)
        for m, (i, j) in enumerate(self.monomials):
            out[d - 3 - i, d - 3 - j] = self.vectors[m, k]
        return out

    def polynomial_values(self, x, y) -> np.ndarray:
        """P_k(x, y) for all k; leading axis is the basis index."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        x, y = np.broadcast_arrays(x, y)
        vals = np.zeros((self.genus,) + x.shape, dtype=complex)
        for m, (i, j) in enumerate(self.monomials):
            term = x**i * y**j
            for k in range(self.genus):
                vals[k] += self.vectors[m, k] * term
        return vals


def differential_basis(curve: BivariateCurve, system: AdjunctionSystem) -> DifferentialBasis:
    n = len(system.monomials)
    if system.rank == 0:
        vecs = np.eye(n, dtype=complex)
    else:
        vecs = null_space(system.H)
    if vecs.shape[1] != system.genus:
        raise GenusMismatch(
            f"null space dimension {vecs.shape[1]} does not match "
            f"{n} - rank {system.rank}"
        )
    return DifferentialBasis(
        curve=curve, monomials=system.monomials, vectors=vecs, genus=system.genus
    )


def eval_differentials(basis: DifferentialBasis, x, y) -> np.ndarray:
    """Integrand values P_k/f_y on curve points; leading axis is k."""
    fy = basis.curve.deriv(dy=1)
    fy_vals = fy(x, y)
    scale = fy.residual_scale(x, y)
    if np.any(np.abs(fy_vals) <= 1e-8 * scale):
        raise NearCriticalEvaluation("f_y vanishes to working precision here")
    return basis.polynomial_values(x, y) / fy_vals


# ---------------------------------------------------------------------------
# genus cross-check
# ---------------------------------------------------------------------------


def riemann_hurwitz_genus(mon: MonodromyData) -> int:
    """Genus from the total branching of the covering map."""
    branching = 0
    for sigma in mon.permutations:
        for cyc in cycles_of(np.asarray(sigma)):
            branching += len(cyc) - 1
    for cyc in cycles_of(np.asarray(mon.sigma_infinity)):
        branching += len(cyc) - 1
    if branching % 2:
        raise GenusMismatch(f"odd total branching number {branching}")
    return branching // 2 - mon.sheet_count + 1


def compute_differentials(
    curve: BivariateCurve,
    crit: CriticalData,
    mon: MonodromyData,
    config: Config,
) -> tuple[AdjunctionSystem, DifferentialBasis]:
    """Conditions, basis, and the hard genus consistency gate."""
    system = adjunction_conditions(curve, crit, mon, config)
    g_rh = riemann_hurwitz_genus(mon)
    if g_rh != system.genus:
        raise GenusMismatch(
            f"adjunction genus {system.genus} (rank {system.rank} of "
            f"{len(system.monomials)}) disagrees with Riemann-Hurwitz {g_rh}"
        )
    return system, differential_basis(curve, system)
