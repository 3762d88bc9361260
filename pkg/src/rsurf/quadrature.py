"""Chebyshev collocation, Clenshaw-Curtis quadrature, analytic continuation.

Everything downstream samples functions at Chebyshev points x_k = cos(k pi/n)
and integrates with Clenshaw-Curtis weights; root curves y(x) along contour
pieces are continued fibre by fibre and stored for reuse by the period,
Puiseux and Abel-map stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as ncheb
from scipy.fft import dct
from scipy.optimize import linear_sum_assignment

from .curves import BivariateCurve, trim_trailing
from .errors import AmbiguousContinuation

# ---------------------------------------------------------------------------
# Chebyshev basics
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def chebyshev_points(n: int) -> np.ndarray:
    """Extrema grid cos(k pi / n), k = 0..n, descending from 1 to -1."""
    return np.cos(np.pi * np.arange(n + 1) / n)


@lru_cache(maxsize=64)
def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Weights w with sum_k w_k p(x_k) = int_{-1}^{1} p dx exactly for deg <= n."""
    if n == 0:
        return np.array([2.0])
    if n == 1:
        return np.array([1.0, 1.0])
    odd = np.arange(1, n, 2)
    l = len(odd)
    m = n - l
    v0 = np.concatenate([2.0 / (odd * (odd - 2.0)), [1.0 / odd[-1]], np.zeros(m)])
    v2 = -v0[:-1] - v0[-1:0:-1]
    g0 = -np.ones(n)
    g0[l] += n
    g0[m] += n
    g = g0 / (n**2 - 1 + (n % 2))
    w = np.fft.ifft(v2 + g).real
    return np.concatenate([w, w[:1]])


def chebyshev_coefficients(values: np.ndarray) -> np.ndarray:
    """Chebyshev series coefficients from values at chebyshev_points(n).

    Operates along the last axis; inverse of evaluating the series at the
    extrema grid.
    """
    v = np.asarray(values)
    n = v.shape[-1] - 1
    if n == 0:
        return v.copy()
    if np.iscomplexobj(v):
        t = dct(v.real, type=1, axis=-1) + 1j * dct(v.imag, type=1, axis=-1)
    else:
        t = dct(v, type=1, axis=-1)
    a = t / n
    a[..., 0] *= 0.5
    a[..., -1] *= 0.5
    return a


def chebyshev_cumulative(values: np.ndarray) -> np.ndarray:
    """Signed cumulative integral int_{1}^{x_k} v dx at every node, last axis."""
    v = np.asarray(values)
    a = chebyshev_coefficients(v)
    n = v.shape[-1] - 1
    x = chebyshev_points(n)
    if v.ndim == 1:
        A = ncheb.chebint(a)
        I = ncheb.chebval(x, A)
        return I - I[0]
    flat = a.reshape(-1, a.shape[-1])
    Aflat = ncheb.chebint(flat, axis=-1)
    out = np.empty((flat.shape[0], len(x)), dtype=np.result_type(v, 1.0j))
    for i in range(flat.shape[0]):
        vi = ncheb.chebval(x, Aflat[i])
        out[i] = vi - vi[0]
    return out.reshape(v.shape)


@lru_cache(maxsize=32)
def chebyshev_diff_matrix(n: int) -> np.ndarray:
    """Spectral differentiation matrix on the extrema grid."""
    if n == 0:
        return np.zeros((1, 1))
    x = chebyshev_points(n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D = D - np.diag(D.sum(axis=1))
    return D


# ---------------------------------------------------------------------------
# fibre solving and matching
# ---------------------------------------------------------------------------


def solve_fiber(curve: BivariateCurve, x: complex) -> np.ndarray:
    """All finite roots of f(x, .) at the given x."""
    c = trim_trailing(curve.fiber_polynomial(x))
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def canonical_order(values: np.ndarray) -> np.ndarray:
    """Deterministic index order: ascending real part, then imaginary part."""
    return np.lexsort((values.imag, values.real))


def match_columns(prev: np.ndarray, new: np.ndarray, context: str = "") -> np.ndarray:
    """Permutation sigma with new[sigma[i]] the continuation of prev[i].

    Requires the match to be unambiguous: every matched distance must stay
    below half the minimal separation of the new fibre.
    """
    n = len(prev)
    if len(new) != n:
        raise AmbiguousContinuation(
            f"fibre changed size from {n} to {len(new)} {context}".strip()
        )
    if n == 1:
        return np.array([0])
    dist = np.abs(prev[:, None] - new[None, :])
    sigma = np.argmin(dist, axis=1)
    if len(set(sigma.tolist())) != n:
        _, sigma = linear_sum_assignment(dist)
    sep = np.abs(new[:, None] - new[None, :])
    np.fill_diagonal(sep, np.inf)
    min_sep = sep.min()
    matched = dist[np.arange(n), sigma]
    if matched.max() > 0.5 * min_sep:
        raise AmbiguousContinuation(
            f"root matching ambiguous (moved {matched.max():.3e}, separation {min_sep:.3e}) {context}".strip()
        )
    return sigma


def _continue_row(
    curve: BivariateCurve,
    z_nodes: np.ndarray,
    start: np.ndarray,
    adaptive: bool,
    depth: int = 6,
) -> np.ndarray:
    """Track the full fibre along the nodes; rows follow the start order."""
    n_sheets = len(start)
    Y = np.empty((n_sheets, len(z_nodes)), dtype=complex)
    Y[:, 0] = start
    prev = start
    for k in range(1, len(z_nodes)):
        new = solve_fiber(curve, z_nodes[k])
        try:
            sigma = match_columns(prev, new, context=f"at node {k}")
        except AmbiguousContinuation:
            if not adaptive or depth <= 0:
                raise
            # bisect the step until the matching is clean
            mid = 0.5 * (z_nodes[k - 1] + z_nodes[k])
            bridge = _continue_row(
                curve, np.array([z_nodes[k - 1], mid, z_nodes[k]]), prev, adaptive, depth - 1
            )
            Y[:, k] = bridge[:, -1]
            prev = bridge[:, -1]
            continue
        Y[:, k] = new[sigma]
        prev = Y[:, k]
    return Y


# ---------------------------------------------------------------------------
# contour piece traces
# ---------------------------------------------------------------------------


@dataclass
class LineTrace:
    """Fibre continuation along a straight segment, Chebyshev sampled.

    Rows of Y are ordered canonically (lexicographic at the z1 end).
    """

    z1: complex
    z2: complex
    z_nodes: np.ndarray
    Y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.z_nodes) - 1

    def integrate_dz(self, values: np.ndarray) -> np.ndarray:
        """Integral over the segment of per-sheet samples, measure dz."""
        w = clenshaw_curtis_weights(self.n)
        return 0.5 * (self.z2 - self.z1) * (values @ w)

    def cumulative_dz(self, values: np.ndarray) -> np.ndarray:
        """Integral from z1 to every node; z(x) = mid + (z1 - z2)/2 * x."""
        return 0.5 * (self.z1 - self.z2) * chebyshev_cumulative(values)


@dataclass
class CircleTrace:
    """CCW fibre continuation along a circular arc starting at angle theta0.

    phi_k = (1 - cos(k pi / n)) span / 2 runs 0..span; rows of Y are canonical
    at phi = 0.  For a full circle (span = 2 pi) cycle[s] is the row whose
    start value equals row s's end value; partial arcs carry cycle = None.
    """

    center: complex
    radius: float
    theta0: float
    z_nodes: np.ndarray
    phi: np.ndarray
    Y: np.ndarray
    cycle: np.ndarray | None
    span: float = 2.0 * np.pi

    @property
    def n(self) -> int:
        return len(self.z_nodes) - 1

    def dz_dphi(self) -> np.ndarray:
        return 1j * self.radius * np.exp(1j * (self.theta0 + self.phi))

    def integrate_dphi(self, values: np.ndarray) -> np.ndarray:
        """phi-integral over the whole arc of per-sheet samples."""
        w = clenshaw_curtis_weights(self.n)
        return 0.5 * self.span * (values @ w)

    def cumulative_dphi(self, values: np.ndarray) -> np.ndarray:
        """phi-integral from the entry point to every node."""
        return -0.5 * self.span * chebyshev_cumulative(values)


def trace_line(
    curve: BivariateCurve, z1: complex, z2: complex, n: int, adaptive: bool = False
) -> LineTrace:
    x = chebyshev_points(n)
    z_nodes = 0.5 * (z1 + z2) + 0.5 * (z1 - z2) * x  # z(x=1) = z1
    start = solve_fiber(curve, z_nodes[0])
    start = start[canonical_order(start)]
    Y = _continue_row(curve, z_nodes, start, adaptive)
    return LineTrace(z1=z1, z2=z2, z_nodes=z_nodes, Y=Y)


def trace_circle(
    curve: BivariateCurve,
    center: complex,
    radius: float,
    theta0: float,
    n: int,
    adaptive: bool = False,
    span: float = 2.0 * np.pi,
) -> CircleTrace:
    phi = (1.0 - chebyshev_points(n)) * 0.5 * span
    z_nodes = center + radius * np.exp(1j * (theta0 + phi))
    start = solve_fiber(curve, z_nodes[0])
    start = start[canonical_order(start)]
    Y = _continue_row(curve, z_nodes, start, adaptive)
    full = abs(span - 2.0 * np.pi) < 1e-12
    cycle = match_columns(Y[:, -1], Y[:, 0], context="closing circle") if full else None
    return CircleTrace(
        center=center,
        radius=radius,
        theta0=theta0,
        z_nodes=z_nodes,
        phi=phi,
        Y=Y,
        cycle=cycle,
        span=span,
    )


def frame_permutation(frame: np.ndarray, column: np.ndarray, context: str = "") -> np.ndarray:
    """rho with column[rho[i]] = value tracked as frame[i]; strict matching."""
    return match_columns(frame, column, context=context)
