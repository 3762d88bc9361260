"""Theta functions with characteristics on a Riemann matrix.

Values are truncated lattice sums.  The argument is first reduced modulo the
period lattice through the quasi-periodicity relations, so the summed series
is well scaled and the removed exponential factor travels separately as a
log scale; downstream consumers form ratios of thetas, where the scales
combine exactly and never overflow.  The sum itself runs over the integer
points of an ellipsoid sized so the neglected Gaussian tail stays below a
configured epsilon.  Directional derivatives differentiate the series
termwise, one polynomial insertion factor per direction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NotPositiveDefinite, ResolutionError

_TAIL_SAFETY = 5.0
# metric slack per derivative order: the widened Gaussian margin decays much
# faster than the inserted polynomial factors grow
_DERIV_MARGIN = 0.35
_MAX_LATTICE = 5_000_000


# ---------------------------------------------------------------------------
# characteristics
# ---------------------------------------------------------------------------


@dataclass
class ThetaCharacteristic:
    """Real shift pair [p, q] attached to the lattice sum."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if self.p.shape != self.q.shape:
            raise ValueError("characteristic halves differ in length")

    @classmethod
    def zero(cls, genus):
        return cls(np.zeros(genus), np.zeros(genus))

    @property
    def genus(self):
        return self.p.size

    def is_half_integer(self, tol=1e-10):
        """True when 2p and 2q are integer vectors to within tol."""
        two = np.concatenate([2.0 * self.p, 2.0 * self.q])
        return bool(np.all(np.abs(two - np.round(two)) <= tol))

    def parity(self):
        """0 for even, 1 for odd; defined for half-integer characteristics.

        Odd means the theta function is an odd function of z, which happens
        exactly when 4<p, q> is an odd integer.
        """
        if not self.is_half_integer():
            raise ValueError("parity is defined for half-integer characteristics")
        return int(round(4.0 * float(self.p @ self.q))) % 2


def half_integer_characteristics(genus):
    """All 4^g characteristics with entries in {0, 1/2}, fixed order.

    The q half varies fastest; within each half the last coordinate varies
    fastest.  The order is part of the contract: characteristic searches
    must be reproducible run to run.
    """
    grid = [np.array(bits, dtype=float) / 2.0
            for bits in itertools.product((0, 1), repeat=genus)]
    for p in grid:
        for q in grid:
            yield ThetaCharacteristic(p.copy(), q.copy())


def odd_characteristics(genus):
    """The odd half-integer characteristics, in enumeration order."""
    return [c for c in half_integer_characteristics(genus) if c.parity() == 1]


# ---------------------------------------------------------------------------
# argument reduction
# ---------------------------------------------------------------------------


@dataclass
class ThetaArgument:
    """Reduced theta argument plus the removed quasi-periodicity factor.

    z_original = z_reduced + n_shift + riemann @ m_shift, and
    theta(z_original) = exp(exp_factor) * theta(z_reduced).
    """

    z_reduced: np.ndarray
    n_shift: np.ndarray
    m_shift: np.ndarray
    exp_factor: complex
    p_box: np.ndarray = field(repr=False, default=None)
    q_box: np.ndarray = field(repr=False, default=None)


def _half_open_shift(x):
    # integer n with x - n in (-1/2, 1/2]
    return np.ceil(np.asarray(x, dtype=float) - 0.5).astype(np.int64)


def reduce_argument(z, riemann, char=None):
    """Split z into a lattice vector and a remainder in the unit box.

    Writes z = z_hat + N + B M with integer N, M and z_hat = B p + q where
    every p_i, q_i lies in (-1/2, 1/2].  The exponential factor relating
    theta at z to theta at z_hat is returned as a log scale; it depends on
    the characteristic only through a phase.
    """
    riemann = np.atleast_2d(np.asarray(riemann, dtype=complex))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = z.size
    if g == 0:
        return ThetaArgument(z, np.zeros(0, np.int64), np.zeros(0, np.int64),
                             0.0, np.zeros(0), np.zeros(0))
    imb = riemann.imag
    p_full = np.linalg.solve(imb, z.imag)
    m_shift = _half_open_shift(p_full)
    p_box = p_full - m_shift
    q_full = z.real - riemann.real @ p_full
    n_shift = _half_open_shift(q_full)
    q_box = q_full - n_shift
    z_hat = riemann @ p_box + q_box
    pc = np.zeros(g) if char is None else char.p
    qc = np.zeros(g) if char is None else char.q
    factor = (2j * np.pi * float(pc @ n_shift)
              - 1j * np.pi * complex(m_shift @ riemann @ m_shift)
              - 2j * np.pi * complex((z_hat + qc) @ m_shift))
    return ThetaArgument(z_hat, n_shift, m_shift, factor, p_box, q_box)


# ---------------------------------------------------------------------------
# truncated lattice sum
# ---------------------------------------------------------------------------


@dataclass
class ThetaValue:
    """Lattice-sum mantissa with its quasi-periodicity log scale."""

    mantissa: complex
    log_scale: complex

    @property
    def value(self):
        return self.mantissa * np.exp(self.log_scale)

    def __complex__(self):
        return complex(self.value)


def _imag_cholesky(riemann):
    imb = riemann.imag
    imb = 0.5 * (imb + imb.T)
    try:
        np.linalg.cholesky(imb)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "imaginary part of the Riemann matrix is not positive definite")
    return imb


def _lattice_points(imb, center, radius, pad):
    """Integer points with <Im B (n - c), n - c> <= radius^2.

    The bounding box comes from the diagonal of the inverse metric; a
    positive pad widens the box and skips the ellipsoid cut, which is the
    knob the truncation self-consistency check turns.
    """
    g = imb.shape[0]
    inv_diag = np.diag(np.linalg.inv(imb))
    half = radius * np.sqrt(np.maximum(inv_diag, 0.0))
    lows = np.floor(center - half).astype(np.int64) - pad
    highs = np.ceil(center + half).astype(np.int64) + pad
    counts = highs - lows + 1
    total = int(np.prod(counts.astype(float)))
    if total > _MAX_LATTICE:
        raise ResolutionError(
            f"theta truncation needs {total} lattice points; the genus or "
            "the Riemann matrix conditioning is beyond dense enumeration")
    axes = [np.arange(lo, hi + 1) for lo, hi in zip(lows, highs)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
    if pad == 0:
        d = pts - center
        keep = np.einsum("ij,jk,ik->i", d, imb, d) <= radius * radius + 1e-12
        pts = pts[keep]
    return pts


def theta_with_derivs(z, riemann, requests, char=None, epsilon=1e-16, pad=0):
    """Evaluate theta and directional derivatives at one argument.

    requests is a sequence whose entries are tuples of direction vectors;
    the empty tuple asks for the plain value, (U,) for the derivative along
    U, (U, V) for the mixed second derivative, and so on.  All requests
    share one set of lattice terms.  Returns a list of ThetaValue carrying
    a common log scale.
    """
    riemann = np.atleast_2d(np.asarray(riemann, dtype=complex))
    riemann = 0.5 * (riemann + riemann.T)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = z.size
    if g == 0:
        return [ThetaValue(1.0 + 0.0j if not req else 0.0j, 0.0)
                for req in requests]
    imb = _imag_cholesky(riemann)
    arg = reduce_argument(z, riemann, char)
    pc = np.zeros(g) if char is None else char.p
    qc = np.zeros(g) if char is None else char.q
    order = max((len(req) for req in requests), default=0)
    radius = np.sqrt((np.log(1.0 / epsilon) + _TAIL_SAFETY) / np.pi)
    radius += _DERIV_MARGIN * order
    center = -(pc + arg.p_box)
    pts = _lattice_points(imb, center, radius, pad)
    w = pts + pc
    quad = np.einsum("ij,jk,ik->i", w, riemann, w)
    lin = w @ (arg.z_reduced + qc)
    terms = np.exp(1j * np.pi * quad + 2j * np.pi * lin)
    # insertion factors differentiate the original argument, so the lattice
    # index must be shifted back by the removed period
    w_orig = w - arg.m_shift
    out = []
    for req in requests:
        fac = np.ones(len(pts), dtype=complex)
        for direction in req:
            u = np.atleast_1d(np.asarray(direction, dtype=complex))
            fac = fac * (2j * np.pi * (w_orig @ u))
        out.append(ThetaValue(complex(np.sum(fac * terms)), arg.exp_factor))
    return out


def theta(z, riemann, char=None, epsilon=1e-16, pad=0):
    """Theta value at z as a (mantissa, log scale) pair."""
    return theta_with_derivs(z, riemann, [()], char, epsilon, pad)[0]


def theta_deriv(z, riemann, directions, char=None, epsilon=1e-16):
    """Directional derivative of theta, scale folded back in.

    directions lists one g-vector per derivative order, mixed orders
    allowed; termwise differentiation keeps the truncation rule valid with
    a widened radius.  Orders beyond six are refused: the insertion
    polynomials would outgrow the widened Gaussian margin.
    """
    directions = list(directions)
    if len(directions) > 6:
        raise ValueError("directional derivatives supported up to order 6")
    val = theta_with_derivs(z, riemann, [tuple(directions)], char, epsilon)[0]
    return complex(val.value)


# ---------------------------------------------------------------------------
# optional lattice preconditioning
# ---------------------------------------------------------------------------


def _lll_reduce(basis, delta=0.75):
    """Textbook LLL on the columns of a real matrix.

    Returns the integer transform t with reduced basis = basis @ t.  Sizes
    here are the genus, so the repeated QR factorizations cost nothing.
    """
    b = np.array(basis, dtype=float)
    n = b.shape[1]
    t = np.eye(n, dtype=np.int64)

    def gram(bmat):
        r = np.linalg.qr(bmat, mode="r")
        # qr may flip signs; only ratios and squares are used below
        return r

    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 10000:
            raise ResolutionError("lattice reduction failed to terminate")
        r = gram(b)
        for j in range(k - 1, -1, -1):
            mu = r[j, k] / r[j, j]
            m = int(round(mu))
            if m != 0:
                b[:, k] -= m * b[:, j]
                t[:, k] -= m * t[:, j]
                r = gram(b)
        r = gram(b)
        mu = r[k - 1, k] / r[k - 1, k - 1]
        if r[k, k] ** 2 >= (delta - mu * mu) * r[k - 1, k - 1] ** 2:
            k += 1
        else:
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            t[:, [k - 1, k]] = t[:, [k, k - 1]]
            k = max(k - 1, 1)
    return t


def lll_symplectic_frame(riemann):
    """Change of homology frame making the theta series better conditioned.

    Lattice-reduces the imaginary part and conjugates the Riemann matrix by
    the resulting unimodular u, so the new matrix is u B u^T.  On the period
    lattice this is the block symplectic map diag(u, u^{-T}); theta values
    transform without any prefactor, theta(u z, u B u^T) = theta(z, B),
    which is what the invariance test asserts.  Off by default everywhere:
    downstream values are always produced in one fixed frame.
    """
    riemann = np.atleast_2d(np.asarray(riemann, dtype=complex))
    imb = _imag_cholesky(riemann)
    basis = np.linalg.cholesky(imb).T
    t = _lll_reduce(basis)
    u = t.T
    reduced = u @ riemann @ u.T
    reduced = 0.5 * (reduced + reduced.T)
    return reduced, u


__all__ = [
    "ThetaArgument",
    "ThetaCharacteristic",
    "ThetaValue",
    "half_integer_characteristics",
    "lll_symplectic_frame",
    "odd_characteristics",
    "reduce_argument",
    "theta",
    "theta_deriv",
    "theta_with_derivs",
]
