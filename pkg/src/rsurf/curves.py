"""Curve algebra: polynomials, bivariate curves, resultants, Newton refinement.

Coefficient conventions are zero-based ascending everywhere: a univariate
polynomial is a vector c with p(x) = sum c[k] x^k, a bivariate curve is a
matrix a with f(x, y) = sum a[i, j] x^i y^j (row index = power of x).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import CurveInputError

_TRIM_REL = 1e-10

ArrayLike = Sequence[complex] | np.ndarray


def _as_coeff_vector(coeffs: ArrayLike) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.ndim != 1:
        raise CurveInputError("coefficient vector must be one-dimensional")
    return c


def trim_trailing(c: np.ndarray, rel: float = _TRIM_REL) -> np.ndarray:
    """Drop trailing coefficients below rel * max|c|; keep at least one entry."""
    mags = np.abs(c)
    top = mags.max() if c.size else 0.0
    if top == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(mags > rel * top)[0]
    return c[: keep[-1] + 1].copy()


class UnivariatePoly:
    """Dense univariate polynomial over C, ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: ArrayLike, trim: bool = True):
        c = _as_coeff_vector(coeffs)
        self.coeffs = trim_trailing(c) if trim else c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self, rel: float = _TRIM_REL) -> bool:
        return bool(np.all(np.abs(self.coeffs) == 0.0))

    def __call__(self, x: complex | np.ndarray) -> complex | np.ndarray:
        return npoly.polyval(x, self.coeffs)

    def deriv(self, order: int = 1) -> "UnivariatePoly":
        return UnivariatePoly(npoly.polyder(self.coeffs, order), trim=False)

    def roots(self) -> np.ndarray:
        """All complex roots, via the companion matrix of the trimmed polynomial."""
        c = trim_trailing(self.coeffs)
        if len(c) <= 1:
            return np.zeros(0, dtype=complex)
        return np.roots(c[::-1])

    def __mul__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        return UnivariatePoly(npoly.polymul(self.coeffs, other.coeffs), trim=False)

    def __repr__(self) -> str:
        return f"UnivariatePoly(degree={self.degree})"


class BivariateCurve:
    """Plane curve f(x, y) = 0 given by its coefficient matrix a[i, j] x^i y^j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: ArrayLike):
        a = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if a.ndim != 2:
            raise CurveInputError("coefficient matrix must be two-dimensional")
        top = np.abs(a).max() if a.size else 0.0
        if top == 0.0:
            raise CurveInputError("curve polynomial is identically zero")
        rows = np.nonzero(np.abs(a).max(axis=1) > 0)[0]
        cols = np.nonzero(np.abs(a).max(axis=0) > 0)[0]
        self.coeffs = np.ascontiguousarray(a[: rows[-1] + 1, : cols[-1] + 1])

    @property
    def deg_x(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def deg_y(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def total_degree(self) -> int:
        i, j = np.nonzero(np.abs(self.coeffs) > 0)
        return int((i + j).max())

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != y.shape:
            x, y = np.broadcast_arrays(x, y)
        return npoly.polyval2d(x, y, self.coeffs)

    def deriv(self, dx: int = 0, dy: int = 0) -> "BivariateCurve":
        c = self.coeffs
        if dx:
            c = npoly.polyder(c, dx, axis=0)
        if dy:
            c = npoly.polyder(c, dy, axis=1)
        c = np.atleast_2d(c)
        if not np.any(np.abs(c) > 0):
            c = np.zeros((1, 1), dtype=complex)
            out = object.__new__(BivariateCurve)
            out.coeffs = c
            return out
        return BivariateCurve(c)

    def y_coefficients(self) -> list[UnivariatePoly]:
        """Coefficients of y^j as polynomials in x, j = 0..deg_y."""
        return [UnivariatePoly(self.coeffs[:, j]) for j in range(self.deg_y + 1)]

    def x_coefficients(self) -> list[UnivariatePoly]:
        return [UnivariatePoly(self.coeffs[i, :]) for i in range(self.deg_x + 1)]

    def fiber_polynomial(self, x: complex) -> np.ndarray:
        """Ascending y-coefficients of f(x, .)."""
        return npoly.polyval(x, self.coeffs)

    def critical_system(self) -> tuple["BivariateCurve", "BivariateCurve"]:
        """(N f - y f_y, f_y) whose common zeros are the critical points.

        The y^N terms cancel in the first polynomial, so its y-degree is at
        most N - 1 by construction.
        """
        n = self.deg_y
        g1 = np.zeros_like(self.coeffs)
        for j in range(n + 1):
            g1[:, j] = (n - j) * self.coeffs[:, j]
        g1 = g1[:, :n] if n >= 1 else g1
        fy = self.deriv(dy=1)
        if not np.any(np.abs(g1) > 0):
            g1 = np.zeros((1, 1), dtype=complex)
            out = object.__new__(BivariateCurve)
            out.coeffs = g1
            return out, fy
        return BivariateCurve(g1), fy

    def homogenize(self) -> "HomogeneousCurve":
        return HomogeneousCurve(self)

    def scale(self) -> float:
        return float(max(1.0, np.abs(self.coeffs).max()))

    def residual_scale(self, x, y) -> np.ndarray:
        """Natural magnitude of evaluation noise at (x, y)."""
        ax = np.maximum(1.0, np.abs(x)) ** self.deg_x
        ay = np.maximum(1.0, np.abs(y)) ** self.deg_y
        return self.scale() * ax * ay

    def __repr__(self) -> str:
        return f"BivariateCurve(deg_x={self.deg_x}, deg_y={self.deg_y})"


class HomogeneousCurve:
    """Projective closure F(X, Y, Z) = Z^d f(X/Z, Y/Z) of a bivariate curve."""

    __slots__ = ("affine", "degree")

    def __init__(self, affine: BivariateCurve):
        self.affine = affine
        self.degree = affine.total_degree

    def __call__(self, X, Y, Z):
        a = self.affine.coeffs
        d = self.degree
        total = np.zeros(np.broadcast(X, Y, Z).shape, dtype=complex)
        for i, j in zip(*np.nonzero(np.abs(a) > 0)):
            total = total + a[i, j] * np.asarray(X) ** int(i) * np.asarray(Y) ** int(j) * np.asarray(Z) ** int(d - i - j)
        return total

    def gradient(self, X, Y, Z) -> tuple[complex, complex, complex]:
        a = self.affine.coeffs
        d = self.degree
        gx = gy = gz = 0.0 + 0.0j
        for i, j in zip(*np.nonzero(np.abs(a) > 0)):
            k = d - i - j
            c = a[i, j]
            if i:
                gx += c * i * X ** (i - 1) * Y**j * Z**k
            if j:
                gy += c * j * X**i * Y ** (j - 1) * Z**k
            if k:
                gz += c * k * X**i * Y**j * Z ** (k - 1)
        return gx, gy, gz

    def patch_y(self) -> BivariateCurve:
        """F(X, 1, Z) as a curve with base variable X and fibre variable Z."""
        a = self.affine.coeffs
        d = self.degree
        out = np.zeros((a.shape[0], d + 1), dtype=complex)
        for i, j in zip(*np.nonzero(np.abs(a) > 0)):
            out[i, d - i - j] += a[i, j]
        return BivariateCurve(out)

    def patch_x(self) -> BivariateCurve:
        """F(1, Y, Z) as a curve with base variable Z and fibre variable Y."""
        a = self.affine.coeffs
        d = self.degree
        out = np.zeros((d + 1, a.shape[1]), dtype=complex)
        for i, j in zip(*np.nonzero(np.abs(a) > 0)):
            out[d - i - j, j] += a[i, j]
        return BivariateCurve(out)

    def points_at_infinity(self) -> list[tuple[complex, complex, complex]]:
        """Projective points (X : Y : 0) on the curve, normalized."""
        a = self.affine.coeffs
        d = self.degree
        # top form sum_{i+j=d} a[i,j] X^i Y^j as a polynomial in X/Y
        c = np.zeros(d + 1, dtype=complex)
        for i in range(min(d, a.shape[0] - 1) + 1):
            j = d - i
            if j <= a.shape[1] - 1:
                c[i] = a[i, j]
        pts: list[tuple[complex, complex, complex]] = []
        cx = trim_trailing(c)
        if len(cx) - 1 < d:
            pts.append((1.0 + 0.0j, 0.0j, 0.0j))  # Y = 0 root of multiplicity d - deg
        if len(cx) > 1:
            for r in np.roots(cx[::-1]):
                pts.append((complex(r), 1.0 + 0.0j, 0.0j))
        elif len(cx) == 1 and d == 0:
            pass
        # include (0 : 1 : 0) when X | top form, i.e. c[0] = 0 handled by roots at 0
        return pts


# ---------------------------------------------------------------------------
# resultants
# ---------------------------------------------------------------------------


def _true_fiber_degree(coeff_polys: list[UnivariatePoly]) -> int:
    """Highest fibre power whose base-coefficient polynomial is not ~0."""
    mags = [np.abs(p.coeffs).max() for p in coeff_polys]
    top = max(mags) if mags else 0.0
    if top == 0.0:
        return -1
    for j in range(len(coeff_polys) - 1, -1, -1):
        if mags[j] > _TRIM_REL * top:
            return j
    return -1


def _sylvester_entry_table(
    pc: list[np.ndarray], qc: list[np.ndarray], d1: int, d2: int
) -> list[list[np.ndarray | None]]:
    m = d1 + d2
    table: list[list[np.ndarray | None]] = [[None] * m for _ in range(m)]
    for r in range(d2):  # shifted rows of p
        for j in range(d1 + 1):
            table[r][r + j] = pc[d1 - j]
    for r in range(d1):  # shifted rows of q
        for j in range(d2 + 1):
            table[d2 + r][r + j] = qc[d2 - j]
    return table


def _poly_det_fft(table: list[list[np.ndarray | None]], n_coeffs: int) -> np.ndarray:
    """Determinant of a matrix of polynomials by evaluation at roots of unity."""
    m = len(table)
    K = 1
    while K < n_coeffs:
        K *= 2
    E = np.zeros((K, m, m), dtype=complex)
    for r in range(m):
        for c in range(m):
            entry = table[r][c]
            if entry is None:
                continue
            E[:, r, c] = np.fft.fft(entry, n=K)
    dets = np.linalg.det(E)
    return np.fft.ifft(dets)


def resultant(p: BivariateCurve, q: BivariateCurve, eliminate: str = "y") -> UnivariatePoly:
    """Resultant of p and q with respect to one variable.

    eliminate="y" treats both as polynomials in y and returns a polynomial in
    x whose roots are the x-values of common zeros; eliminate="x" is the
    symmetric operation.
    """
    if eliminate == "y":
        pc_list, qc_list = p.y_coefficients(), q.y_coefficients()
    elif eliminate == "x":
        pc_list, qc_list = p.x_coefficients(), q.x_coefficients()
    else:
        raise CurveInputError(f"eliminate must be 'x' or 'y', got {eliminate!r}")

    d1 = _true_fiber_degree(pc_list)
    d2 = _true_fiber_degree(qc_list)
    if d1 < 0 or d2 < 0:
        return UnivariatePoly([0.0])
    if d1 == 0 and d2 == 0:
        return UnivariatePoly([1.0])

    # normalize entries once; only roots of the resultant are used downstream
    scale = max(max(np.abs(c.coeffs).max() for c in pc_list), max(np.abs(c.coeffs).max() for c in qc_list))
    pc = [c.coeffs / scale for c in pc_list[: d1 + 1]]
    qc = [c.coeffs / scale for c in qc_list[: d2 + 1]]

    if d1 == 0:
        out = np.array([1.0 + 0.0j])
        for _ in range(d2):
            out = npoly.polymul(out, pc[0])
        return UnivariatePoly(out)
    if d2 == 0:
        out = np.array([1.0 + 0.0j])
        for _ in range(d1):
            out = npoly.polymul(out, qc[0])
        return UnivariatePoly(out)

    degx_p = max(len(c) for c in pc) - 1
    degx_q = max(len(c) for c in qc) - 1
    bound = d2 * degx_p + d1 * degx_q + 1
    table = _sylvester_entry_table(pc, qc, d1, d2)
    coeffs = _poly_det_fft(table, bound)[:bound]
    return UnivariatePoly(coeffs)


def discriminant_points(curve: BivariateCurve, eliminate: str = "y") -> UnivariatePoly:
    """Resultant of the critical system of the curve.

    For eliminate="y" the roots are the x-coordinates over which the fibre of
    y-roots degenerates (branch and singular points).
    """
    g1, g2 = curve.critical_system()
    return resultant(g1, g2, eliminate=eliminate)


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------


def newton_2d(
    F: Callable[[complex, complex], tuple[complex, complex]],
    J: Callable[[complex, complex], np.ndarray],
    x0: complex,
    y0: complex,
    scale: Callable[[complex, complex], float],
    tol: float = 1e-14,
    max_iter: int = 50,
) -> tuple[complex, complex, float, bool]:
    """Damped Newton iteration for a 2x2 complex system.

    scale(x, y) supplies the natural residual magnitude; convergence is
    declared when the residual drops below tol * scale.
    """
    x, y = complex(x0), complex(y0)
    f1, f2 = F(x, y)
    res = float(np.hypot(abs(f1), abs(f2)))
    for _ in range(max_iter):
        s = scale(x, y)
        if res <= tol * s:
            return x, y, res / s, True
        jac = J(x, y)
        try:
            step = np.linalg.solve(jac, np.array([f1, f2], dtype=complex))
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(20):
            xn, yn = x - lam * step[0], y - lam * step[1]
            g1, g2 = F(xn, yn)
            rn = float(np.hypot(abs(g1), abs(g2)))
            if rn < res:
                x, y, f1, f2, res = xn, yn, g1, g2, rn
                break
            lam *= 0.5
        else:
            break
        if abs(lam * step[0]) + abs(lam * step[1]) < 1e-16 * (1.0 + abs(x) + abs(y)):
            break
    s = scale(x, y)
    return x, y, res / s, res <= tol * s


def critical_newton_system(curve: BivariateCurve):
    """Callables (F, J, scale) for refining critical points of the curve."""
    n = curve.deg_y
    fx = curve.deriv(dx=1)
    fy = curve.deriv(dy=1)
    fxy = curve.deriv(dx=1, dy=1)
    fyy = curve.deriv(dy=2)

    def F(x: complex, y: complex) -> tuple[complex, complex]:
        return n * curve(x, y) - y * fy(x, y), fy(x, y)

    def J(x: complex, y: complex) -> np.ndarray:
        vfy = fy(x, y)
        vfxy = fxy(x, y)
        vfyy = fyy(x, y)
        return np.array(
            [
                [n * fx(x, y) - y * vfxy, (n - 1) * vfy - y * vfyy],
                [vfxy, vfyy],
            ],
            dtype=complex,
        )

    def scale(x: complex, y: complex) -> float:
        return float(n * curve.residual_scale(x, y) + 1.0)

    return F, J, scale
