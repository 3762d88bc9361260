"""Local series of the fibre around problem points, computed by Cauchy integrals.

Around a problem point x_s the sheets of one monodromy cycle of length r form
a single function of the local parameter t, where x = x_s + t^r.  Its Laurent
coefficients are Cauchy integrals over the composite contour that winds r
times around the circle already traced for the monodromy.  The trace samples
live on Chebyshev angles (right for continuation and path integrals, but the
oscillatory weight e^{-in phi} is exponentially ill-conditioned there at high
n), so each cycle row is first resampled onto uniform angles through its
barycentric interpolant and the whole order window then drops out of one FFT
with a flat noise floor.  The same machinery expands arbitrary sampled
functions (f_y, integrands of differentials) and works at infinity either on
a projective patch or directly in descending powers of x^{1/r}.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import Config
from .critical import find_critical_points
from .curves import BivariateCurve
from .errors import InsufficientResolution, MonodromyMismatch
from .monodromy import MonodromyData, compose, cycles_of, invert, match_columns
from .quadrature import CircleTrace, chebyshev_points, trace_circle, trace_line

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Cauchy coefficients on a composite circle contour
# ---------------------------------------------------------------------------


def _resample_rows(rows: np.ndarray, m: int) -> np.ndarray:
    """Values of each row's Chebyshev interpolant at m uniform angles
    phi_j = 2 pi j / m; rows are sampled at phi = pi (1 - cos(k pi / N))."""
    npts = rows.shape[1]
    s_nodes = chebyshev_points(npts - 1)
    w = np.ones(npts)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    s_targets = 1.0 - 2.0 * np.arange(m) / m
    diff = s_targets[:, None] - s_nodes[None, :]
    hit_t, hit_k = np.nonzero(np.abs(diff) < 1e-14)
    diff[hit_t, hit_k] = 1.0
    kern = w[None, :] / diff
    out = (rows @ kern.T) / kern.sum(axis=1)[None, :]
    out[:, hit_t] = rows[:, hit_k]
    return out


def laurent_window(
    turns: np.ndarray,
    phi: np.ndarray,
    theta0: float,
    radius: float,
    r: int,
    orders: np.ndarray,
) -> np.ndarray:
    """Coefficients of t^n, n in `orders`, of the function sampled in `turns`.

    turns[k] holds the samples of the k-th pass around the circle at absolute
    angle theta0 + phi; t is the branch of (x - x_s)^(1/r) with argument
    (theta0 + phi + 2 pi k)/r, anchored at the first pass.
    """
    tr, npts = turns.shape
    if tr != r:
        raise ValueError(f"need {r} passes, got {tr}")
    if len(phi) != npts:
        raise ValueError("phi grid does not match the samples")
    orders = np.asarray(orders, dtype=int)
    m = npts - 1
    nmax = int(np.max(np.abs(orders))) if orders.size else 0
    # the FFT window must cover every requested order without wraparound
    while r * m < 2 * nmax + 4:
        m *= 2
    samples = _resample_rows(turns, m).reshape(r * m)
    c = np.fft.fft(samples) / (r * m)
    ns = orders.astype(float)
    return c[np.mod(orders, r * m)] * np.exp(-1j * ns * theta0 / r) * radius ** (-ns / r)


def _tail_check(coeffs: np.ndarray, orders: np.ndarray, radius: float, r: int, amplitude: float) -> None:
    """Trailing coefficients above the noise envelope mean the circle was
    undersampled; machine-accurate traces keep the tail far below it."""
    pos = orders > 0
    if pos.sum() < 20:
        return
    envelope = 1e-10 * max(1.0, amplitude) * radius ** (-orders[pos] / r)
    tail_c = np.abs(coeffs[pos][-10:])
    tail_e = envelope[-10:]
    if np.sum(tail_c > tail_e) >= 8:
        raise InsufficientResolution(
            f"series tail at orders {int(orders[pos][-10])}..{int(orders[-1])} "
            f"sits above the quadrature noise envelope; increase the mode count"
        )


# ---------------------------------------------------------------------------
# series container
# ---------------------------------------------------------------------------


@dataclass
class PuiseuxSeries:
    """y = sum_j coeffs[j] t^(lowest_power + j) with x = center + t^r,
    or x = t^(-r) for a series at infinity."""

    center: complex
    r: int
    coeffs: np.ndarray
    lowest_power: int
    sheet_cycle: list[int]
    radius: float
    at_infinity: bool = False

    @property
    def y_center(self) -> complex:
        return self.coeff(0)

    def coeff(self, n: int) -> complex:
        j = n - self.lowest_power
        if j < 0 or j >= len(self.coeffs):
            return 0.0 + 0.0j
        return complex(self.coeffs[j])

    def powers(self) -> np.ndarray:
        return self.lowest_power + np.arange(len(self.coeffs))

    def x_of_t(self, t):
        t = np.asarray(t, dtype=complex)
        return t ** (-self.r) if self.at_infinity else self.center + t**self.r

    def y_of_t(self, t):
        t = np.asarray(t, dtype=complex)
        out = np.zeros_like(t)
        for p, a in zip(self.powers(), self.coeffs):
            out = out + a * t ** float(p)
        return out

    def rotations(self) -> list["PuiseuxSeries"]:
        """All r equivalent series under t -> eps t, eps^r = 1."""
        out = []
        powers = self.powers()
        for m in range(self.r):
            eps = np.exp(2j * np.pi * m / self.r)
            cyc = self.sheet_cycle[m:] + self.sheet_cycle[:m]
            out.append(
                replace(self, coeffs=self.coeffs * eps**powers, sheet_cycle=cyc)
            )
        return out

    def residual(self, curve: BivariateCurve, t) -> np.ndarray:
        return np.abs(curve(self.x_of_t(t), self.y_of_t(t)))


# ---------------------------------------------------------------------------
# finite problem points
# ---------------------------------------------------------------------------


def _cycle_turns(circ: CircleTrace, cycle_rows: list[int]) -> np.ndarray:
    return circ.Y[cycle_rows]


def expand_on_cycle(
    circ: CircleTrace,
    cycle_rows: list[int],
    values: np.ndarray,
    orders: np.ndarray,
) -> np.ndarray:
    """Laurent coefficients of an arbitrary function given by `values` on the
    trace rows (same layout as circ.Y), followed along the given cycle."""
    turns = values[cycle_rows]
    return laurent_window(
        turns, circ.phi, circ.theta0, circ.radius, len(cycle_rows), orders
    )


def puiseux_at_finite(
    curve: BivariateCurve,
    mon: MonodromyData,
    index: int,
    n_p: int,
    tail_guard: bool = True,
) -> list[PuiseuxSeries]:
    """One series per monodromy cycle at problem point `index`, sheet labels
    in base-sheet numbering, anchored at the cycle's first trace row."""
    circ = mon.circles[index]
    rows_of_sheet = mon.circle_rows[index]
    sheet_of_row = invert(rows_of_sheet)
    center = complex(mon.contours.centers[index])
    orders = np.arange(0, n_p + 1)
    out = []
    for cyc in cycles_of(circ.cycle):
        turns = _cycle_turns(circ, cyc)
        coeffs = laurent_window(
            turns, circ.phi, circ.theta0, circ.radius, len(cyc), orders
        )
        if tail_guard:
            _tail_check(coeffs, orders, circ.radius, len(cyc), float(np.abs(turns).max()))
        out.append(
            PuiseuxSeries(
                center=center,
                r=len(cyc),
                coeffs=coeffs,
                lowest_power=0,
                sheet_cycle=[int(sheet_of_row[row]) for row in cyc],
                radius=circ.radius,
            )
        )
    return out


# ---------------------------------------------------------------------------
# infinity, projective route
# ---------------------------------------------------------------------------


def patch_curve_at_infinity(curve: BivariateCurve, point: tuple) -> tuple[BivariateCurve, complex]:
    """Auxiliary affine curve through an infinite point and the base-variable
    value of that point on it."""
    X, Y, Z = point
    H = curve.homogenize()
    if abs(Y) > abs(X):
        # normalize Y = 1: curve in (X, Z), the point sits at X = X/Y
        return H.patch_y(), complex(X / Y)
    # normalize X = 1: curve in (Z, Y), the point sits at Z = 0
    return H.patch_x(), 0.0 + 0.0j


def puiseux_at_infinity_projective(
    curve: BivariateCurve,
    point: tuple,
    config: Config,
    n_p: int | None = None,
) -> list[PuiseuxSeries]:
    """Expansions of the patch fibre variable around an infinite point, via
    the same circle machinery run on the auxiliary curve."""
    n_p = config.n_puiseux if n_p is None else n_p
    patch, center = patch_curve_at_infinity(curve, point)
    crit = find_critical_points(patch, config)
    radius = config.kappa * crit.rho
    circ = trace_circle(
        patch, center, radius, 0.0, config.n_modes, config.adaptive_continuation
    )
    orders = np.arange(0, n_p + 1)
    out = []
    for cyc in cycles_of(circ.cycle):
        turns = _cycle_turns(circ, cyc)
        coeffs = laurent_window(turns, circ.phi, 0.0, radius, len(cyc), orders)
        _tail_check(coeffs, orders, radius, len(cyc), float(np.abs(turns).max()))
        out.append(
            PuiseuxSeries(
                center=center,
                r=len(cyc),
                coeffs=coeffs,
                lowest_power=0,
                sheet_cycle=list(cyc),
                radius=radius,
            )
        )
    return out


# ---------------------------------------------------------------------------
# infinity, direct route in descending powers of x^(1/r)
# ---------------------------------------------------------------------------


def far_circle_frame(
    curve: BivariateCurve, mon: MonodromyData, config: Config
) -> tuple[CircleTrace, np.ndarray, int]:
    """Trace the far circle enclosing every problem circle with clearance,
    carrying the base sheet labels to its start point along the tree."""
    sys = mon.contours
    outer = int(np.argmax(np.abs(sys.centers) + sys.radius))
    r_rim = float(np.abs(sys.centers[outer]) + sys.radius)
    r_far = config.far_field_factor * r_rim
    touch_angle = float(np.angle(sys.centers[outer])) if abs(sys.centers[outer]) > 0 else 0.0

    # frame at the touching point: swing around the outer circle from its
    # entry angle to the touch direction
    entry = sys.nodes[outer].entry_angle
    span = (touch_angle - entry) % _TWO_PI
    frame = mon.entry_frames[outer]
    if span > 1e-12:
        arc = trace_circle(
            curve, complex(sys.centers[outer]), sys.radius, entry,
            config.n_modes, config.adaptive_continuation, span=span,
        )
        rows = match_columns(frame, arc.Y[:, 0], context="arc to the far circle")
        frame = arc.Y[rows, -1]

    # head radially out so the far circle keeps clear of the outermost
    # critical point; right on the rim the fibre resample stalls
    ray = trace_line(
        curve,
        r_rim * np.exp(1j * touch_angle),
        r_far * np.exp(1j * touch_angle),
        config.n_modes,
        config.adaptive_continuation,
    )
    rows = match_columns(frame, ray.Y[:, 0], context="ray to the far circle")
    frame = ray.Y[rows, -1]

    big = trace_circle(
        curve, 0.0, r_far, touch_angle, 2 * config.n_modes,
        config.adaptive_continuation,
    )
    rows = match_columns(frame, big.Y[:, 0], context="entering the far circle")
    return big, rows, outer


def puiseux_at_infinity_direct(
    curve: BivariateCurve,
    mon: MonodromyData,
    config: Config,
    n_p: int | None = None,
) -> list[PuiseuxSeries]:
    """Series y = sum beta_n t^n, t = x^(-1/r), one per cycle of the sheet
    permutation at infinity; verifies that permutation against the tree."""
    n_p = config.n_puiseux if n_p is None else n_p
    big, rows, outer = far_circle_frame(curve, mon, config)
    sheet_of_row = invert(rows)
    sigma_ta = sheet_of_row[big.cycle[rows]]

    # the frame reached the touch point directly along the tree, so the based
    # far loop equals the loop product rotated to start at the outer circle;
    # undo that by conjugating with the loops visited before it
    rho = np.arange(mon.sheet_count)
    for v in mon.contours.visit_order:
        if v == outer:
            break
        rho = compose(rho, mon.permutations[v])
    sigma_far = invert(rho)[sigma_ta[rho]]
    expected = invert(mon.sigma_infinity)
    if sigma_far.tolist() != expected.tolist():
        raise MonodromyMismatch(
            f"far-circle permutation {sigma_far.tolist()} does not equal the "
            f"inverse of the composed permutation at infinity {expected.tolist()}"
        )

    out = []
    for cyc in cycles_of(big.cycle):
        r = len(cyc)
        turns = _cycle_turns(big, cyc)
        # t = x^(-1/r) turns the window inside out: the coefficient of t^n is
        # the window at order -n on the same radius.  y grows at most like
        # x^deg_x, and orders above n_p carry pure quadrature noise, so no
        # tail check applies out here.
        orders_t = np.arange(-r * curve.deg_x, n_p + 1)
        beta = laurent_window(turns, big.phi, big.theta0, big.radius, r, -orders_t)
        out.append(
            PuiseuxSeries(
                center=0.0,
                r=r,
                coeffs=beta,
                lowest_power=int(orders_t[0]),
                sheet_cycle=[int(sheet_of_row[row]) for row in cyc],
                radius=big.radius,
                at_infinity=True,
            )
        )
    return out
