"""Critical locus of the branched covering: branch points, singularities, poles.

The x-values over which the fibre of y-roots degenerates are the roots of the
resultant of the critical system; multiple roots are recovered as clusters of
perturbed companion-matrix roots and their multiplicity is validated by Newton
iteration on the matching derivative of the resultant: x is a multiplicity-m
root of R exactly when it is a simple root of R^(m-1), so the validated
centres come out with machine accuracy instead of the eps^(1/m) scatter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Config
from .curves import (
    BivariateCurve,
    UnivariatePoly,
    critical_newton_system,
    discriminant_points,
    newton_2d,
)
from .errors import CurveInputError
from .quadrature import solve_fiber

_SINGULAR_REL = 1e-6


@dataclass
class CriticalPoint:
    """One problem point of the covering in the finite x-plane."""

    x: complex
    multiplicity: int
    y_values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    singular: bool = False
    pole: bool = False
    anchor: bool = False

    @property
    def kind(self) -> str:
        if self.anchor:
            return "anchor"
        if self.singular:
            return "singular"
        if self.pole and self.multiplicity == 0:
            return "pole"
        return "branch"


@dataclass
class CriticalData:
    points: list[CriticalPoint]
    singular_affine: list[tuple[complex, complex]]
    singular_infinite: list[tuple[complex, complex, complex]]
    resultant: UnivariatePoly
    rho: float

    @property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])


# ---------------------------------------------------------------------------
# clustering with validated multiplicities
# ---------------------------------------------------------------------------


def _components(points: np.ndarray, tol: float) -> list[list[int]]:
    """Connected components of the proximity graph at distance tol."""
    n = len(points)
    seen = np.zeros(n, dtype=bool)
    order = np.lexsort((points.imag, points.real))
    comps: list[list[int]] = []
    for start in order:
        if seen[start]:
            continue
        stack = [int(start)]
        seen[start] = True
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            close = np.nonzero(~seen & (np.abs(points - points[i]) <= tol))[0]
            for j in close:
                seen[j] = True
                stack.append(int(j))
        comps.append(sorted(comp))
    return comps


_COEFF_NOISE = 1e-13  # relative noise level of numerically computed resultants


def _newton_simple(poly: UnivariatePoly, x0: complex, max_iter: int = 40) -> tuple[complex, bool]:
    """Newton iteration; success means the step reached the rounding floor."""
    d = poly.deriv()
    mags = np.abs(poly.coeffs)
    x = complex(x0)
    step = np.inf
    for _ in range(max_iter):
        den = d(x)
        if den == 0:
            return x, step < np.inf
        num = poly(x)
        step = abs(num / den)
        x -= num / den
        if step == 0.0:
            return x, True
        # attainable accuracy: evaluation noise over local slope
        floor = 2.3e-16 * float(np.polynomial.polynomial.polyval(abs(x), mags)) / abs(den)
        if step <= 50.0 * max(floor, 1e-300):
            return x, True
    return x, False


def _multiplicity_estimate(R: UnivariatePoly, x: complex) -> int:
    """Smallest j with |R^(j)(x)| clearly above the coefficient-noise level."""
    norm = float(np.abs(R.coeffs).max())
    c = R.coeffs
    w = np.ones(len(c))
    for j in range(R.degree + 1):
        val = abs(np.polynomial.polynomial.polyval(x, c))
        noise = _COEFF_NOISE * norm * float(np.polynomial.polynomial.polyval(abs(x), w))
        if val > 1e3 * noise:
            return j
        c = np.polynomial.polynomial.polyder(c)
        w = np.polynomial.polynomial.polyder(w)
    return R.degree + 1


def _validate_cluster(R: UnivariatePoly, members: np.ndarray) -> tuple[complex, bool]:
    """Polish the cluster mean assuming multiplicity = len(members).

    A multiplicity-m root of R is a simple root of R^(m-1); polishing there
    gives machine accuracy. The derivative-magnitude scan then confirms that
    m is the actual multiplicity at the polished point.
    """
    m = len(members)
    mean = members.mean()
    if m > R.degree:
        return mean, False
    if m == R.degree:
        x = mean
    else:
        target = R.deriv(m - 1) if m > 1 else R
        x, ok = _newton_simple(target, mean)
        if not ok:
            return mean, False
        diam = float(np.abs(members - mean).max()) if m > 1 else 0.0
        if abs(x - mean) > 4.0 * diam + 1e-2 * (1.0 + abs(mean)):
            return mean, False
    if _multiplicity_estimate(R, x) != m:
        return mean, False
    return x, True


def cluster_resultant_roots(
    R: UnivariatePoly, refined: np.ndarray, cluster_tol: float
) -> list[tuple[complex, int]]:
    """Group refined roots into validated (centre, multiplicity) clusters.

    Starts from fine proximity components and merges nearest clusters until
    every cluster passes the derivative-Newton validation or no merge is left.
    """
    if len(refined) == 0:
        return []
    comps = _components(refined, cluster_tol)
    clusters: list[list[int]] = comps
    for _ in range(2 * len(refined) + 1):
        centres = []
        results = []
        all_ok = True
        for c in clusters:
            centre, ok = _validate_cluster(R, refined[c])
            centres.append(centre)
            results.append(ok)
            all_ok &= ok
        if all_ok or len(clusters) == 1:
            break
        # merge the first invalid cluster with its nearest neighbour
        bad = results.index(False)
        dists = [
            abs(centres[bad] - centres[j]) if j != bad else np.inf for j in range(len(clusters))
        ]
        near = int(np.argmin(dists))
        if not np.isfinite(dists[near]):
            break
        merged = sorted(clusters[bad] + clusters[near])
        clusters = [c for k, c in enumerate(clusters) if k not in (bad, near)] + [merged]
    out = []
    for c in clusters:
        centre, ok = _validate_cluster(R, refined[c])
        out.append((centre if ok else refined[c].mean(), len(c)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


# ---------------------------------------------------------------------------
# main analysis
# ---------------------------------------------------------------------------


def _refine_pairs(curve: BivariateCurve, raw_roots: np.ndarray, tol: float) -> list[tuple[complex, complex]]:
    """2D-Newton refinement of every (x_root, y_fibre) starting pair."""
    F, J, scale = critical_newton_system(curve)
    pairs: list[tuple[complex, complex]] = []
    for xk in raw_roots:
        ys = solve_fiber(curve, xk)
        if len(ys) == 0:
            continue
        g1, g2 = F(xk, ys)
        res = np.hypot(np.abs(g1), np.abs(g2))
        # generous cap: raw roots of high-multiplicity clusters sit ~eps^(1/m)
        # off, so residuals can be sizeable before refinement
        keep = res <= 1e-2 * scale(xk, np.abs(ys).max())
        if not keep.any():
            keep = res <= res.min() * 10.0 + 1e-300
        for y0 in ys[keep]:
            x, y, rel, ok = newton_2d(F, J, xk, y0, scale, tol=1e-10, max_iter=30)
            if ok:
                pairs.append((x, y))
    return pairs


def _dedupe(values: list[complex], tol: float) -> list[complex]:
    out: list[complex] = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        if not any(abs(v - u) <= tol for u in out):
            out.append(v)
    return out


def find_critical_points(curve: BivariateCurve, config: Config) -> CriticalData:
    """Branch points, affine/projective singularities and y-poles of the curve."""
    if curve.deg_y < 1:
        raise CurveInputError("curve must have positive degree in y")
    R = discriminant_points(curve)
    raw = R.roots()

    pairs = _refine_pairs(curve, raw, config.tol) if len(raw) else []
    refined_x = np.array([p[0] for p in pairs]) if pairs else np.zeros(0, dtype=complex)

    # map every raw root to its nearest refined value so cluster sizes count
    # resultant multiplicity, not the number of converged Newton pairs
    if len(raw) and len(refined_x):
        snapped = refined_x[np.argmin(np.abs(raw[:, None] - refined_x[None, :]), axis=1)]
    else:
        snapped = raw
    clusters = cluster_resultant_roots(R, snapped, config.cluster_tol)

    fx = curve.deriv(dx=1)
    fy = curve.deriv(dy=1)
    points: list[CriticalPoint] = []
    singular_affine: list[tuple[complex, complex]] = []
    for centre, mult in clusters:
        # critical y over this x: accurate multiple roots of f_y(x*, .) that
        # also lie on the curve (the 2D Newton pairs stall on multiple roots)
        fy_fiber = UnivariatePoly(fy.fiber_polynomial(centre))
        ys: list[complex] = []
        if fy_fiber.degree >= 1:
            raw_y = fy_fiber.roots()
            for yc, _ in cluster_resultant_roots(fy_fiber, raw_y, config.cluster_tol):
                fscale = curve.residual_scale(centre, max(1.0, abs(yc)))
                if abs(curve(centre, yc)) <= 1e-6 * fscale:
                    ys.append(yc)
        ys = _dedupe(ys, config.cluster_tol * 10)
        singular = False
        for y in ys:
            fscale = max(1.0, float(np.abs(fx.coeffs).max())) * max(1.0, abs(centre)) ** fx.deg_x * max(
                1.0, abs(y)
            ) ** fx.deg_y
            if abs(fx(centre, y)) <= _SINGULAR_REL * fscale:
                singular = True
                singular_affine.append((centre, y))
        points.append(
            CriticalPoint(
                x=centre,
                multiplicity=mult,
                y_values=np.array(ys, dtype=complex),
                singular=singular,
            )
        )

    # poles of y(x): zeros of the leading y-coefficient
    lead = UnivariatePoly(curve.coeffs[:, -1])
    if lead.degree >= 1:
        pole_raw = lead.roots()
        pole_clusters = cluster_resultant_roots(lead, pole_raw, config.cluster_tol)
        for centre, mult in pole_clusters:
            hit = next((p for p in points if abs(p.x - centre) <= config.cluster_tol * 10), None)
            if hit is not None:
                hit.pole = True
            else:
                points.append(CriticalPoint(x=centre, multiplicity=0, pole=True))

    # projective singular points on the line at infinity
    H = curve.homogenize()
    singular_infinite: list[tuple[complex, complex, complex]] = []
    seen: list[tuple[complex, complex, complex]] = []
    for X, Y, Z in H.points_at_infinity():
        if any(abs(X - a) + abs(Y - b) < 1e-8 for (a, b, _) in seen):
            continue
        seen.append((X, Y, Z))
        g = H.gradient(X, Y, Z)
        gscale = max(1.0, float(np.abs(curve.coeffs).max())) * max(1.0, abs(X)) ** H.degree
        if max(abs(v) for v in g) <= _SINGULAR_REL * gscale:
            singular_infinite.append(_normalize_projective(X, Y, Z))

    if not points:
        anchor_x = 0.0 + 0.0j
        if abs(lead(anchor_x)) == 0.0:
            anchor_x = 1.0 + 0.0j
        points.append(CriticalPoint(x=anchor_x, multiplicity=0, anchor=True))

    points.sort(key=lambda p: (p.x.real, p.x.imag))
    xs = np.array([p.x for p in points])
    if len(xs) > 1:
        d = np.abs(xs[:, None] - xs[None, :])
        np.fill_diagonal(d, np.inf)
        rho = float(d.min())
    else:
        rho = 2.0 * max(1.0, abs(xs[0]))
    return CriticalData(
        points=points,
        singular_affine=singular_affine,
        singular_infinite=singular_infinite,
        resultant=R,
        rho=rho,
    )


def _normalize_projective(X: complex, Y: complex, Z: complex) -> tuple[complex, complex, complex]:
    for pivot in (Z, Y, X):
        if abs(pivot) > 1e-12:
            return (X / pivot, Y / pivot, Z / pivot)
    raise CurveInputError("zero projective point")
