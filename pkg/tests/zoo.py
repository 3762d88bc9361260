"""Shared test curves, built programmatically to avoid expansion mistakes."""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from rsurf.curves import BivariateCurve


def mono(i: int, j: int, c: complex = 1.0) -> np.ndarray:
    a = np.zeros((i + 1, j + 1), dtype=complex)
    a[i, j] = c
    return a


def padd(*terms: np.ndarray) -> np.ndarray:
    rows = max(t.shape[0] for t in terms)
    cols = max(t.shape[1] for t in terms)
    out = np.zeros((rows, cols), dtype=complex)
    for t in terms:
        out[: t.shape[0], : t.shape[1]] += t
    return out


def pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return convolve2d(a, b)


def _hyperex_matrix() -> np.ndarray:
    # y^2 = (x^2 + 1)((x + 1)^2 + 1)((x + 2)^2 + 1)
    q1 = padd(mono(2, 0), mono(0, 0))
    q2 = padd(mono(2, 0), mono(1, 0, 2.0), mono(0, 0, 2.0))
    q3 = padd(mono(2, 0), mono(1, 0, 4.0), mono(0, 0, 5.0))
    rhs = pmul(pmul(q1, q2), q3)
    return padd(mono(0, 2), -rhs)


def _highsing_matrix() -> np.ndarray:
    # ((y^3 + x^2)^2 + x^3 y^2)^2 + x^7 y^3
    a = padd(mono(0, 3), mono(2, 0))
    b = padd(pmul(a, a), mono(3, 2))
    return padd(pmul(b, b), mono(7, 3))


CUBIC = BivariateCurve(padd(mono(0, 3), mono(3, 1, 2.0), mono(7, 0, -1.0)))
KLEIN = BivariateCurve(padd(mono(0, 7), mono(3, 0, -1.0), mono(2, 0, 2.0), mono(1, 0, -1.0)))
NONIC = BivariateCurve(
    padd(mono(0, 9), mono(2, 6, 2.0), mono(4, 3, 2.0), mono(6, 0), mono(0, 2))
)
HIGHSING = BivariateCurve(_highsing_matrix())
HYPEREX = BivariateCurve(_hyperex_matrix())
TROTT = BivariateCurve(
    padd(
        mono(4, 0, 144.0),
        mono(0, 4, 144.0),
        mono(2, 0, -225.0),
        mono(0, 2, -225.0),
        mono(2, 2, 350.0),
        mono(0, 0, 81.0),
    )
)
DIVG3 = BivariateCurve(
    padd(
        mono(4, 0, 30.0),
        mono(3, 1, -61.0),
        mono(2, 2, 41.0),
        mono(2, 0, -43.0),
        mono(1, 3, -11.0),
        mono(1, 1, 42.0),
        mono(0, 4, 1.0),
        mono(0, 2, -11.0),
        mono(0, 0, 9.0),
    )
)
DIVG6 = BivariateCurve(
    padd(
        mono(5, 0, -180.0),
        mono(4, 1, 396.0),
        mono(3, 2, -307.0),
        mono(2, 3, 107.0),
        mono(3, 0, 273.0),
        mono(2, 1, -318.0),
        mono(1, 4, -17.0),
        mono(1, 2, 117.0),
        mono(1, 0, -68.0),
        mono(0, 5, 1.0),
        mono(0, 3, -12.0),
        mono(0, 1, 19.0),
    )
)
LEMNISCATIC = BivariateCurve(padd(mono(0, 2), mono(3, 0, -1.0), mono(1, 0)))
EQUIANHARMONIC = BivariateCurve(padd(mono(0, 2), mono(3, 0, -1.0), mono(0, 0)))

ALL_CURVES = {
    "cubic": CUBIC,
    "klein": KLEIN,
    "nonic": NONIC,
    "highsing": HIGHSING,
    "hyperex": HYPEREX,
    "trott": TROTT,
    "divg3": DIVG3,
    "divg6": DIVG6,
    "lemniscatic": LEMNISCATIC,
}
