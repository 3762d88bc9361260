"""Numerical Riemann surfaces of plane algebraic curves.

Given a polynomial f(x, y) with complex coefficients, the package computes
the analytic apparatus of the compact surface of f = 0: discriminant and
singular points, monodromy of the branched covering, Puiseux expansions,
holomorphic differentials through adjunction, a canonical homology basis,
period matrices, multidimensional theta functions with characteristics,
the Abel map, and quasi-periodic KP solutions built from these data.
"""

from .config import Config
from .curves import BivariateCurve, HomogeneousCurve, UnivariatePoly
from .errors import (
    AmbiguousContinuation,
    ConsistencyError,
    CurveInputError,
    GenusMismatch,
    GeometryError,
    MonodromyMismatch,
    NonRealWarning,
    ResolutionError,
)
from .pipeline import SurfaceData, compute_surface

__all__ = [
    "AmbiguousContinuation",
    "BivariateCurve",
    "Config",
    "ConsistencyError",
    "CurveInputError",
    "GenusMismatch",
    "GeometryError",
    "HomogeneousCurve",
    "MonodromyMismatch",
    "NonRealWarning",
    "ResolutionError",
    "SurfaceData",
    "UnivariatePoly",
    "compute_surface",
]

__version__ = "0.1.0"
