"""Exception and warning types shared across the package.

Exit-code mapping used by the CLI: ConsistencyError -> 1 (numbers were
produced but fail internal cross-checks), CurveInputError -> 2,
ResolutionError -> 3 (the requested resolution cannot separate or resolve
the features of this curve; retry with different parameters).
"""


class CurveInputError(ValueError):
    """Malformed curve input: bad coefficient matrix, degenerate polynomial."""


class ResolutionError(RuntimeError):
    """The configured resolution is insufficient for a well-defined answer."""


class AmbiguousContinuation(ResolutionError):
    """Root tracking could not uniquely match fibre points between steps."""


class InsufficientResolution(ResolutionError):
    """Series coefficients drown in quadrature noise; raise the mode count."""


class GeometryError(ResolutionError):
    """Contour construction failed; usually a smaller kappa helps."""


class NearCriticalEvaluation(ResolutionError):
    """Integrand evaluation too close to a point where f_y vanishes."""


class ConsistencyError(RuntimeError):
    """Computed data fail an internal cross-check."""


class MonodromyMismatch(ConsistencyError):
    """Product of branch permutations does not close up to the identity."""


class GenusMismatch(ConsistencyError):
    """Riemann-Hurwitz genus disagrees with the adjunction null space."""


class InternalGraph(ConsistencyError):
    """Homology graph produced the wrong number of independent cycles."""


class NotUnimodular(ConsistencyError):
    """Intersection form did not reduce to canonical form over the integers."""


class SingularAMatrix(ConsistencyError):
    """a-period matrix is singular; wrong differential basis or homology."""


class NotPositiveDefinite(ConsistencyError):
    """Imaginary part of the period matrix is not positive definite."""


class NoOddCharacteristic(ConsistencyError):
    """No nonsingular odd half-integer characteristic found; bad theta data."""


class RegionMismatch(ValueError):
    """Point lies outside the evaluation region of the requested method."""


class BranchSelectionFailure(ResolutionError):
    """No branch of the local root matches the requested sheet value."""


class SingularConfiguration(ValueError):
    """Degenerate point configuration: a denominator theta value vanishes."""


class NonRealWarning(UserWarning):
    """A KP field expected to be real has a significant imaginary part."""


class AccuracyWarning(UserWarning):
    """A consistency residual exceeds the configured tolerance."""
