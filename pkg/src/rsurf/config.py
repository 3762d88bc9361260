"""Run configuration.

All tolerances and resolution knobs live here so that the pipeline stages,
the CLI and the service share one validated set of defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import CurveInputError


def _threads_from_env() -> int:
    raw = os.environ.get("RIEMANN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise CurveInputError(f"RIEMANN_THREADS must be an integer, got {raw!r}")
    return max(1, n)


@dataclass(frozen=True)
class Config:
    """Numerical parameters for a surface computation.

    tol            consistency target; the pipeline fails if the final error
                   estimate exceeds it
    kappa          circle radius as a fraction of the minimal problem-point
                   distance
    n_modes        Chebyshev collocation points per circle (N)
    n_line_modes   collocation points per connecting line; default
                   max(16, n_modes // 4)
    n_puiseux      number of series coefficients kept per expansion
    cluster_tol    distance below which refined roots merge into one cluster
    """

    tol: float = 1e-12
    kappa: float = 1.0 / 2.5
    n_modes: int = 128
    n_line_modes: int | None = None
    n_puiseux: int = 100
    cluster_tol: float = 1e-6
    adaptive_continuation: bool = False
    theta_epsilon: float = 1e-16
    rank_tol: float = 1e-8
    residue_zero_band: float = 1e-8
    residue_sig_band: float = 1e-4
    near_circle_factor: float = 0.8
    far_field_factor: float = 3.0
    use_lll: bool = False
    threads: int = field(default_factory=_threads_from_env)

    def __post_init__(self) -> None:
        if not (1e-14 <= self.tol <= 1e-10):
            raise CurveInputError(f"tol must lie in [1e-14, 1e-10], got {self.tol}")
        if not (0.0 < self.kappa <= 0.5):
            raise CurveInputError(f"kappa must lie in (0, 0.5], got {self.kappa}")
        if self.n_modes < 16:
            raise CurveInputError(f"n_modes must be at least 16, got {self.n_modes}")
        if self.n_puiseux < 4:
            raise CurveInputError(f"n_puiseux must be at least 4, got {self.n_puiseux}")
        if self.cluster_tol <= 0:
            raise CurveInputError("cluster_tol must be positive")

    @property
    def line_modes(self) -> int:
        if self.n_line_modes is not None:
            return max(16, self.n_line_modes)
        return max(16, self.n_modes // 4)

    def with_modes(self, n_modes: int) -> "Config":
        return replace(self, n_modes=n_modes)

    def updated(self, **kwargs: Any) -> "Config":
        return replace(self, **kwargs)
