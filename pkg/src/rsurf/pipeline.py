"""Stage orchestration: from a coefficient matrix to the full surface data.

Stages run in dependency order: critical points, contour system, monodromy
with its stored traces, holomorphic differentials through the adjunction
conditions, canonical homology, periods and the Riemann matrix.  Each stage
feeds the next; the assembled container is what the function-theory layers
(theta, Abel map, KP) consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import Config
from .critical import CriticalData, find_critical_points
from .curves import BivariateCurve
from .differentials import (
    AdjunctionSystem,
    DifferentialBasis,
    compute_differentials,
)
from .homology import (
    HomologyBasis,
    PeriodData,
    compute_homology,
    riemann_matrix,
)
from .monodromy import MonodromyData, compute_monodromy


@dataclass
class SurfaceData:
    """Everything the downstream function theory needs, in one place."""

    curve: BivariateCurve
    config: Config
    critical: CriticalData
    monodromy: MonodromyData
    adjunction: AdjunctionSystem
    differentials: DifferentialBasis
    homology: HomologyBasis
    periods: PeriodData
    cache: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def genus(self) -> int:
        return self.homology.genus

    @property
    def riemann(self) -> np.ndarray:
        return self.periods.riemann

    @property
    def sheet_count(self) -> int:
        return self.monodromy.sheet_count

    @property
    def base_point(self) -> complex:
        return complex(self.monodromy.contours.base_point)


def compute_surface(coeffs, config: Config | None = None) -> SurfaceData:
    """Run every stage on the curve given by its coefficient matrix."""
    config = config if config is not None else Config()
    curve = coeffs if isinstance(coeffs, BivariateCurve) else BivariateCurve(
        np.asarray(coeffs, dtype=complex)
    )
    critical = find_critical_points(curve, config)
    mon = compute_monodromy(curve, critical, config)
    system, basis = compute_differentials(curve, critical, mon, config)
    hom = compute_homology(mon)
    periods = riemann_matrix(curve, mon, hom, basis, config)
    return SurfaceData(
        curve=curve,
        config=config,
        critical=critical,
        monodromy=mon,
        adjunction=system,
        differentials=basis,
        homology=hom,
        periods=periods,
    )


__all__ = ["SurfaceData", "compute_surface"]
