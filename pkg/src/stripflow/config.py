"""Tunable constants with package-wide defaults.

Several thresholds are only shown to exist in the analysis this package
implements numerically; their working values live here so that every run
can report exactly which values were used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class LabConfig:
    # regime thresholds: intermediate frequencies are 1 <= |n| <= regime_eps1*L*sqrt(phi),
    # the flux is "large" once phi >= phi0
    regime_eps1: float = 0.05
    phi0: float = 100.0

    # linear solve acceptance: relative discrete residual, one refinement pass,
    # then a single resolution doubling before giving up
    residual_tol: float = 1e-9

    # boundary-layer profile construction
    rho_max: float = 40.0
    layer_grid_order: int = 160
    layer_decay_radius: float = 10.0

    # nonlinear iteration
    mode_cutoff: int = 32
    picard_tol: float = 1e-10
    picard_max_iter: int = 80

    # smallness constants used by the nonlinear/uniqueness experiments
    small_force_eps: float = 0.05
    uniqueness_h1_eps: float = 0.05

    def with_overrides(self, **kw) -> "LabConfig":
        return replace(self, **kw)


DEFAULTS = LabConfig()


def resolution_order(beta: float, minimum: int = 64) -> int:
    """Grid order resolving a wall layer of width ~1/beta.

    Chebyshev points cluster quadratically at the walls, so ~6*beta total
    points leave a handful inside each layer.
    """
    m = max(minimum, math.ceil(6.0 * beta))
    if m > 1024:
        raise ValueError(
            f"required grid order {m} exceeds the supported maximum 1024; "
            "reduce the flux or the mode index"
        )
    return m
