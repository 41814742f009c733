"""Spectral laboratory for shear-flow perturbation problems in a periodic strip."""

from .config import DEFAULTS, LabConfig, resolution_order
from .errors import (AirySectorError, DegeneracyError, DivergenceError,
                     ParameterError, SolverError)
from .grid import ChebyshevGrid, build_grid, integrate, interpolate
from .modes import (ModeParams, ModeSolution, PoiseuilleProfile,
                    operator_matrix, rhs_from_force, smallest_singular_value,
                    solve_mode_clamped, solve_mode_slip, solve_zero_mode)
from .norms import EstimateReport, NormSet, energy_balances, estimate_report, mode_norms

__version__ = "0.1.0"
