"""Norms, energy balances and a priori estimate reports.

Every inequality the analysis provides for a solved mode is evaluated as a
named (lhs, rhs_core, ratio) entry, where rhs_core is the force side with
the unknown constant stripped. The two energy balances obtained by pairing
the equation with conj(psi) act as the main correctness gate: they hold
exactly for the true solution, so their discrete residual measures solver
quality directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS, LabConfig
from .errors import ParameterError
from .grid import ChebyshevGrid, integrate
from .modes import (HIGH, MEDIUM, SMALL_FLUX, ZERO, ModeParams, ModeSolution,
                    PoiseuilleProfile, mass_scaled_sigma_min, operator_matrix,
                    smallest_singular_value)


def _quad(values: np.ndarray, grid: ChebyshevGrid) -> float:
    return float(np.real(integrate(np.abs(values) ** 2, grid)))


@dataclass(frozen=True)
class NormSet:
    """Sobolev norms of a mode's velocity over the strip (2*pi*L included)."""

    l2: float
    h1: float
    h2: float
    h53: float
    hn4: float


def mode_norms(solution: ModeSolution, grid: ChebyshevGrid | None = None) -> NormSet:
    if grid is None:
        grid = solution.grid
    nh = solution.params.n_hat
    two_pi_l = 2.0 * math.pi * solution.params.L
    comps = (solution.v1, solution.v2)
    dcomps = tuple(grid.D1 @ g for g in comps)
    d2comps = tuple(grid.D2 @ g for g in comps)

    l2_sq = sum(_quad(g, grid) for g in comps)
    h1_sq = l2_sq + sum(nh ** 2 * _quad(g, grid) + _quad(dg, grid)
                        for g, dg in zip(comps, dcomps))
    h2_sq = h1_sq + sum(nh ** 4 * _quad(g, grid) + nh ** 2 * _quad(dg, grid)
                        + _quad(d2g, grid)
                        for g, dg, d2g in zip(comps, dcomps, d2comps))
    l2 = math.sqrt(two_pi_l * l2_sq)
    h1 = math.sqrt(two_pi_l * h1_sq)
    h2 = math.sqrt(two_pi_l * h2_sq)
    h53 = h1 ** (1.0 / 3.0) * h2 ** (2.0 / 3.0)

    psi = solution.psi
    d2psi = grid.D2 @ psi
    d4psi = grid.D4 @ psi
    hn4_sq = (_quad(d2psi, grid) + nh ** 4 * _quad(psi, grid)
              + _quad(d4psi, grid) + nh ** 4 * _quad(d2psi, grid)
              + nh ** 8 * _quad(psi, grid))
    return NormSet(l2=l2, h1=h1, h2=h2, h53=h53, hn4=math.sqrt(hn4_sq))


def energy_balances(solution: ModeSolution, f_n: np.ndarray,
                    grid: ChebyshevGrid | None = None) -> dict:
    """Relative residuals of the real and imaginary energy identities.

    Pairing the mode equation with conj(psi) and integrating by parts under
    the wall conditions gives, with U the base shear:

      real:  int nh^4|psi|^2 + 2 nh^2|psi'|^2 + |psi''|^2
             = -Re int f conj(psi) + Im int nh U' psi' conj(psi)
      imag:  (3 phi nh / 4) int (nh^2|psi|^2 + |psi'|^2)(1 - y^2)
             = -Im int f conj(psi) + (3 phi nh / 4) int |psi|^2

    Residuals are normalized by the sum of the participating magnitudes.
    Also reports the weighted-positivity margin
    (1/3) int (nh^2|psi|^2 + |psi'|^2)(1-y^2) - int |psi|^2, whose sign
    indicates whether the imaginary balance pins down int |psi|^2 at this
    period parameter.
    """
    if grid is None:
        grid = solution.grid
    f_n = np.asarray(f_n, dtype=complex)
    psi = solution.psi
    dpsi = grid.D1 @ psi
    d2psi = grid.D2 @ psi
    nh = solution.params.n_hat
    phi = solution.params.phi
    y = grid.points
    w = 1.0 - y * y
    prof = PoiseuilleProfile.on_grid(phi, grid)

    r1 = (nh ** 4 * _quad(psi, grid) + 2.0 * nh ** 2 * _quad(dpsi, grid)
          + _quad(d2psi, grid))
    r2 = -float(np.real(integrate(f_n * np.conj(psi), grid)))
    r3 = float(np.imag(integrate(nh * prof.dU * dpsi * np.conj(psi), grid)))
    real_den = abs(r1) + abs(r2) + abs(r3)
    real_res = abs(r1 - r2 - r3)
    real_rel = real_res / real_den if real_den > 0 else 0.0

    coeff = 0.75 * phi * nh
    t1 = coeff * float(np.real(integrate((nh ** 2 * np.abs(psi) ** 2
                                          + np.abs(dpsi) ** 2) * w, grid)))
    t2 = coeff * _quad(psi, grid)
    t3 = float(np.imag(integrate(f_n * np.conj(psi), grid)))
    imag_den = abs(t1) + abs(t2) + abs(t3)
    imag_res = abs(t1 - t2 + t3)
    imag_rel = imag_res / imag_den if imag_den > 0 else 0.0

    pos_margin = ((1.0 / 3.0) * float(np.real(integrate(
        (nh ** 2 * np.abs(psi) ** 2 + np.abs(dpsi) ** 2) * w, grid)))
        - _quad(psi, grid))
    return {"energy_real_rel": real_rel, "energy_imag_rel": imag_rel,
            "positivity_margin": pos_margin}


@dataclass
class EstimateReport:
    params: ModeParams
    regime: str
    entries: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    norms: NormSet | None = None
    sigma_min: float | None = None
    sigma_min_scaled: float | None = None


def _entry(lhs: float, rhs_core: float) -> dict:
    ratio = lhs / rhs_core if rhs_core > 0 else None
    return {"lhs": lhs, "rhs_core": rhs_core, "ratio": ratio}


def estimate_report(solution: ModeSolution, F1n: np.ndarray, F2n: np.ndarray,
                    grid: ChebyshevGrid | None = None,
                    config: LabConfig = DEFAULTS,
                    include_sigma: bool = True) -> EstimateReport:
    """All estimate entries applicable to the solution's regime."""
    if grid is None:
        grid = solution.grid
    F1n = np.asarray(F1n, dtype=complex)
    F2n = np.asarray(F2n, dtype=complex)
    if F1n.shape != (grid.M + 1,) or F2n.shape != (grid.M + 1,):
        raise ParameterError("force components must be nodal vectors on the grid")
    params = solution.params
    nh = params.n_hat
    phi = params.phi
    regime = params.regime(config)
    psi = solution.psi
    dpsi = grid.D1 @ psi
    d2psi = grid.D2 @ psi
    d3psi = grid.D3 @ psi
    d4psi = grid.D4 @ psi
    y = grid.points
    w = 1.0 - y * y

    force_sq_i = _quad(F1n, grid) + _quad(F2n, grid)
    two_pi_l = 2.0 * math.pi * params.L
    force_l2_omega = math.sqrt(two_pi_l * force_sq_i)
    norms = mode_norms(solution, grid)

    report = EstimateReport(params=params, regime=regime, norms=norms)
    report.entries["force_l2"] = _entry(force_l2_omega, 1.0)

    if params.n != 0:
        f_n = 1j * nh * F2n - grid.D1 @ F1n
        f_sq = _quad(f_n, grid)
        report.residuals = energy_balances(solution, f_n, grid)

        second = (_quad(d2psi, grid) + nh ** 2 * _quad(dpsi, grid)
                  + nh ** 4 * _quad(psi, grid))
        report.entries["second_order_vs_vorticity"] = _entry(second, f_sq)
        weighted4 = (nh ** 4 * _quad(d2psi, grid) + nh ** 6 * _quad(dpsi, grid)
                     + nh ** 8 * _quad(psi, grid))
        report.entries["weighted_fourth_order"] = _entry(weighted4, (1.0 + phi) * f_sq)
        report.entries["fourth_derivative"] = _entry(
            _quad(d4psi, grid), (1.0 + phi * phi) * f_sq)

        if regime == MEDIUM:
            low = _quad(dpsi, grid) + nh ** 2 * _quad(psi, grid)
            report.entries["low_norm_medium"] = _entry(
                low, abs(phi * nh) ** (-4.0 / 3.0) * force_sq_i)
            third = (_quad(d3psi, grid) + nh ** 2 * _quad(d2psi, grid)
                     + nh ** 4 * _quad(dpsi, grid) + nh ** 6 * _quad(psi, grid))
            report.entries["third_order_medium"] = _entry(third, force_sq_i)
        if regime == HIGH:
            weighted = phi * abs(nh) * float(np.real(integrate(
                (np.abs(dpsi) ** 2 + nh ** 2 * np.abs(psi) ** 2) * w, grid)))
            high = weighted + (_quad(d2psi, grid) + nh ** 2 * _quad(dpsi, grid)
                               + nh ** 4 * _quad(psi, grid))
            report.entries["high_frequency"] = _entry(high, nh ** (-2.0) * force_sq_i)

        report.entries["h53_velocity"] = _entry(norms.h53, force_l2_omega)
        report.entries["h2_velocity"] = _entry(
            norms.h2, (1.0 + phi ** 0.25) * force_l2_omega)
        if include_sigma:
            report.sigma_min = smallest_singular_value(operator_matrix(params, grid))
            report.sigma_min_scaled = mass_scaled_sigma_min(params, grid)
    else:
        report.residuals = energy_balances(solution, -(grid.D1 @ F1n), grid)
        f10_l2 = math.sqrt(two_pi_l * _quad(F1n, grid))
        report.entries["zero_mode_h2"] = _entry(norms.h2, f10_l2)

    if regime == SMALL_FLUX:
        report.entries["small_flux_h2"] = _entry(
            norms.h2, (1.0 + phi * phi) * force_l2_omega)
    return report
