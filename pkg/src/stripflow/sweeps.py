"""Flux/frequency sweeps with fitted growth exponents.

Each cell solves one mode with a family force, evaluates the estimate
report, and the sweep fits log-log slopes of the velocity-to-force ratios
against the flux. Uniformity claims translate to near-zero slopes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS, LabConfig, resolution_order
from .errors import ParameterError
from .forcing import mode_force
from .grid import build_grid
from .modes import ModeParams, solve_mode_clamped
from .norms import estimate_report

_RATIO_KEYS = ("second_order_vs_vorticity", "weighted_fourth_order",
               "fourth_derivative", "low_norm_medium", "third_order_medium",
               "high_frequency", "h53_velocity", "h2_velocity")


@dataclass
class SweepResult:
    rows: list
    slopes: dict
    sigma_ratios: dict
    failures: list
    config: LabConfig = field(repr=False, default=DEFAULTS)


def _cell(task):
    phi, n, L, force_family, grid_policy, seed, config = task
    params = ModeParams(n=n, L=L, phi=phi)
    if grid_policy == "auto":
        M = resolution_order(params.beta)
    else:
        M = int(grid_policy)
    grid = build_grid(M)
    F1, F2 = mode_force(force_family, grid, seed=seed)
    f_n = 1j * params.n_hat * F2 - grid.D1 @ F1
    sol = solve_mode_clamped(params, f_n, grid, config)
    rep = estimate_report(sol, F1, F2, sol.grid, config)
    row = {"phi": phi, "n": n, "L": L, "M": sol.grid.M, "regime": rep.regime,
           "residual": sol.residual,
           "l2": rep.norms.l2, "h1": rep.norms.h1, "h2": rep.norms.h2,
           "h53": rep.norms.h53, "hn4": rep.norms.hn4,
           "energy_real_rel": rep.residuals.get("energy_real_rel"),
           "energy_imag_rel": rep.residuals.get("energy_imag_rel"),
           "positivity_margin": rep.residuals.get("positivity_margin"),
           "sigma_min": rep.sigma_min,
           "sigma_min_scaled": rep.sigma_min_scaled}
    for key in _RATIO_KEYS:
        entry = rep.entries.get(key)
        row[f"ratio_{key}"] = entry["ratio"] if entry else None
    return row


def run_sweep(phi_list, n_list, L: float, force_family: str,
              grid_policy: str | int = "auto", config: LabConfig = DEFAULTS,
              jobs: int = 1, seed: int = 0) -> SweepResult:
    """Solve every (phi, n) cell and fit flux exponents of the ratios.

    Failed cells are recorded and skipped by the fits; exponents use only
    cells at or above the large-flux threshold.
    """
    phi_list = [float(p) for p in phi_list]
    n_list = [int(n) for n in n_list]
    if not phi_list or not n_list:
        raise ParameterError("sweep needs nonempty phi and n lists")
    tasks = [(phi, n, L, force_family, grid_policy, seed + 104729 * k, config)
             for k, (phi, n) in enumerate((p, n) for p in phi_list for n in n_list)]
    rows: list = [None] * len(tasks)
    failures = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, out in enumerate(pool.map(_cell_safe, tasks)):
                rows[i] = out
    else:
        rows = [_cell_safe(t) for t in tasks]
    ok_rows = []
    for task, row in zip(tasks, rows):
        if isinstance(row, dict):
            ok_rows.append(row)
        else:
            failures.append({"phi": task[0], "n": task[1], "error": row})
    slopes = {}
    for key in ("h53_velocity", "h2_velocity"):
        slopes[key] = _fit_slopes(ok_rows, f"ratio_{key}", n_list, config)
    sigma_ratios = _sigma_spread(ok_rows, n_list, config)
    return SweepResult(rows=ok_rows, slopes=slopes, sigma_ratios=sigma_ratios,
                       failures=failures, config=config)


def _cell_safe(task):
    try:
        return _cell(task)
    except Exception as exc:  # cell failures must not sink the sweep
        return f"{type(exc).__name__}: {exc}"


def _fit_slopes(rows, column, n_list, config):
    out = {}
    pooled_x, pooled_y = [], []
    for n in n_list:
        pts = [(r["phi"], r[column]) for r in rows
               if r["n"] == n and r["phi"] >= config.phi0 and r[column]]
        if len(pts) >= 2:
            x = np.log([p for p, _ in pts])
            yv = np.log([v for _, v in pts])
            out[f"n={n}"] = float(np.polyfit(x, yv, 1)[0])
            pooled_x.extend(x)
            pooled_y.extend(yv - yv.mean())
    if len(set(pooled_x)) >= 2:
        out["pooled"] = float(np.polyfit(pooled_x, pooled_y, 1)[0])
    return out


def _sigma_spread(rows, n_list, config):
    """max/min spread of the mass-scaled sigma_min across the flux range."""
    out = {}
    for n in n_list:
        vals = [r["sigma_min_scaled"] for r in rows
                if r["n"] == n and r["phi"] >= config.phi0
                and r["sigma_min_scaled"]]
        if vals:
            out[f"n={n}"] = float(max(vals) / min(vals))
    return out
