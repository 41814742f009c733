"""Command-line driver with JSON config, CSV/JSON artifacts and a manifest.

Commands: solve, sweep, decompose, nonlinear, uniqueness, inequalities,
spectrum. Flags override config-file values; outputs are deterministic for
a fixed config and seed (floats in shortest round-trip form). Exit codes:
0 success, 2 invalid configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .config import DEFAULTS, resolution_order
from .errors import ParameterError, SolverError
from .forcing import field_force, force_field_l2, mode_force
from .grid import build_grid
from .inequalities import run_lab
from .layers import build_decomposition, reconstruction_error
from .modes import (ModeParams, mass_scaled_sigma_min, operator_matrix,
                    rhs_from_force, smallest_singular_value,
                    solve_mode_clamped, solve_zero_mode)
from .norms import estimate_report
from .picard import FourierField, field_norm_triple, picard_solve, uniqueness_probe
from .sweeps import run_sweep


def _fmt(x):
    if isinstance(x, float):
        return repr(float(x))
    return x


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(k)) for k in header])


def _manifest(outdir: str, args_ns, started: float) -> None:
    cfg = {k: v for k, v in vars(args_ns).items() if k not in ("func", "config")}
    _write_json(os.path.join(outdir, "manifest.json"), {
        "command": args_ns.command,
        "config": cfg,
        "versions": {"stripflow": __version__, "numpy": np.__version__},
        "wall_time_s": time.time() - started,
    })


def _resolve_grid(spec: str, params: ModeParams):
    if spec == "auto":
        return build_grid(resolution_order(params.beta))
    return build_grid(int(spec))


def _positive(name, value):
    if value is None or value <= 0:
        raise ParameterError(f"{name} must be positive, got {value}")
    return value


def cmd_solve(a) -> int:
    _positive("phi", a.phi)
    _positive("L", a.L)
    params = ModeParams(n=a.n, L=a.L, phi=a.phi)
    grid = _resolve_grid(a.M, params)
    F1, F2 = mode_force(a.force, grid, amplitude=a.amplitude, seed=a.seed)
    if a.n == 0:
        sol = solve_zero_mode(F1, grid, L=a.L, phi=a.phi)
    else:
        sol = solve_mode_clamped(params, rhs_from_force(F1, F2, params, grid), grid)
    rep = estimate_report(sol, F1, F2, sol.grid, include_sigma=not a.skip_sigma)
    g = sol.grid
    rows = [{"y": g.points[i],
             "psi_re": sol.psi[i].real, "psi_im": sol.psi[i].imag,
             "v1_re": sol.v1[i].real, "v1_im": sol.v1[i].imag,
             "v2_re": sol.v2[i].real, "v2_im": sol.v2[i].imag,
             "omega_re": sol.omega[i].real, "omega_im": sol.omega[i].imag}
            for i in range(g.M + 1)]
    _write_csv(os.path.join(a.out, "mode.csv"), list(rows[0].keys()), rows)
    _write_json(os.path.join(a.out, "report.json"), {
        "params": {"phi": a.phi, "n": a.n, "L": a.L, "M": g.M},
        "regime": rep.regime,
        "residual": sol.residual,
        "entries": rep.entries,
        "identity_residuals": rep.residuals,
        "norms": asdict(rep.norms),
        "sigma_min": rep.sigma_min,
        "sigma_min_scaled": rep.sigma_min_scaled,
    })
    return 0


def cmd_sweep(a) -> int:
    phis = [float(s) for s in a.phi.split(",")]
    if ".." in a.n:
        lo, hi = a.n.split("..")
        ns = list(range(int(lo), int(hi) + 1))
    else:
        ns = [int(s) for s in a.n.split(",")]
    res = run_sweep(phis, ns, a.L, a.force, grid_policy=a.M, jobs=a.jobs,
                    seed=a.seed)
    if res.rows:
        header = list(res.rows[0].keys())
        _write_csv(os.path.join(a.out, "cells.csv"), header, res.rows)
    _write_json(os.path.join(a.out, "report.json"), {
        "slopes": res.slopes,
        "sigma_min_scaled_spread": res.sigma_ratios,
        "failures": res.failures,
        "cells": len(res.rows),
    })
    return 0 if not res.failures else 3


def cmd_decompose(a) -> int:
    params = ModeParams(n=a.n, L=a.L, phi=a.phi)
    grid = _resolve_grid(a.M, params)
    F1, F2 = mode_force(a.force, grid, amplitude=a.amplitude, seed=a.seed)
    dec = build_decomposition(params, F1, F2, grid)
    direct = solve_mode_clamped(params, rhs_from_force(F1, F2, params, grid), grid)
    err = reconstruction_error(dec, direct)
    _write_json(os.path.join(a.out, "report.json"), {
        "params": {"phi": a.phi, "n": a.n, "L": a.L, "M": grid.M},
        "coefficients": {
            "a_even": [dec.a_even.real, dec.a_even.imag],
            "a_odd": [dec.a_odd.real, dec.a_odd.imag],
            "b_even": [dec.b_even.real, dec.b_even.imag],
            "b_odd": [dec.b_odd.real, dec.b_odd.imag],
        },
        "reconstruction_rel_l2": err,
        "diagnostics": dec.diagnostics,
    })
    rows = [{"y": grid.points[i],
             "assembled_re": dec.assembled[i].real,
             "assembled_im": dec.assembled[i].imag,
             "direct_re": direct.psi[i].real,
             "direct_im": direct.psi[i].imag,
             "slip_re": dec.psi_s[i].real, "slip_im": dec.psi_s[i].imag}
            for i in range(grid.M + 1)]
    _write_csv(os.path.join(a.out, "parts.csv"), list(rows[0].keys()), rows)
    return 0


def cmd_nonlinear(a) -> int:
    params = ModeParams(n=a.N, L=a.L, phi=a.phi)
    grid = _resolve_grid(a.M, params)
    target = a.force_l2 if a.force_l2 is not None else None
    F1, F2 = field_force(a.force, a.N, grid, a.L, amplitude=a.amplitude,
                         seed=a.seed, max_mode=min(3, a.N), target_l2=target)
    st = picard_solve(F1, F2, a.N, a.L, a.phi, grid, tol=a.tol,
                      max_iter=a.max_iter)
    _write_json(os.path.join(a.out, "history.json"), {
        "iterations": st.j,
        "converged": st.converged,
        "residual": st.residual,
        "force_l2": force_field_l2(F1, F2, grid, a.L),
        "history": st.history,
        "increments": st.diffs,
    })
    return 0 if st.converged else 3


def cmd_uniqueness(a) -> int:
    params = ModeParams(n=a.N, L=a.L, phi=a.phi)
    grid = _resolve_grid(a.M, params)
    v_star = FourierField.zero(a.N, a.L, a.phi, grid)
    rep = uniqueness_probe(v_star, a.scale, max_iter=a.max_iter, seed=a.seed)
    _write_json(os.path.join(a.out, "history.json"), {
        "distances": rep.distances,
        "contraction_factor": rep.contraction_factor,
        "converged": rep.converged,
        "config": rep.config_used,
    })
    return 0 if rep.converged else 3


def cmd_inequalities(a) -> int:
    summary = run_lab(a.samples, seed=a.seed, collect_rows=True)
    rows = summary.rows
    if rows:
        _write_csv(os.path.join(a.out, "margins.csv"), list(rows[0].keys()), rows)
    _write_json(os.path.join(a.out, "report.json"), {
        "samples": summary.samples,
        "seed": summary.seed,
        "hard_min_margin": summary.hard_min_margin,
        "hard_worst": summary.hard_worst,
        "observed_constants": summary.observed_constants,
        "convergence_gap": summary.convergence_gap,
    })
    return 0


def cmd_spectrum(a) -> int:
    params = ModeParams(n=a.n, L=a.L, phi=a.phi)
    grid = _resolve_grid(a.M, params)
    sig = smallest_singular_value(operator_matrix(params, grid))
    _write_json(os.path.join(a.out, "report.json"), {
        "params": {"phi": a.phi, "n": a.n, "L": a.L, "M": grid.M},
        "sigma_min": sig,
        "sigma_min_scaled": mass_scaled_sigma_min(params, grid),
    })
    return 0


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", default=None, help="JSON config file; flags override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stripflow",
                                 description="spectral strip-flow laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one mode and report estimates")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    p.add_argument("--force", default="trig:1")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--skip-sigma", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="phi/n sweep with fitted exponents")
    p.add_argument("--phi", required=True, help="comma list, e.g. 1e2,1e3")
    p.add_argument("--n", required=True, help="comma list or a..b range")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    p.add_argument("--force", default="trig:1")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decompose", help="wall-layer decomposition vs direct solve")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    p.add_argument("--force", default="trig:1")
    p.add_argument("--amplitude", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("nonlinear", help="fixed-point iteration for the full problem")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    p.add_argument("--force", default="trig:1")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--force-l2", type=float, default=None,
                   help="rescale the force field to this L2 norm")
    p.add_argument("--tol", type=float, default=DEFAULTS.picard_tol)
    p.add_argument("--max-iter", type=int, default=DEFAULTS.picard_max_iter)
    _add_common(p)
    p.set_defaults(func=cmd_nonlinear)

    p = sub.add_parser("uniqueness", help="perturb the zero state and watch it return")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    p.add_argument("--scale", type=float, required=True,
                   help="H1 size of the vertical perturbation")
    p.add_argument("--max-iter", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_uniqueness)

    p = sub.add_parser("inequalities", help="randomized margin suite")
    p.add_argument("--samples", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_inequalities)

    p = sub.add_parser("spectrum", help="smallest singular value of one mode operator")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--M", default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    started = time.time()
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        # flags explicitly present on the command line win over the file
        given = {a.split("=")[0].lstrip("-").replace("-", "_")
                 for a in (argv if argv is not None else sys.argv[1:])
                 if a.startswith("--")}
        for key, val in file_cfg.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and attr not in given:
                setattr(args, attr, val)
    try:
        os.makedirs(args.out, exist_ok=True)
        code = args.func(args)
        _manifest(args.out, args, started)
        return code
    except ParameterError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
