"""Force construction: per-mode profiles and real-consistent mode families."""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .grid import ChebyshevGrid, integrate


def mode_force(family: str, grid: ChebyshevGrid, amplitude: float = 1.0,
               seed: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(F1, F2) nodal profiles for one mode.

    Families: "constant", "poly:k", "trig:k", "random:s" (seeded smooth
    combination; `seed` offsets s so sweep cells decorrelate).
    """
    y = grid.points
    name, _, arg = family.partition(":")
    if name == "constant":
        return (np.zeros_like(y, dtype=complex),
                amplitude * np.ones_like(y, dtype=complex))
    if name == "poly":
        k = int(arg or 2)
        if k < 0:
            raise ParameterError(f"polynomial degree must be >= 0, got {k}")
        return (amplitude * y.astype(complex) ** k,
                amplitude * (1.0 - y * y).astype(complex) ** max(1, k // 2))
    if name == "trig":
        k = int(arg or 1)
        if k < 1:
            raise ParameterError(f"trig wavenumber must be >= 1, got {k}")
        return (amplitude * np.sin(k * math.pi * y).astype(complex),
                amplitude * np.cos(k * math.pi * y).astype(complex))
    if name == "random":
        base = int(arg or 0) + (0 if seed is None else int(seed))
        rng = np.random.default_rng(base)
        coeffs = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
        basis = np.array([np.ones_like(y), y, y * y, np.sin(math.pi * y),
                          np.cos(math.pi * y), np.sin(2 * math.pi * y)])
        F1, F2 = amplitude * (coeffs @ basis) / 6.0
        return F1, F2
    raise ParameterError(f"unknown force family {family!r}")


def field_force(family: str, N: int, grid: ChebyshevGrid, L: float,
                amplitude: float = 1.0, seed: int = 0, max_mode: int = 3,
                target_l2: float | None = None):
    """Real-consistent per-mode force arrays (2N+1, M+1) for F1 and F2.

    Populates modes 1..max_mode from the family (seed-offset per mode),
    mirrors conjugates onto the negative modes, and adds a real zero-mode
    profile. If target_l2 is given the whole field is rescaled to that
    L2(strip) norm.
    """
    if max_mode > N:
        raise ParameterError(f"max_mode {max_mode} exceeds cutoff N = {N}")
    mp1 = grid.M + 1
    F1 = np.zeros((2 * N + 1, mp1), dtype=complex)
    F2 = np.zeros((2 * N + 1, mp1), dtype=complex)
    for n in range(1, max_mode + 1):
        f1, f2 = mode_force(family, grid, amplitude, seed=seed + 7 * n)
        F1[N + n] = f1
        F2[N + n] = f2
        F1[N - n] = np.conj(f1)
        F2[N - n] = np.conj(f2)
    f1, _ = mode_force(family, grid, amplitude, seed=seed)
    F1[N] = f1.real.astype(complex)
    if target_l2 is not None:
        cur = force_field_l2(F1, F2, grid, L)
        if cur == 0:
            raise ParameterError("cannot rescale a zero force field")
        F1 *= target_l2 / cur
        F2 *= target_l2 / cur
    return F1, F2


def force_field_l2(F1: np.ndarray, F2: np.ndarray, grid: ChebyshevGrid,
                   L: float) -> float:
    total = sum(float(np.real(integrate(np.abs(F1[i]) ** 2 + np.abs(F2[i]) ** 2, grid)))
                for i in range(F1.shape[0]))
    return math.sqrt(2.0 * math.pi * L * total)
