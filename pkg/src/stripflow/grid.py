"""Chebyshev collocation infrastructure on [-1, 1].

Gauss-Lobatto nodes, Clenshaw-Curtis quadrature, dense differentiation
matrices up to fourth order, barycentric interpolation and spectral
antiderivatives. Grids are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .errors import ParameterError

MIN_ORDER = 4
MAX_ORDER = 1024


@dataclass(frozen=True)
class ChebyshevGrid:
    """Collocation data for order M (M+1 nodes, descending from 1 to -1)."""

    M: int
    points: np.ndarray
    weights: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    D3: np.ndarray
    D4: np.ndarray
    bary: np.ndarray

    def __post_init__(self):
        for arr in (self.points, self.weights, self.D1, self.D2,
                    self.D3, self.D4, self.bary):
            arr.setflags(write=False)


def _diff_matrix(points: np.ndarray) -> np.ndarray:
    m = len(points) - 1
    c = np.ones(m + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(m + 1)
    diff = points[:, None] - points[None, :] + np.eye(m + 1)
    d = np.outer(c, 1.0 / c) / diff
    # negative-sum trick keeps the matrix exact on constants
    d -= np.diag(d.sum(axis=1))
    return d


def _clenshaw_curtis_weights(m: int) -> np.ndarray:
    theta = np.pi * np.arange(m + 1) / m
    w = np.zeros(m + 1)
    ii = np.arange(1, m)
    v = np.ones(m - 1)
    if m % 2 == 0:
        w[0] = w[m] = 1.0 / (m * m - 1)
        for k in range(1, m // 2):
            v -= 2.0 * np.cos(2.0 * k * theta[ii]) / (4.0 * k * k - 1)
        v -= np.cos(m * theta[ii]) / (m * m - 1)
    else:
        w[0] = w[m] = 1.0 / (m * m)
        for k in range(1, (m - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta[ii]) / (4.0 * k * k - 1)
    w[ii] = 2.0 * v / m
    return w


def build_grid(M: int) -> ChebyshevGrid:
    """Gauss-Lobatto grid of order M with quadrature and derivatives."""
    if not isinstance(M, (int, np.integer)) or isinstance(M, bool):
        raise ParameterError(f"grid order must be an integer, got {M!r}")
    if M < MIN_ORDER or M > MAX_ORDER:
        raise ParameterError(f"grid order must lie in [{MIN_ORDER}, {MAX_ORDER}], got {M}")
    points = np.cos(np.pi * np.arange(M + 1) / M)
    # exact antisymmetry (y_k = -y_{M-k}) so parity splits are lossless
    points = 0.5 * (points - points[::-1])
    points[0] = 1.0
    points[M] = -1.0
    if M % 2 == 0:
        points[M // 2] = 0.0
    d1 = _diff_matrix(points)
    d2 = d1 @ d1
    d3 = d1 @ d2
    d4 = d2 @ d2
    bary = (-1.0) ** np.arange(M + 1)
    bary[0] *= 0.5
    bary[M] *= 0.5
    return ChebyshevGrid(M=M, points=points, weights=_clenshaw_curtis_weights(M),
                         D1=d1, D2=d2, D3=d3, D4=d4, bary=bary)


def _check_length(values: np.ndarray, grid: ChebyshevGrid) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[-1] != grid.M + 1:
        raise ParameterError(
            f"expected {grid.M + 1} nodal values, got {values.shape[-1]}")
    return values


def integrate(values: np.ndarray, grid: ChebyshevGrid) -> complex:
    """Clenshaw-Curtis integral over [-1, 1]; exact for degree <= M."""
    values = _check_length(values, grid)
    return values @ grid.weights


def interpolate(values: np.ndarray, grid: ChebyshevGrid, y) -> complex | np.ndarray:
    """Barycentric evaluation of the nodal interpolant at y in [-1, 1]."""
    values = _check_length(values, grid)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(np.abs(y_arr) > 1.0):
        raise ParameterError("interpolation point outside [-1, 1]")
    out = np.empty(y_arr.shape, dtype=values.dtype)
    for i, yi in enumerate(y_arr):
        diff = yi - grid.points
        hit = np.flatnonzero(diff == 0.0)
        if hit.size:
            out[i] = values[hit[0]]
            continue
        w = grid.bary / diff
        out[i] = (w @ values) / w.sum()
    return out if np.ndim(y) else out[0]


def chebyshev_coefficients(values: np.ndarray, grid: ChebyshevGrid) -> np.ndarray:
    """Coefficients of the interpolant in the Chebyshev basis T_0..T_M."""
    values = _check_length(values, grid)

    def _real(v):
        c = dct(v, type=1) / grid.M
        c[0] *= 0.5
        c[-1] *= 0.5
        return c

    if np.iscomplexobj(values):
        return _real(values.real) + 1j * _real(values.imag)
    return _real(values.astype(float))


def values_from_coefficients(coeffs: np.ndarray, grid: ChebyshevGrid) -> np.ndarray:
    coeffs = _check_length(coeffs, grid)

    def _real(c):
        b = c.copy()
        b[1:-1] *= 0.5
        return dct(b, type=1)

    if np.iscomplexobj(coeffs):
        return _real(coeffs.real) + 1j * _real(coeffs.imag)
    return _real(coeffs.astype(float))


def cumulative_integral(values: np.ndarray, grid: ChebyshevGrid) -> np.ndarray:
    """Nodal values of y -> integral of f from -1 to y (spectral antiderivative).

    Exact for polynomials of degree < M.
    """
    a = chebyshev_coefficients(values, grid)
    m = grid.M
    ext = np.concatenate([a, [0.0, 0.0]])
    lead = ext.copy()
    lead[0] *= 2.0  # the T_0 term integrates to a full T_1, not half of one
    b = np.zeros(m + 2, dtype=a.dtype)
    k = np.arange(1, m + 2)
    b[1:] = (lead[k - 1] - ext[k + 1]) / (2.0 * k)
    # the T_{M+1} term cannot live on this grid; drop it (exactness then
    # holds for inputs of degree < M) and fix the constant at y=-1
    b = b[: m + 1]
    signs = (-1.0) ** np.arange(m + 1)
    b[0] = 0.0
    b[0] = -(signs @ b)
    out = values_from_coefficients(b, grid)
    # enforce the defining condition exactly at the left endpoint
    out -= out[-1]
    return out


def differentiate(values: np.ndarray, grid: ChebyshevGrid, order: int = 1) -> np.ndarray:
    values = _check_length(values, grid)
    d = {1: grid.D1, 2: grid.D2, 3: grid.D3, 4: grid.D4}.get(order)
    if d is None:
        raise ParameterError(f"derivative order must be 1..4, got {order}")
    return d @ values
