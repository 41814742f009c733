"""Independent oracles used by the test suite.

Everything here deliberately avoids the package's spectral machinery:
second-order finite differences on dense uniform grids for the mode
equations, damped-contour quadrature of the Airy integral representation,
and physical-space products for mode convolutions.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def _fd_mixed_solve(npts, coeff4, coeff2, coeff0, f_vals):
    """FD solve of coeff4*psi'''' + coeff2(y)*psi'' + coeff0(y)*psi = f with
    psi = psi' = 0 at both walls.

    Mixed second-order form in (psi, w = psi''), interleaved unknowns; the
    h^-2 blocks keep the matrix condition far below the direct h^-4 stencil,
    whose solves go rounding-noisy past ~1000 points. Derivative walls enter
    through ghost folding: w_0 = 2(psi_1 - psi_0)/h^2, second order under
    psi'(-1) = 0 (same at the other wall).
    """
    n = npts - 1
    h = 2.0 / n
    size = 2 * npts
    ab = np.zeros((5, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    def add(row, col, val):
        ab[2 + (row - col), col] += val

    def u_psi(i):
        return 2 * i

    def u_w(i):
        return 2 * i + 1

    # wall rows (right-wall pair swapped to stay inside the band)
    add(u_psi(0), u_psi(0), 1.0)
    add(u_w(0), u_w(0), 1.0)
    add(u_w(0), u_psi(1), -2.0 / h ** 2)
    add(u_w(0), u_psi(0), 2.0 / h ** 2)
    add(u_w(n), u_psi(n), 1.0)
    add(u_psi(n), u_w(n), 1.0)
    add(u_psi(n), u_psi(n - 1), -2.0 / h ** 2)
    add(u_psi(n), u_psi(n), 2.0 / h ** 2)

    for i in range(1, n):
        # definition row: w_i - (psi_{i-1} - 2 psi_i + psi_{i+1})/h^2 = 0
        add(u_psi(i), u_w(i), 1.0)
        add(u_psi(i), u_psi(i - 1), -1.0 / h ** 2)
        add(u_psi(i), u_psi(i), 2.0 / h ** 2)
        add(u_psi(i), u_psi(i + 1), -1.0 / h ** 2)
        # momentum row: coeff4 * w'' + coeff2 * w + coeff0 * psi = f
        add(u_w(i), u_w(i - 1), coeff4 / h ** 2)
        add(u_w(i), u_w(i), -2.0 * coeff4 / h ** 2 + coeff2[i])
        add(u_w(i), u_w(i + 1), coeff4 / h ** 2)
        add(u_w(i), u_psi(i), coeff0[i])
        rhs[u_w(i)] = f_vals[i - 1]

    sol = solve_banded((2, 2), ab, rhs)
    return sol[0::2]


def fd_solve_clamped(phi: float, n_hat: float, f_func, npts: int = 2000):
    """Second-order FD solve of the clamped mode problem on uniform points."""
    y = np.linspace(-1.0, 1.0, npts)
    U = 0.75 * phi * (1.0 - y * y)
    coeff2 = 1j * n_hat * U + 2.0 * n_hat ** 2
    coeff0 = (1j * n_hat * 1.5 * phi - 1j * n_hat ** 3 * U
              - n_hat ** 4) * np.ones_like(y)
    psi = _fd_mixed_solve(npts, -1.0, coeff2, coeff0,
                          np.asarray(f_func(y[1:-1]), dtype=complex))
    return y, psi


def fd_solve_biharmonic_clamped(g_func, npts: int = 2000):
    """FD solve of psi'''' = g with clamped walls (zero-mode oracle)."""
    y = np.linspace(-1.0, 1.0, npts)
    zeros = np.zeros_like(y)
    psi = _fd_mixed_solve(npts, 1.0, zeros, zeros,
                          np.asarray(g_func(y[1:-1]), dtype=complex))
    return y, psi


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    """Relative L2 difference of two samplings of the same uniform grid."""
    num = np.sqrt(np.sum(np.abs(a - b) ** 2))
    den = np.sqrt(np.sum(np.abs(b) ** 2))
    return float(num / den)


# ---------------------------------------------------------------------------
# Airy oracle: quadrature of the contour integral representation
#   Ai(z) = (1/(2*pi*i)) int_C exp(t^3/3 - z t) dt,
# equal to (1/pi) int_0^inf cos(t^3/3 + z t) dt on the real axis. The saddle
# form shifts the contour through t = sqrt(z), where the integrand is a pure
# damped Gaussian, so the quadrature never sees cancellation.
# ---------------------------------------------------------------------------

def _gauss(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def airy_oracle(z: complex, npts: int = 3000) -> tuple[complex, complex]:
    """(Ai(z), Ai'(z)) by damped-contour quadrature, |arg z| < pi."""
    z = complex(z)
    if abs(z) < 1.0:
        # wedge contour along the rays at +-pi/3; decay is exp(-r^3/3)
        r, w = _gauss(npts, 0.0, 9.0)
        up = np.exp(1j * np.pi / 3)
        dn = np.exp(-1j * np.pi / 3)
        fu = np.exp(-r ** 3 / 3.0 - z * r * up)
        fd = np.exp(-r ** 3 / 3.0 - z * r * dn)
        ai = (np.sum(w * fu) * up - np.sum(w * fd) * dn) / (2j * np.pi)
        aip = -(np.sum(w * r * fu) * up * up
                - np.sum(w * r * fd) * dn * dn) / (2j * np.pi)
        return ai, aip
    sq = np.sqrt(z)
    zeta = 2.0 / 3.0 * z * sq
    span = np.sqrt(92.0 / sq.real)
    s, w = _gauss(npts, -span, span)
    damp = np.exp(-sq * s ** 2 - 1j * s ** 3 / 3.0)
    pref = np.exp(-zeta) / (2.0 * np.pi)
    ai = pref * np.sum(w * damp)
    aip = -pref * np.sum(w * (sq + 1j * s) * damp)
    return ai, aip


# ---------------------------------------------------------------------------
# Transform oracle for truncated mode convolutions: sample both families on a
# dense periodic x-grid, multiply pointwise, and read coefficients back off
# with a plain DFT.
# ---------------------------------------------------------------------------

def physical_product_modes(a: np.ndarray, b: np.ndarray, N: int,
                           nx: int = 64) -> np.ndarray:
    """Modes of the pointwise product of two centered families, cut to |n| <= N.

    a, b: arrays (2N+1, M+1) of mode coefficients n = -N..N (functions of y).
    """
    modes = np.arange(-N, N + 1)
    xj = np.arange(nx) * 2.0 * np.pi / nx
    phase = np.exp(1j * np.outer(modes, xj))          # (2N+1, nx)
    fa = a.T @ phase                                   # (M+1, nx)
    fb = b.T @ phase
    prod = fa * fb
    out = np.empty_like(a)
    for i, n in enumerate(modes):
        out[i] = prod @ np.exp(-1j * n * xj) / nx
    return out
