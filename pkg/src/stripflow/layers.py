"""Wall-layer construction: Airy evaluation, layer profiles, matching.

For a nonzero mode at large flux the solution develops wall layers of
width 1/beta, beta = |3*phi*nh/2|^(1/3). Their shape is carried by a
profile G built from the Airy function, and the no-slip conditions are
recovered by a five-part decomposition: a slip solve, two dressed layer
profiles, two irrotational tails, and slip-corrections for each, glued by
a 2x2 matching system at the walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULTS, LabConfig, resolution_order
from .errors import AirySectorError, DegeneracyError, ParameterError, SolverError
from .grid import ChebyshevGrid, build_grid, integrate
from .modes import (MEDIUM, SLIP, ModeFactorization, ModeParams,
                    ModeSolution, rhs_from_force, solve_mode_clamped)

_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
_SERIES_RADIUS = 6.0
_MAX_ABS_Z = 200.0


@dataclass(frozen=True)
class AiryValue:
    z: complex
    ai: complex
    aip: complex


def _series(z: complex) -> tuple[complex, complex]:
    """Maclaurin evaluation of (Ai, Ai'); extended-precision accumulation.

    The two constituent series are individually benign but their difference
    loses ~e^(2|zeta|) digits near the positive real axis, hence the
    clongdouble arithmetic.
    """
    zc = np.clongdouble(z.real) + 1j * np.clongdouble(z.imag)
    z3 = zc * zc * zc
    f_t = np.clongdouble(1.0) + 0j      # term of sum z^{3k}/c_k
    g_t = zc                            # term of sum z^{3k+1}/d_k
    fd_t = 0.5 * zc * zc                # term of f' series (k >= 1)
    gd_t = np.clongdouble(1.0) + 0j     # term of g' series
    f_s, g_s, gd_s = f_t, g_t, gd_t
    fd_s = np.clongdouble(0.0) + 0j
    k = 0
    while k < 120:
        if k >= 1:
            fd_s += fd_t
        k += 1
        f_t *= z3 / ((3 * k - 1) * (3 * k))
        g_t *= z3 / ((3 * k) * (3 * k + 1))
        gd_t *= z3 / ((3 * k - 2) * (3 * k))
        f_s += f_t
        g_s += g_t
        gd_s += gd_t
        if k >= 2:
            fd_t *= z3 / ((3 * k - 3) * (3 * k - 1))
        if (abs(f_t) <= 1e-22 * abs(f_s) and abs(g_t) <= 1e-22 * (abs(g_s) + 1e-300)
                and abs(gd_t) <= 1e-22 * abs(gd_s)):
            break
    fd_s += fd_t
    ai = _AI0 * f_s + _AIP0 * g_s
    aip = _AI0 * fd_s + _AIP0 * gd_s
    return complex(ai), complex(aip)


def _asymptotic(z: complex) -> tuple[complex, complex]:
    """Large-|z| expansion, valid for |arg z| <= 2*pi/3."""
    sq = np.sqrt(complex(z))
    zeta = 2.0 / 3.0 * z * sq
    if -zeta.real > 700.0:
        raise AirySectorError(
            f"Airy value overflows at z={z:.6g} (growing sector, Re zeta = "
            f"{zeta.real:.3g})", z=z)
    u = 1.0
    v = 1.0
    su, sv = 1.0 + 0j, 1.0 + 0j
    term_u, term_v = 1.0 + 0j, 1.0 + 0j
    prev = abs(term_u)
    k = 0
    while k < 60:
        k += 1
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = u * (6 * k + 1) / (1.0 - 6 * k)
        term_u = (-1.0) ** k * u / zeta ** k
        term_v = (-1.0) ** k * v / zeta ** k
        if abs(term_u) >= prev:    # divergent tail reached
            break
        prev = abs(term_u)
        su += term_u
        sv += term_v
        if abs(term_u) <= 1e-18 * abs(su):
            break
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    ai = pref / z ** 0.25 * su
    aip = -pref * z ** 0.25 * sv
    return complex(ai), complex(aip)


def airy(z: complex) -> AiryValue:
    """Airy Ai and Ai' on the cut plane, |z| <= 200.

    Maclaurin series up to |z| = 6, a single asymptotic expansion for
    |arg z| <= 2*pi/3 beyond, and the three-fold rotation identity for the
    remaining left sectors. Accuracy is ~1e-10 on the layer rays used here;
    near the positive real axis inside 5 < |z| < 8 it degrades to a few
    1e-9 (cancellation floor of double precision).
    """
    z = complex(z)
    if abs(z) > _MAX_ABS_Z:
        raise ParameterError(f"|z| = {abs(z):.3g} outside supported disk 200")
    if abs(z) <= _SERIES_RADIUS:
        ai, aip = _series(z)
        return AiryValue(z=z, ai=ai, aip=aip)
    if abs(np.angle(z)) <= 2.0 * np.pi / 3.0:
        ai, aip = _asymptotic(z)
        return AiryValue(z=z, ai=ai, aip=aip)
    # left sectors via Ai(z) = -[w*Ai(w z) + conj(w)*Ai(conj(w) z)], w = e^{2 pi i/3}
    w = np.exp(2j * np.pi / 3.0)
    a_p, ap_p = _asymptotic(w * z) if abs(w * z) > _SERIES_RADIUS else _series(w * z)
    a_m, ap_m = _asymptotic(z / w) if abs(z / w) > _SERIES_RADIUS else _series(z / w)
    ai = -(w * a_p + np.conj(w) * a_m)
    aip = -(w * w * ap_p + np.conj(w * w) * ap_m)
    return AiryValue(z=z, ai=ai, aip=aip)


def airy_many(zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals = [airy(z) for z in np.asarray(zs, dtype=complex).ravel()]
    ai = np.array([v.ai for v in vals]).reshape(np.shape(zs))
    aip = np.array([v.aip for v in vals]).reshape(np.shape(zs))
    return ai, aip


# ---------------------------------------------------------------------------
# smooth cutoffs
# ---------------------------------------------------------------------------

def _smoothstep(t: np.ndarray):
    """C-infinity step on [0,1] from exp(-1/t), with first two derivatives."""
    t = np.asarray(t, dtype=float)
    s = np.zeros_like(t)
    s1 = np.zeros_like(t)
    s2 = np.zeros_like(t)
    s[t >= 1.0] = 1.0
    inner = (t > 1e-2) & (t < 1.0 - 1e-2)
    ti = t[inner]
    u = np.exp(-1.0 / ti)
    v = np.exp(-1.0 / (1.0 - ti))
    du = u / ti ** 2
    dv = -v / (1.0 - ti) ** 2
    d2u = u * (1.0 / ti ** 4 - 2.0 / ti ** 3)
    d2v = v * (1.0 / (1.0 - ti) ** 4 - 2.0 / (1.0 - ti) ** 3)
    den = u + v
    num = du * v - u * dv
    s[inner] = u / den
    s1[inner] = num / den ** 2
    s2[inner] = (d2u * v - u * d2v) / den ** 2 - 2.0 * num * (du + dv) / den ** 3
    return s, s1, s2


def cutoff_plus(y: np.ndarray):
    """chi+ with chi+=1 for y >= 1/2 and 0 for y <= 1/4; returns (chi, chi', chi'')."""
    s, s1, s2 = _smoothstep((np.asarray(y, dtype=float) - 0.25) * 4.0)
    return s, 4.0 * s1, 16.0 * s2


def cutoff_minus(y: np.ndarray):
    s, s1, s2 = cutoff_plus(-np.asarray(y, dtype=float))
    return s, -s1, s2


# ---------------------------------------------------------------------------
# layer profile
# ---------------------------------------------------------------------------

@dataclass
class LayerProfile:
    """Decaying wall-layer shape G on [0, rho_max] plus derivatives.

    G solves G'' - (nh/beta)^2 G = Gt where Gt is the rotated Airy kernel;
    the normalization C0 caps the dressed layer value at the wall to 1.
    """

    params: ModeParams
    rho_max: float
    rho: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    d2G: np.ndarray
    d3G: np.ndarray
    Gt: np.ndarray
    C0: complex
    envelope: float
    residual: float
    _tgrid: ChebyshevGrid = field(repr=False, default=None)

    def _interp(self, values: np.ndarray, rho_query: np.ndarray) -> np.ndarray:
        rho_query = np.asarray(rho_query, dtype=float)
        t = 1.0 - 2.0 * np.clip(rho_query, 0.0, self.rho_max) / self.rho_max
        out = np.empty(rho_query.shape, dtype=complex)
        flat_t = np.atleast_1d(t)
        flat = np.atleast_1d(rho_query)
        res = np.empty(flat.shape, dtype=complex)
        for i, (ti, ri) in enumerate(zip(flat_t.ravel(), flat.ravel())):
            if ri > self.rho_max:
                res[i] = 0.0
                continue
            diff = ti - self._tgrid.points
            hit = np.flatnonzero(diff == 0.0)
            if hit.size:
                res[i] = values[hit[0]]
                continue
            w = self._tgrid.bary / diff
            res[i] = (w @ values) / w.sum()
        out[...] = res.reshape(rho_query.shape)
        return out

    def G_at(self, rho_query) -> np.ndarray:
        return self._interp(self.G, rho_query)

    def dG_at(self, rho_query) -> np.ndarray:
        return self._interp(self.dG, rho_query)


def airy_shift(params: ModeParams) -> tuple[complex, complex]:
    """Rotation C and argument shift a of the layer kernel Ai(C*(rho + a))."""
    rot = np.exp(1j * np.pi / 6.0) if params.n > 0 else np.exp(-1j * np.pi / 6.0)
    shift = 2.0 * params.beta * params.n_hat / (3j * params.phi)
    return rot, shift


def build_layer_profile(params: ModeParams, rho_max: float | None = None,
                        layer_grid_size: int | None = None,
                        config: LabConfig = DEFAULTS) -> LayerProfile:
    """Solve for the decaying layer shape G and its derivatives.

    The decaying closure imposes G = 0 and G' + (|nh|/beta) G = 0 at
    rho_max, the discrete version of selecting the solution that decays at
    infinity; both are exponentially accurate once rho_max is past the
    kernel's support.
    """
    if params.n == 0 or params.phi <= 0:
        raise ParameterError("layer profiles need n != 0 and phi > 0")
    rho_max = config.rho_max if rho_max is None else float(rho_max)
    if rho_max < 30.0:
        raise ParameterError(f"rho_max must be at least 30, got {rho_max}")
    size = config.layer_grid_order if layer_grid_size is None else int(layer_grid_size)
    tg = build_grid(size)
    rho = rho_max * (1.0 - tg.points) / 2.0
    d1 = -(2.0 / rho_max) * tg.D1
    d2 = (2.0 / rho_max) ** 2 * tg.D2

    beta = params.beta
    lam = abs(params.n_hat) / beta
    rot, shift = airy_shift(params)
    Gt, dGt_raw = airy_many(rot * (rho + shift))
    dGt = rot * dGt_raw

    n_nodes = size + 1
    A = d2 - lam * lam * np.eye(n_nodes)
    b = Gt.astype(complex).copy()
    A[-1] = 0.0
    A[-1, -1] = 1.0
    b[-1] = 0.0
    A[-2] = d1[-1]
    A[-2, -1] += lam
    b[-2] = 0.0
    scale = 1.0 / np.abs(A).max(axis=1)
    lu = scipy.linalg.lu_factor(A * scale[:, None])
    G = scipy.linalg.lu_solve(lu, b * scale)
    G = G + scipy.linalg.lu_solve(lu, (b - A @ G) * scale)

    interior = slice(0, size - 1)
    resid = (np.linalg.norm((d2 @ G - lam * lam * G - Gt)[interior])
             / np.linalg.norm(Gt[interior]))
    if resid > 1e-8:
        raise SolverError(f"layer ODE residual {resid:.2e} above 1e-8", residual=resid)

    gmax = np.abs(G).max()
    tail = np.abs(G[rho >= 0.9 * rho_max]).max()
    # the true tail is far below double precision; anything above the
    # solve's ~1e-7 noise floor means the kernel support was truncated
    if tail > 1e-6 * gmax:
        raise SolverError(
            f"layer profile has not decayed by rho = {rho_max} "
            f"(tail/max = {tail / gmax:.2e}); increase rho_max")

    dG = d1 @ G
    d2G = Gt + lam * lam * G
    d3G = dGt + lam * lam * dG
    g0 = G[0]
    c0 = 1.0 / g0 if abs(g0) >= 1.0 else 1.0 + 0j
    decay = rho >= config.layer_decay_radius
    envelope = float(np.max(np.exp(rho[decay]) * np.abs(G[decay])))
    return LayerProfile(params=params, rho_max=rho_max, rho=rho, G=G, dG=dG,
                        d2G=d2G, d3G=d3G, Gt=Gt, C0=complex(c0),
                        envelope=envelope, residual=float(resid), _tgrid=tg)


# ---------------------------------------------------------------------------
# contour bound
# ---------------------------------------------------------------------------

def contour_integral_K(mu: complex, tiny: float = 1e-14) -> float:
    """|int_ell exp(-mu z) Ai(z + mu^2) dz| along the ray arg z = pi/6.

    mu must sit on the conjugate ray (arg mu = -pi/6, |mu| <= 1) or be 0,
    which makes exp(-mu z) a real decay along the contour.
    """
    mu = complex(mu)
    if abs(mu) > 1.0:
        raise ParameterError(f"|mu| must be <= 1, got {abs(mu):.3g}")
    if abs(mu) > 0 and abs(np.angle(mu) + np.pi / 6.0) > 1e-9:
        raise ParameterError("mu must lie on the ray arg mu = -pi/6")
    direction = np.exp(1j * np.pi / 6.0)
    nodes, weights = np.polynomial.legendre.leggauss(32)
    total = 0.0 + 0j
    r_lo = 0.0
    while r_lo < 80.0:
        r_hi = r_lo + 4.0
        r = 0.5 * (r_hi - r_lo) * nodes + 0.5 * (r_hi + r_lo)
        vals = np.array([airy(ri * direction + mu * mu).ai for ri in r])
        panel = np.sum(weights * np.exp(-abs(mu) * r) * vals) * 0.5 * (r_hi - r_lo)
        total += panel
        edge = abs(airy(r_hi * direction + mu * mu).ai) * math.exp(-abs(mu) * r_hi)
        if abs(panel) < tiny * max(1.0, abs(total)) and edge < tiny:
            return float(abs(direction * total))
        r_lo = r_hi
    raise SolverError("contour integral tail did not converge by r = 80")


# ---------------------------------------------------------------------------
# five-part decomposition
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    params: ModeParams
    grid: ChebyshevGrid
    profile: LayerProfile
    psi_s: np.ndarray
    psi_bl_even: np.ndarray
    psi_bl_odd: np.ndarray
    psi_corr_even: np.ndarray
    psi_corr_odd: np.ndarray
    psi_p_even: np.ndarray
    psi_p_odd: np.ndarray
    psi_r_even: np.ndarray
    psi_r_odd: np.ndarray
    a_even: complex
    a_odd: complex
    b_even: complex
    b_odd: complex
    assembled: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _parity_split(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rev = f[::-1]
    return 0.5 * (f + rev), 0.5 * (f - rev)


def build_decomposition(params: ModeParams, F1n: np.ndarray, F2n: np.ndarray,
                        grid: ChebyshevGrid,
                        config: LabConfig = DEFAULTS) -> Decomposition:
    """Five-part wall-layer decomposition of the clamped mode solution.

    The force's vorticity is split by parity; for each parity the slip
    solution, the dressed layer profile, its slip correction, the
    irrotational tail and the tail's slip correction are combined with
    coefficients from the 2x2 wall-matching system, recovering no-slip
    walls without ever solving the clamped problem.
    """
    regime = params.regime(config)
    if regime != MEDIUM:
        raise ParameterError(
            f"decomposition applies to the intermediate-frequency regime at "
            f"large flux; got regime {regime} (n={params.n}, phi={params.phi})")
    # small-beta layers carry a bulk-scale oscillatory tail: the generic
    # 6*beta rule under-resolves the matched construction below M = 128
    min_m = max(resolution_order(params.beta), 128)
    if grid.M < min_m:
        raise ParameterError(
            f"decomposition at phi={params.phi}, n={params.n} needs grid "
            f"order >= {min_m}, got {grid.M}")
    nh = params.n_hat
    phi = params.phi
    beta = params.beta
    y = grid.points

    f = rhs_from_force(F1n, F2n, params, grid)
    f_even, f_odd = _parity_split(f)

    fac = ModeFactorization(params, grid, SLIP)

    def slip_solve(rhs: np.ndarray) -> np.ndarray:
        sol, resid = fac.solve(rhs)
        if resid > config.residual_tol:
            raise SolverError(f"slip solve residual {resid:.2e}", residual=resid)
        return sol

    profile = build_layer_profile(params, config=config)
    c0 = profile.C0

    rho_p = beta * (1.0 - y)
    rho_m = beta * (1.0 + y)
    rot, shift = airy_shift(params)
    # evaluate the kernel only inside the truncation radius; beyond it the
    # profile is identically zero and the argument may leave the supported disk
    gt_p = np.zeros(grid.M + 1, dtype=complex)
    gt_m = np.zeros(grid.M + 1, dtype=complex)
    near_p = rho_p <= profile.rho_max
    near_m = rho_m <= profile.rho_max
    gt_p[near_p], _ = airy_many(rot * (rho_p[near_p] + shift))
    gt_m[near_m], _ = airy_many(rot * (rho_m[near_m] + shift))

    psi_plus = c0 * profile.G_at(rho_p)
    dpsi_plus = -beta * c0 * profile.dG_at(rho_p)
    h_psi_plus = c0 * beta * beta * gt_p          # exact: H psi+ = C0 beta^2 Gt
    psi_minus = c0 * profile.G_at(rho_m)
    dpsi_minus = beta * c0 * profile.dG_at(rho_m)
    h_psi_minus = c0 * beta * beta * gt_m

    cp, dcp, d2cp = cutoff_plus(y)
    cm, dcm, d2cm = cutoff_minus(y)

    plus_part = cp * psi_plus
    minus_part = cm * psi_minus
    w_plus = cp * h_psi_plus + 2.0 * dcp * dpsi_plus + d2cp * psi_plus
    w_minus = cm * h_psi_minus + 2.0 * dcm * dpsi_minus + d2cm * psi_minus

    d2u = -1.5 * phi
    adv = 1j * 0.75 * phi * nh * (1.0 - y * y)

    def corrector_rhs(psi_bl: np.ndarray, w: np.ndarray) -> np.ndarray:
        # Q = i*nh*U''*psi_bl - A(H psi_bl), outer Helmholtz applied spectrally
        a_of_w = adv * w - (grid.D2 @ w - nh * nh * w)
        return 1j * nh * d2u * psi_bl - a_of_w

    psi_bl = {"even": plus_part + minus_part, "odd": plus_part - minus_part}
    w_bl = {"even": w_plus + w_minus, "odd": w_plus - w_minus}
    psi_corr = {p: slip_solve(corrector_rhs(psi_bl[p], w_bl[p])) for p in psi_bl}

    psi_p = {"even": np.exp(nh * y) + np.exp(-nh * y),
             "odd": np.exp(nh * y) - np.exp(-nh * y)}
    psi_r = {p: slip_solve(1j * nh * d2u * psi_p[p]) for p in psi_p}

    psi_s = {"even": slip_solve(f_even), "odd": slip_solve(f_odd)}

    bl_wall = c0 * profile.G[0]
    dbl_wall = -beta * c0 * profile.dG[0]
    wall_p = {"even": 2.0 * math.cosh(nh), "odd": 2.0 * math.sinh(nh)}
    dwall_p = {"even": 2.0 * nh * math.sinh(nh), "odd": 2.0 * nh * math.cosh(nh)}

    coeff_a, coeff_b = {}, {}
    for p in ("even", "odd"):
        dpsis1 = (grid.D1[0] @ psi_s[p])
        dcorr1 = (grid.D1[0] @ psi_corr[p])
        dr1 = (grid.D1[0] @ psi_r[p])
        denom = (bl_wall * (dwall_p[p] + dr1) / wall_p[p] - dbl_wall - dcorr1)
        if abs(denom) < 1e-12:
            raise DegeneracyError(
                f"matching denominator {abs(denom):.3e} is numerically singular "
                f"({p} parity); parameters breach the layer regime")
        coeff_b[p] = dpsis1 / denom
        coeff_a[p] = -bl_wall / wall_p[p] * coeff_b[p]

    assembled = (psi_s["even"] + psi_s["odd"]
                 + coeff_b["even"] * (psi_bl["even"] + psi_corr["even"])
                 + coeff_a["even"] * (psi_p["even"] + psi_r["even"])
                 + coeff_b["odd"] * (psi_bl["odd"] + psi_corr["odd"])
                 + coeff_a["odd"] * (psi_p["odd"] + psi_r["odd"]))

    scale = np.abs(assembled).max()
    d_assembled = grid.D1 @ assembled
    force_l2 = math.sqrt(float(np.real(integrate(np.abs(F1n) ** 2 + np.abs(F2n) ** 2, grid))))
    slip_wall = abs(grid.D1[0] @ (psi_s["even"] + psi_s["odd"]))
    diagnostics = {
        "bc_value": float(max(abs(assembled[0]), abs(assembled[-1]))),
        "bc_derivative": float(max(abs(d_assembled[0]), abs(d_assembled[-1]))),
        "scale": float(scale),
        "slip_wall_derivative": float(slip_wall),
        "slip_wall_constant": float(slip_wall * math.sqrt(abs(phi * nh)) / force_l2)
        if force_l2 > 0 else None,
        "b_bound_constant": float(
            (abs(coeff_b["even"]) + abs(coeff_b["odd"])) * abs(phi * nh) ** (5.0 / 6.0)
            / force_l2) if force_l2 > 0 else None,
        "layer_envelope": profile.envelope,
    }
    return Decomposition(params=params, grid=grid, profile=profile,
                         psi_s=psi_s["even"] + psi_s["odd"],
                         psi_bl_even=psi_bl["even"], psi_bl_odd=psi_bl["odd"],
                         psi_corr_even=psi_corr["even"], psi_corr_odd=psi_corr["odd"],
                         psi_p_even=psi_p["even"], psi_p_odd=psi_p["odd"],
                         psi_r_even=psi_r["even"], psi_r_odd=psi_r["odd"],
                         a_even=coeff_a["even"], a_odd=coeff_a["odd"],
                         b_even=coeff_b["even"], b_odd=coeff_b["odd"],
                         assembled=assembled, diagnostics=diagnostics)


def reconstruction_error(dec: Decomposition, direct: ModeSolution) -> float:
    """Relative L2 gap between the assembled decomposition and a direct solve."""
    g = dec.grid
    num = math.sqrt(float(np.real(integrate(np.abs(dec.assembled - direct.psi) ** 2, g))))
    den = math.sqrt(float(np.real(integrate(np.abs(direct.psi) ** 2, g))))
    return num / den
