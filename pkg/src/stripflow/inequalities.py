"""Randomized margin checks for the elementary integral inequalities.

Inequalities with explicit constants are asserted as hard margins;
inequalities whose constant is only known to exist report the observed
constant (the sup of lhs/rhs over the sample set) so drift between sample
sizes can be monitored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .errors import ParameterError
from .grid import ChebyshevGrid, build_grid, integrate

FREE = "free"
DIRICHLET = "dirichlet"
CLAMPED = "clamped"

TRACE_CONSTANT = math.sqrt(2.5)
HLP_GRADIENT_COEFF = 1.0 / 3.0
HLP_VALUE_COEFF = 92.0


@dataclass
class TestFunction:
    """Sampled profile with analytic derivatives and a wall class."""

    kind: str
    bc_class: str
    grid: ChebyshevGrid
    values: np.ndarray
    derivs: list  # [g', g'', g''', g''''], trailing entries may be missing

    def deriv(self, order: int) -> np.ndarray:
        if order == 0:
            return self.values
        if order > len(self.derivs):
            raise ParameterError(
                f"{self.kind} sample carries derivatives up to order "
                f"{len(self.derivs)}, requested {order}")
        return self.derivs[order - 1]

    def check_bc(self, tol: float = 1e-10):
        scale = max(float(np.abs(self.values).max()), 1e-30)
        if self.bc_class in (DIRICHLET, CLAMPED):
            if max(abs(self.values[0]), abs(self.values[-1])) > tol * scale:
                raise ParameterError(
                    f"sample declared {self.bc_class} but has wall values "
                    f"{self.values[0]:.2e}, {self.values[-1]:.2e}")
        if self.bc_class == CLAMPED and self.derivs:
            d = self.derivs[0]
            if max(abs(d[0]), abs(d[-1])) > tol * max(float(np.abs(d).max()), 1e-30):
                raise ParameterError("sample declared clamped but has wall slope")
        return self


def _poly_tf(coeffs: np.ndarray, bc_class: str, grid: ChebyshevGrid,
             kind: str = "poly") -> TestFunction:
    p = np.polynomial.Polynomial(coeffs)
    if bc_class == DIRICHLET:
        pr, pl = p(1.0), p(-1.0)
        p = p - np.polynomial.Polynomial([0.5 * (pr + pl), 0.5 * (pr - pl)])
    elif bc_class == CLAMPED:
        p = p * np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** 2
    y = grid.points
    derivs = []
    q = p
    for _ in range(4):
        q = q.deriv()
        derivs.append(q(y))
    return TestFunction(kind=kind, bc_class=bc_class, grid=grid,
                        values=p(y), derivs=derivs).check_bc()


def _trig_tf(amps_sin, amps_cos, bc_class: str, grid: ChebyshevGrid) -> TestFunction:
    y = grid.points
    vals = np.zeros_like(y)
    derivs = [np.zeros_like(y) for _ in range(4)]
    for k, a in enumerate(amps_sin, start=1):
        w = k * math.pi
        vals += a * np.sin(w * y)
        pattern = (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin)
        for order, fn in enumerate(pattern, start=1):
            derivs[order - 1] += a * w ** order * fn(w * y)
    for k, a in enumerate(amps_cos, start=1):
        w = k * math.pi
        vals += a * np.cos(w * y)
        pattern = (lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin, np.cos)
        for order, fn in enumerate(pattern, start=1):
            derivs[order - 1] += a * w ** order * fn(w * y)
    tf = TestFunction(kind="trig", bc_class=FREE, grid=grid, values=vals,
                      derivs=derivs)
    if bc_class == DIRICHLET:
        # cos terms break the wall zeros; remove the linear interpolant
        r, l = vals[0], vals[-1]
        a0, a1 = 0.5 * (r + l), 0.5 * (r - l)
        tf.values = vals - (a0 + a1 * grid.points)
        tf.derivs[0] = derivs[0] - a1
        tf.bc_class = DIRICHLET
    elif bc_class == CLAMPED:
        return _product_with_clamp(tf)
    return tf.check_bc()


def _product_with_clamp(tf: TestFunction) -> TestFunction:
    """Multiply a free sample by (1-y^2)^2, keeping derivatives analytic."""
    y = tf.grid.points
    w = (1.0 - y * y) ** 2
    w1 = -4.0 * y * (1.0 - y * y)
    w2 = 12.0 * y * y - 4.0
    w3 = 24.0 * y
    w4 = np.full_like(y, 24.0)
    g = [tf.values] + tf.derivs
    vals = w * g[0]
    d1 = w1 * g[0] + w * g[1]
    d2 = w2 * g[0] + 2 * w1 * g[1] + w * g[2]
    d3 = w3 * g[0] + 3 * w2 * g[1] + 3 * w1 * g[2] + w * g[3]
    d4 = w4 * g[0] + 4 * w3 * g[1] + 6 * w2 * g[2] + 4 * w1 * g[3] + w * g[4]
    return TestFunction(kind=tf.kind + "*clamp", bc_class=CLAMPED, grid=tf.grid,
                        values=vals, derivs=[d1, d2, d3, d4]).check_bc()


def bump_tf(grid: ChebyshevGrid, scale: float = 1.0) -> TestFunction:
    """exp(-1/(1-y^2)) profile; derivatives to second order analytically."""
    y = grid.points
    vals = np.zeros_like(y)
    d1 = np.zeros_like(y)
    d2 = np.zeros_like(y)
    inner = np.abs(y) < 1.0 - 1e-8
    yi = y[inner]
    w = 1.0 - yi * yi
    e = np.exp(-1.0 / w)
    a = -2.0 * yi / w ** 2          # (d/dy)(-1/w)
    da = (-2.0 * w - 8.0 * yi * yi) / w ** 3
    vals[inner] = scale * e
    d1[inner] = scale * e * a
    d2[inner] = scale * e * (a * a + da)
    return TestFunction(kind="bump", bc_class=CLAMPED, grid=grid,
                        values=vals, derivs=[d1, d2]).check_bc()


def random_test_function(rng: np.random.Generator, bc_class: str,
                         grid: ChebyshevGrid) -> TestFunction:
    pick = rng.integers(0, 3)
    if pick == 0:
        deg = int(rng.integers(2, 9))
        return _poly_tf(rng.standard_normal(deg + 1), bc_class, grid,
                        kind="poly-random")
    if pick == 1:
        kmax = int(rng.integers(1, 5))
        return _trig_tf(rng.standard_normal(kmax), rng.standard_normal(kmax),
                        bc_class, grid)
    deg = int(rng.integers(1, 5))
    base = _poly_tf(rng.standard_normal(deg + 1), FREE, grid)
    trig = _trig_tf(rng.standard_normal(2), rng.standard_normal(2), FREE, grid)
    mixed = TestFunction(kind="mixed", bc_class=FREE, grid=grid,
                         values=base.values + trig.values,
                         derivs=[a + b for a, b in zip(base.derivs, trig.derivs)])
    if bc_class == DIRICHLET:
        r, l = mixed.values[0], mixed.values[-1]
        a0, a1 = 0.5 * (r + l), 0.5 * (r - l)
        mixed.values = mixed.values - (a0 + a1 * grid.points)
        mixed.derivs[0] = mixed.derivs[0] - a1
        mixed.bc_class = DIRICHLET
        return mixed.check_bc()
    if bc_class == CLAMPED:
        return _product_with_clamp(mixed)
    return mixed


@dataclass
class MarginReport:
    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else None


def _sq(tf: TestFunction, order: int) -> float:
    return float(np.real(integrate(np.abs(tf.deriv(order)) ** 2, tf.grid)))


def check_poincare(g: TestFunction) -> list[MarginReport]:
    """Wall-zero Poincare chain with constant one."""
    if g.bc_class not in (DIRICHLET, CLAMPED):
        raise ParameterError("poincare checks need wall zeros")
    g.check_bc()
    v0, v1, v2 = _sq(g, 0), _sq(g, 1), _sq(g, 2)
    return [MarginReport("value_by_gradient", v0, v1),
            MarginReport("gradient_by_interpolation", v1, math.sqrt(v2) * math.sqrt(v0)),
            MarginReport("gradient_by_curvature", v1, v2)]


def check_trace(g: TestFunction) -> list[MarginReport]:
    """Wall-slope bound with the explicit constant sqrt(5/2), plus the
    third-derivative interpolation with its observed constant."""
    if g.bc_class not in (DIRICHLET, CLAMPED):
        raise ParameterError("trace check needs wall zeros")
    g.check_bc()
    v1, v2 = _sq(g, 1), _sq(g, 2)
    rhs = TRACE_CONSTANT * v1 ** 0.25 * v2 ** 0.25
    out = [MarginReport("wall_slope_right", abs(g.deriv(1)[0]), rhs),
           MarginReport("wall_slope_left", abs(g.deriv(1)[-1]), rhs)]
    if len(g.derivs) >= 4:
        v3, v4 = _sq(g, 3), _sq(g, 4)
        core = math.sqrt(v4) * math.sqrt(v2) + v2
        out.append(MarginReport("third_derivative_core", v3, core))
    return out


def check_hlp(g: TestFunction) -> MarginReport:
    """Weighted value bound with coefficients 1/3 and 92 (no wall condition)."""
    y = g.grid.points
    w = 1.0 - y * y
    lhs = _sq(g, 0)
    rhs = (HLP_GRADIENT_COEFF * float(np.real(integrate(np.abs(g.deriv(1)) ** 2 * w, g.grid)))
           + HLP_VALUE_COEFF * float(np.real(integrate(np.abs(g.values) ** 2 * w, g.grid))))
    return MarginReport("weighted_value_bound", lhs, rhs)


def check_weighted_interp(g: TestFunction) -> MarginReport:
    """Value bound by weighted mass and gradient; constant observed only."""
    y = g.grid.points
    w = 1.0 - y * y
    wt = float(np.real(integrate(np.abs(g.values) ** 2 * w, g.grid)))
    lhs = _sq(g, 0)
    rhs = wt ** (2.0 / 3.0) * _sq(g, 1) ** (1.0 / 3.0) + wt
    return MarginReport("weighted_interpolation_core", lhs, rhs)


def check_interp(g: TestFunction) -> MarginReport:
    """Value bound by ((1-y^2) g, gradient) interpolation; wall zeros needed."""
    if g.bc_class not in (DIRICHLET, CLAMPED):
        raise ParameterError("interpolation check needs wall zeros")
    g.check_bc()
    y = g.grid.points
    wsq = float(np.real(integrate(np.abs((1.0 - y * y) * g.values) ** 2, g.grid)))
    rhs = math.sqrt(wsq) * math.sqrt(_sq(g, 1))
    return MarginReport("weighted_gradient_core", _sq(g, 0), rhs)


@dataclass
class LabSummary:
    samples: int
    seed: int
    hard_min_margin: float
    hard_worst: dict
    observed_constants: dict
    convergence_gap: float
    rows: list = field(repr=False, default_factory=list)


def run_lab(samples: int, seed: int = 0, grid_order: int = 96,
            collect_rows: bool = False) -> LabSummary:
    """Seeded randomized suite over all checks.

    Margins are evaluated on a grid_order quadrature and re-evaluated at
    twice the order on a subsample; the largest change is reported as the
    self-convergence gap.
    """
    grid = build_grid(grid_order)
    grid2 = build_grid(2 * grid_order)
    rng = np.random.default_rng(seed)
    hard_min = math.inf
    hard_worst = {}
    ratios = {"weighted_interpolation_core": [], "weighted_gradient_core": [],
              "third_derivative_core": []}
    gap = 0.0
    rows = []
    for i in range(samples):
        use2 = i % max(1, samples // 16) == 0
        gd = random_test_function(rng, DIRICHLET, grid)
        gc = random_test_function(rng, CLAMPED, grid)
        gf = random_test_function(rng, FREE, grid)
        hard = (check_poincare(gd) + check_trace(gd)[:2] + [check_hlp(gf)])
        for rep in hard:
            if rep.margin < hard_min:
                hard_min = rep.margin
                hard_worst = {"name": rep.name, "sample": i,
                              "lhs": rep.lhs, "rhs": rep.rhs}
        tr = check_trace(gc)
        if len(tr) > 2 and tr[2].ratio is not None:
            ratios["third_derivative_core"].append(tr[2].ratio)
        wi = check_weighted_interp(gf)
        if wi.ratio is not None and wi.rhs > 1e-14:
            ratios["weighted_interpolation_core"].append(wi.ratio)
        ii = check_interp(gd)
        if ii.ratio is not None and ii.rhs > 1e-14:
            ratios["weighted_gradient_core"].append(ii.ratio)
        if collect_rows:
            rows.append({"sample": i,
                         **{rep.name: rep.margin for rep in hard}})
        if use2:
            seed_i = np.random.default_rng(seed + 7919 + i)
            gd2 = random_test_function(seed_i, DIRICHLET, grid2)
            m1 = check_poincare(gd2)[0].margin
            gd2_coarse = random_test_function(np.random.default_rng(seed + 7919 + i),
                                              DIRICHLET, grid)
            m2 = check_poincare(gd2_coarse)[0].margin
            gap = max(gap, abs(m1 - m2) / max(1.0, abs(m1)))
    observed = {k: float(max(v)) for k, v in ratios.items() if v}
    return LabSummary(samples=samples, seed=seed, hard_min_margin=hard_min,
                      hard_worst=hard_worst, observed_constants=observed,
                      convergence_gap=gap, rows=rows)
