import numpy as np
import pytest

from stripflow import ParameterError, build_grid, integrate, interpolate
from stripflow.grid import cumulative_integral, differentiate


@pytest.fixture(scope="module")
def g16():
    return build_grid(16)


@pytest.fixture(scope="module")
def g64():
    return build_grid(64)


def test_nodes_closed_form_m4():
    g = build_grid(4)
    expected = np.array([1.0, np.sqrt(2) / 2, 0.0, -np.sqrt(2) / 2, -1.0])
    np.testing.assert_allclose(g.points, expected, atol=1e-15)


def test_nodes_descending_with_endpoints(g64):
    assert g64.points[0] == 1.0
    assert g64.points[-1] == -1.0
    assert np.all(np.diff(g64.points) < 0)


def test_weights_sum_to_interval_length(g64):
    assert abs(g64.weights.sum() - 2.0) <= 2e-13


def test_integrate_constant(g16):
    ones = np.ones(17)
    assert abs(integrate(ones, g16) - 2.0) < 1e-14


def test_integrate_polynomials(g16):
    y = g16.points
    assert abs(integrate(y ** 2, g16) - 2.0 / 3.0) < 1e-14
    assert abs(integrate(1.0 - y ** 2, g16) - 4.0 / 3.0) < 1e-14


def test_quadrature_exact_on_degree_m(g16):
    y = g16.points
    # odd powers vanish, even power M integrates to 2/(M+1)
    assert abs(integrate(y ** 16, g16) - 2.0 / 17.0) < 1e-14


def test_differentiate_cubic(g16):
    y = g16.points
    np.testing.assert_allclose(differentiate(y ** 3, g16), 3 * y ** 2,
                               rtol=0, atol=1e-12)


def test_polynomial_derivative_exactness(g64):
    y = g64.points
    rng = np.random.default_rng(7)
    coeffs = rng.standard_normal(12)
    p = np.polynomial.Polynomial(coeffs)
    scale = np.abs(p.deriv()( y)).max()
    err = np.abs(g64.D1 @ p(y) - p.deriv()(y)).max()
    assert err <= 1e-10 * max(scale, 1.0)


def test_d2_matches_d1_squared(g64):
    err = np.abs(g64.D2 - g64.D1 @ g64.D1).max()
    assert err <= 1e-10 * np.abs(g64.D2).max()


def test_derivative_of_constant(g64):
    assert np.abs(g64.D1 @ np.ones(65)).max() <= 1e-11


def test_interpolation_reproduces_nodes(g16):
    vals = np.sin(3 * g16.points) + 1j * g16.points ** 2
    got = interpolate(vals, g16, g16.points)
    assert np.array_equal(got, vals)


def test_interpolation_quadratic(g16):
    vals = g16.points ** 2
    assert abs(interpolate(vals, g16, 0.3) - 0.09) < 1e-13


def test_interpolation_spectral_accuracy():
    g = build_grid(32)
    vals = np.sin(np.pi * g.points)
    assert abs(interpolate(vals, g, 0.5) - 1.0) <= 1e-10


def test_interpolation_out_of_range(g16):
    with pytest.raises(ParameterError):
        interpolate(np.ones(17), g16, 1.5)


def test_integrate_length_mismatch(g16):
    with pytest.raises(ParameterError):
        integrate(np.ones(5), g16)


def test_build_grid_rejects_bad_order():
    for bad in (3, 2000, -1):
        with pytest.raises(ParameterError):
            build_grid(bad)


def test_cumulative_integral_polynomial(g16):
    y = g16.points
    got = cumulative_integral(y ** 3, g16)
    np.testing.assert_allclose(got, (y ** 4 - 1.0) / 4.0, rtol=0, atol=1e-14)


def test_cumulative_integral_matches_weights(g16):
    vals = np.exp(g16.points)
    total = cumulative_integral(vals, g16)[0]
    assert abs(total - integrate(vals, g16)) < 1e-13


def test_grid_arrays_locked(g16):
    with pytest.raises(ValueError):
        g16.points[0] = 0.0
