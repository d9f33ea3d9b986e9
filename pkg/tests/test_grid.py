import numpy as np
import pytest

from pmcsurf import grid
from pmcsurf.errors import DomainError


def test_fd_weights_reproduce_textbook_stencils():
    np.testing.assert_allclose(grid.fd_weights([-1, 0, 1], 2), [1, -2, 1], atol=1e-14)
    np.testing.assert_allclose(grid.fd_weights([-2, -1, 0, 1, 2], 1), np.array([1, -8, 0, 8, -1]) / 12, atol=1e-14)
    np.testing.assert_allclose(grid.fd_weights([-2, -1, 0, 1, 2], 2),
                               np.array([-1, 16, -30, 16, -1]) / 12, atol=1e-13)


@pytest.mark.parametrize("order", [1, 2])
def test_derivative_matrix_fourth_order(order):
    errors = []
    for n in (64, 128):
        t = np.linspace(-1.0, 1.0, n + 1)
        d = grid.derivative_matrix(n, 2.0 / n, order)
        exact = np.cos(2 * t) * 2 if order == 1 else -4 * np.sin(2 * t)
        errors.append(np.max(np.abs(d @ np.sin(2 * t) - exact)))
    assert errors[1] < 1e-5
    # one-sided end stencils are still pre-asymptotic at these sizes
    assert errors[0] / errors[1] > 10.0


def test_derivative_matrix_too_small():
    with pytest.raises(DomainError):
        grid.derivative_matrix(2, 0.5, 1)


def test_fourier_roundtrip(rng):
    values = rng.normal(size=(5, 16))
    cos_c, sin_c = grid.fourier_split(values)
    np.testing.assert_allclose(grid.fourier_join(cos_c, sin_c, 16), values, atol=1e-13)


def test_theta_derivative_spectral():
    theta = grid.theta_nodes(32)
    f = np.sin(3 * theta) + np.cos(theta)
    np.testing.assert_allclose(grid.theta_derivative(f[None, :], 1)[0], 3 * np.cos(3 * theta) - np.sin(theta),
                               atol=1e-12)
    np.testing.assert_allclose(grid.theta_derivative(f[None, :], 2)[0], -9 * np.sin(3 * theta) - np.cos(theta),
                               atol=1e-11)


@pytest.mark.parametrize("n", [16, 18])
def test_t_weights_integrate_polynomials(n):
    t = np.linspace(0.0, 2.0, n + 1)
    w = grid.t_weights(n, 2.0 / n)
    assert w @ t ** 3 == pytest.approx(4.0, rel=1e-13)
    assert w @ np.exp(t) == pytest.approx(np.e ** 2 - 1, rel=1e-5)


def test_grid_function_half_and_back():
    g = grid.GridFunction.sample(lambda t, h: (1 - t * t) * np.cos(h), 1.0, 16, 8)
    back = grid.GridFunction.from_half(g.half(), 1.0)
    np.testing.assert_allclose(back.values, g.values, atol=1e-15)
    assert g.sup() == pytest.approx(1.0)


def test_sample_enforces_flags():
    g = grid.GridFunction.sample(lambda t, h: 1.0 + t + 0 * h, 1.0, 16, 8)
    assert np.all(g.values[0] == 0.0) and np.all(g.values[-1] == 0.0)
    np.testing.assert_allclose(g.values, g.values[::-1])


def test_validate_rejects_violated_flags():
    vals = np.ones((17, 8))
    with pytest.raises(DomainError):
        grid.GridFunction(vals, 1.0).validate()
    vals[0] = vals[-1] = 0.0
    vals[3] = 2.0
    with pytest.raises(DomainError):
        grid.GridFunction(vals, 1.0).validate()
