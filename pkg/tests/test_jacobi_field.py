import math

import numpy as np
import pytest
import scipy.special as sp
from scipy.integrate import solve_ivp

from pmcsurf.delaunay import make_param, roulette
from pmcsurf.errors import DomainError
from pmcsurf.grid import GridFunction
from pmcsurf.jacobi_field import (DiscreteJacobi, fundamental_pair, fundamental_pair_derivatives,
                                  jacobi_apply, max_kernel_mode, monodromy, w0_closed, w0_from_derivatives,
                                  w_mode, zero_gap_bound)


def _hill_reference(a, j, t_end):
    """Hill equation with the profile from scipy's dn, initial data of the even solution."""
    param = make_param(a)

    def x_of(t):
        arg = param.scale * (t - param.tau) if param.shifted else param.scale * t
        return param.scale * sp.ellipj(arg, param.m)[2]

    def rhs(t, y):
        x = x_of(t)
        p = x * x + param.gamma ** 2 / (x * x)
        return [y[1], (j * j - 2.0 * p) * y[0]]

    w_init = float(w_mode(param, j, 0.0))
    return solve_ivp(rhs, (0.0, t_end), [w_init, 0.0], rtol=1e-12, atol=1e-13, dense_output=True)


@pytest.mark.parametrize("a,j", [(-0.3, 0), (-0.3, 1), (0.4, 0), (0.4, 1), (2.0, 2)])
def test_even_solution_against_independent_ode(a, j):
    param = make_param(a)
    sol = _hill_reference(a, j, 3.0 * param.tau)
    t = np.linspace(0.0, 3.0 * param.tau, 50)
    np.testing.assert_allclose(w_mode(param, j, t), sol.sol(t)[0], atol=1e-8)


@pytest.mark.parametrize("a", [-0.8, -0.3, 0.2, 1.5])
def test_wronskian_is_constant(a):
    param = make_param(a)
    t = np.linspace(0.0, 2.0 * param.tau, 30)
    for j in (0, 1):
        w, v = fundamental_pair(param, j, t)
        dw, dv = fundamental_pair_derivatives(param, j, t)
        wr = w * dv - dw * v
        np.testing.assert_allclose(wr, wr[0], atol=1e-9)


@pytest.mark.parametrize("a", [-0.7, -0.2, 0.3, 1.0])
def test_two_closed_forms_of_w0_agree(a):
    t = np.linspace(-2.0, 4.0, 40)
    np.testing.assert_allclose(w0_closed(a, t), w0_from_derivatives(a, t), atol=1e-11)


def test_cylinder_closed_form_refused():
    with pytest.raises(DomainError):
        w0_closed(-0.5, 1.0)


def test_cylinder_mode_solutions():
    t = np.linspace(0.0, 6.0, 25)
    np.testing.assert_allclose(fundamental_pair(-0.5, 0, t)[0], -np.cos(t), atol=1e-12)
    np.testing.assert_allclose(w_mode(-0.5, 1, t), 1.0, atol=1e-10)


def test_cylinder_monodromy():
    rep0 = monodromy(-0.5, 0)
    assert rep0.classification == "parabolic"
    rep2 = monodromy(-0.5, 2)
    assert rep2.classification == "hyperbolic"
    assert rep2.trace == pytest.approx(2.0 * math.cosh(2.0 * math.pi * math.sqrt(3.0)), rel=1e-8)
    # entries are ~1e5, so the determinant carries their relative rounding
    assert rep2.determinant == pytest.approx(1.0, rel=1e-6)


def test_zero_gap_bound_and_max_mode():
    assert max_kernel_mode(-0.5) == 0
    assert max_kernel_mode(0.3) == 1
    assert max_kernel_mode(2.0) >= 2
    assert zero_gap_bound(-0.5, 0) == pytest.approx(math.pi)
    assert zero_gap_bound(-0.5, 2) is None


@pytest.mark.parametrize("a", [-0.4, 0.6])
def test_jacobi_apply_matches_analytic_operator(a):
    param = make_param(a)
    T = 1.3
    k = math.pi / (2 * T)
    phi = GridFunction.sample(lambda t, h: np.cos(k * t) * np.cos(2 * h), T, 256, 16)
    out = jacobi_apply(param, phi)
    x = roulette(param, phi.t).x[:, None]
    p = x * x + param.gamma ** 2 / (x * x)
    exact = (-(k * k) - 4.0 + 2.0 * p) * phi.values / (2.0 * x * x)
    np.testing.assert_allclose(out.values, exact, atol=1e-6)


def test_discrete_singular_values_detect_cylinder_kernel():
    sv_generic = DiscreteJacobi(-0.5, 1.0, 128, 16).singular_values()
    sv_degenerate = DiscreteJacobi(-0.5, math.pi / 2, 128, 16).singular_values()
    assert sv_generic.min() > 1e-3
    assert np.sum(sv_degenerate < 1e-6) == 1
