import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from pmcsurf.delaunay import (delaunay_patch, export_mesh, make_param, mean_curvature, mesh_arrays,
                              normal_field, profile_jet, roulette, roulette_ode_oracle)
from pmcsurf.errors import DomainError

A_VALUES = [-0.9, -0.7, -0.5, -0.3, -0.1, 0.2, 0.366, 1.0, 5.0]


@pytest.mark.parametrize("bad", [-1.0, -1.5, 0.0, 1e-8, -1.0 + 1e-8, np.inf, np.nan])
def test_make_param_rejects_outside_admissible_set(bad):
    with pytest.raises(DomainError):
        make_param(bad)


@pytest.mark.parametrize("a", A_VALUES)
def test_profile_extremes(a):
    param = make_param(a)
    r0, r1 = roulette(param, 0.0), roulette(param, param.tau)
    assert r0.x == pytest.approx(1.0 + a, abs=1e-13)
    assert r1.x == pytest.approx(abs(a), abs=1e-13)
    assert r0.dx == pytest.approx(0.0, abs=1e-13)
    assert param.neck == pytest.approx(min(abs(a), 1.0 + a))


@pytest.mark.parametrize("a", [-0.7, -0.3, 0.4, 2.0])
def test_x_from_scipy_dn(a):
    # independent construction of x = scale * dn(scale * t | m)
    param = make_param(a)
    t = np.linspace(0.0, 3.0 * param.tau, 61)
    arg = param.scale * (t - param.tau) if param.shifted else param.scale * t
    ref = param.scale * sp.ellipj(arg, param.m)[2]
    np.testing.assert_allclose(roulette(param, t).x, ref, atol=1e-13)


def test_cylinder_is_constant():
    r = roulette(-0.5, np.linspace(0.0, 6.28, 100))
    np.testing.assert_array_equal(r.x, 0.5)
    np.testing.assert_allclose(r.z, 0.5 * r.t)


@pytest.mark.parametrize("a", A_VALUES)
def test_closed_form_against_ode(a):
    param = make_param(a)
    t = np.linspace(0.0, 4.0 * param.tau, 201)
    exact, oracle = roulette(param, t), roulette_ode_oracle(a, t)
    for name in ("x", "dx", "z", "dz"):
        np.testing.assert_allclose(getattr(exact, name), getattr(oracle, name), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(a=st.sampled_from(A_VALUES), t=st.floats(-20.0, 20.0))
def test_isothermal_identity_and_height_derivative(a, t):
    param = make_param(a)
    r = roulette(param, t)
    assert r.x == pytest.approx(math.hypot(r.dx, r.dz), abs=1e-10)
    assert r.dz == pytest.approx(r.x ** 2 - param.gamma, abs=1e-12)


@pytest.mark.parametrize("a", [-0.3, 0.3])
def test_profile_symmetries(a):
    param = make_param(a)
    t = np.linspace(0.1, 2.0, 9)
    plus, minus = roulette(param, t), roulette(param, -t)
    np.testing.assert_allclose(minus.x, plus.x, atol=1e-13)
    np.testing.assert_allclose(minus.z, -plus.z, atol=1e-13)
    shifted = roulette(param, t + 2.0 * param.tau)
    np.testing.assert_allclose(shifted.x, plus.x, atol=1e-12)


def test_profile_jet_consistent_with_finite_differences():
    param = make_param(0.4)
    t, h = 0.37, 1e-4
    jet = profile_jet(param, t)
    x = lambda s: roulette(param, s).x
    dx = lambda s: roulette(param, s).dx
    assert jet["dx"] == pytest.approx((x(t + h) - x(t - h)) / (2 * h), abs=1e-7)
    assert jet["ddx"] == pytest.approx((dx(t + h) - dx(t - h)) / (2 * h), abs=1e-7)


@pytest.mark.parametrize("a", [-0.8, -0.5, -0.2, 0.3, 3.0])
def test_delaunay_surface_has_unit_mean_curvature(a, rng):
    param = make_param(a)
    t = rng.uniform(-param.tau, param.tau, 50)
    theta = rng.uniform(-np.pi, np.pi, 50)
    curv = mean_curvature(delaunay_patch(param, 0.2, -0.4), t, theta, h=2e-3 * param.tau)
    np.testing.assert_allclose(curv, 1.0, atol=1e-6)


def test_normal_is_unit_and_orthogonal():
    param = make_param(0.3)
    t, theta = np.linspace(-1, 1, 7), np.linspace(-3, 3, 7)
    n = normal_field(param)(t, theta)
    np.testing.assert_allclose(np.linalg.norm(n, axis=-1), 1.0, atol=1e-14)
    patch = delaunay_patch(param)
    h = 1e-6
    xt = (patch(t + h, theta) - patch(t - h, theta)) / (2 * h)
    xh = (patch(t, theta + h) - patch(t, theta - h)) / (2 * h)
    assert np.max(np.abs(np.sum(n * xt, axis=-1))) < 1e-8
    assert np.max(np.abs(np.sum(n * xh, axis=-1))) < 1e-8


def test_sphere_mean_curvature():
    radius = 3.0

    def sphere(u, theta):
        u, theta = np.broadcast_arrays(u, theta)
        return np.stack([radius * np.sin(u) * np.cos(theta), radius * np.sin(u) * np.sin(theta),
                         -radius * np.cos(u)], axis=-1)

    u = np.linspace(0.4, 2.7, 11)
    np.testing.assert_allclose(mean_curvature(sphere, u, 0.3 * u, h=1e-3), 1.0 / radius, atol=1e-6)


def test_mesh_export(tmp_path):
    vertices, faces = mesh_arrays(-0.3, 1.0, n_t=8, n_theta=12)
    assert vertices.shape == (9 * 12, 3)
    assert faces.shape == (2 * 8 * 12, 3)
    assert faces.min() == 0 and faces.max() == vertices.shape[0] - 1
    path = export_mesh(-0.3, 1.0, tmp_path / "s.obj", n_t=8, n_theta=12)
    lines = path.read_text().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 108
    assert sum(line.startswith("f ") for line in lines) == 192
