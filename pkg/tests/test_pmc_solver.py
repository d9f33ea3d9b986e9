import json
import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad, solve_bvp, trapezoid

from pmcsurf.curvature_field import parse_field
from pmcsurf.degeneracy import find_T0
from pmcsurf.delaunay import make_param, roulette
from pmcsurf.errors import DomainError, ObstructionError, SolvabilityError
from pmcsurf.grid import GridFunction
from pmcsurf.jacobi_field import jacobi_apply, w_mode
from pmcsurf.pmc_solver import (explicit_mode0_inverse, find_limit_T0, independent_residual, inverse_norm_probe,
                                jacobi_invert, kernel_projections, limit_w0, ls_constant, mode0_wronskian,
                                normal_graph_residual, obstruction_integral, solve_axisymmetric,
                                solve_lyapunov_schmidt, solve_nondegenerate, solve_with_translation)

# Root of -1 + t tanh t, frozen from an independent brentq run at xtol=1e-15.
LIMIT_T0 = 1.199678640257734


def test_cylinder_inverse_closed_form():
    T = 1.3
    g = GridFunction.sample(lambda t, h: 1.0 + 0.0 * h, T, 256, 16)
    phi = jacobi_invert(-0.5, T, g)
    exact = 0.5 * (1.0 - np.cos(phi.t) / math.cos(T))
    np.testing.assert_allclose(phi.values, np.repeat(exact[:, None], 16, axis=1), atol=1e-8)
    t = np.linspace(0.0, T, 9)
    np.testing.assert_allclose(explicit_mode0_inverse(-0.5, T, lambda s: np.ones_like(s), t),
                               0.5 * (1.0 - np.cos(t) / math.cos(T)), atol=1e-13)


@pytest.mark.parametrize("a,T", [(-0.7, 1.4), (0.4, 0.6)])
def test_mode0_inverse_against_bvp_solver(a, T):
    param = make_param(a)

    def rhs(t, y):
        x = roulette(param, t).x
        p = x * x + param.gamma ** 2 / (x * x)
        return np.vstack([y[1], 2.0 * x * x * np.cos(t) - 2.0 * p * y[0]])

    mesh = np.linspace(-T, T, 401)
    sol = solve_bvp(rhs, lambda ya, yb: np.array([ya[0], yb[0]]), mesh, np.zeros((2, mesh.size)),
                    tol=1e-11, max_nodes=200000)
    assert sol.success
    t = np.linspace(0.0, T, 11)
    np.testing.assert_allclose(explicit_mode0_inverse(param, T, np.cos, t), sol.sol(t)[0], atol=1e-8)


def test_wronskian_at_cylinder_and_away():
    assert mode0_wronskian(-0.5) == pytest.approx(1.0)
    assert mode0_wronskian(0.3) == pytest.approx(1.6)


def test_explicit_inverse_refuses_degenerate_length():
    with pytest.raises(ObstructionError):
        explicit_mode0_inverse(-0.5, math.pi / 2, np.cos, [0.0, 0.5])


@pytest.mark.parametrize("a", [-0.3, 0.8])
def test_apply_invert_roundtrip(a):
    param = make_param(a)
    T = 0.6 * param.tau
    psi = GridFunction.sample(lambda t, h: np.cos(np.pi * t / (2 * T)) * (1 + np.sin(h) + 0.3 * np.cos(3 * h)),
                              T, 256, 32)
    back = jacobi_invert(param, T, jacobi_apply(param, psi))
    np.testing.assert_allclose(back.values, psi.values, atol=1e-7)


def test_solvability_policies_at_degenerate_length():
    param = make_param(0.3)
    T = 0.5 * param.tau
    g = GridFunction.sample(lambda t, h: np.cos(np.pi * t / (2 * T)) * (1 + np.cos(h)), T, 256, 32)
    with pytest.raises(SolvabilityError) as info:
        jacobi_invert(param, T, g)
    assert any(v > 1e-8 for v in info.value.components.values())
    with pytest.warns(RuntimeWarning):
        phi = jacobi_invert(param, T, g, mode_policy="project")
    half = slice(128, 257)
    x = roulette(param, phi.t[half]).x
    w1 = np.asarray(w_mode(param, 1, phi.t[half]))
    cos_part = (phi.values[half] * np.cos(phi.theta)).sum(axis=1)
    proj = trapezoid(x * x * w1 * cos_part, phi.t[half])
    assert abs(proj) < 1e-6


def test_bad_mode_policy():
    g = GridFunction.sample(lambda t, h: 1.0 + 0.0 * h, 1.0, 64, 8)
    with pytest.raises(DomainError):
        jacobi_invert(-0.3, 1.0, g, mode_policy="ignore")


def test_nondegenerate_solution_is_second_order_close_to_linearization():
    param, T = make_param(-0.3), 1.2
    fld = parse_field("1 + eps*(1 + z^2)")
    g = GridFunction.sample(lambda t, h: 1.0 + roulette(param, t).z ** 2 + 0.0 * h, T, 128, 16)
    linear = jacobi_invert(param, T, g)
    gaps = []
    for eps in (1e-2, 5e-3):
        sol = solve_nondegenerate(param, T, fld, eps, n_t=128, n_theta=16)
        gaps.append(np.max(np.abs(sol.phi.values - eps * linear.values)))
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.1)


def test_nondegenerate_residual_and_independent_check():
    sol = solve_nondegenerate(-0.5, 1.0, "1 + eps*cos(z)", 1e-3)
    assert sol.residual_inf < 1e-10
    assert sol.iterations <= 8
    assert independent_residual(sol, "1 + eps*cos(z)") < 1e-8
    res = normal_graph_residual(-0.5, 1.0, parse_field("1 + eps*cos(z)"), 1e-3, sol.phi)
    assert np.max(np.abs(res[1:-1])) < 1e-10


def test_off_axis_field_with_translation():
    sol = solve_nondegenerate(0.5, 0.9, "1 + eps*(x + 0.5*y^2)", 1e-3, p=0.1, q=-0.2, n_t=128, n_theta=32)
    assert independent_residual(sol, "1 + eps*(x + 0.5*y^2)") < 1e-7
    summary = sol.summary()
    assert summary["p"] == 0.1 and summary["mode"] == "nondegenerate"
    json.dumps(summary)


def test_field_must_be_even_in_z():
    with pytest.raises(DomainError):
        solve_nondegenerate(-0.3, 1.0, "1 + eps*z", 1e-3)


def test_axisymmetric_path_agrees_and_rejects_angular_fields():
    axi = solve_axisymmetric(-0.5, 1.0, "1 + eps*cos(z)", 1e-3)
    full = solve_nondegenerate(-0.5, 1.0, "1 + eps*cos(z)", 1e-3)
    np.testing.assert_allclose(axi.phi.values, full.phi.values, atol=1e-12)
    with pytest.raises(DomainError):
        solve_axisymmetric(-0.5, 1.0, "1 + eps*x", 1e-3)


def test_obstruction_for_cylinder_and_refusal():
    assert obstruction_integral(-0.5, 0, "1 + eps") == pytest.approx(-math.pi, abs=1e-6)
    with pytest.raises(ObstructionError) as info:
        solve_nondegenerate(-0.5, find_T0(-0.5, 0), "1 + eps", 1e-3)
    assert info.value.obstruction == pytest.approx(-math.pi, abs=1e-6)


def test_multiplier_constant_by_quadrature():
    param = make_param(0.3)
    T = 0.5 * param.tau
    ref = math.pi * quad(lambda t: roulette(param, t).x ** 2 * float(w_mode(param, 1, t)) ** 2, -T, T,
                         epsabs=1e-13)[0]
    assert ls_constant(param, T) == pytest.approx(ref, rel=1e-9)


def test_lyapunov_schmidt_solution_is_kernel_orthogonal():
    param = make_param(0.3)
    sol = solve_lyapunov_schmidt(param, 0.5 * param.tau, "1 + eps*(x^2 + y^2)", 1e-3, 0.3, -0.2,
                                 n_t=128, n_theta=32)
    assert sol.residual_inf < 1e-9
    assert max(abs(v) for v in kernel_projections(sol)) < 1e-9
    assert sol.lambda1 != 0.0


def test_lyapunov_schmidt_requires_mode_one_kernel():
    with pytest.raises(DomainError):
        solve_lyapunov_schmidt(-0.3, 1.0, "1 + eps*(x^2 + y^2)", 1e-3)


def test_translation_solve_moves_to_critical_point():
    param = make_param(0.3)
    out = solve_with_translation(param, 0.5 * param.tau, "1 + eps*((x - 0.2)^2 + y^2)", 1e-3,
                                 seed=(0.15, 0.05), n_t=128, n_theta=32)
    assert out.p == pytest.approx(0.2, abs=5e-3)
    assert abs(out.q) < 5e-3
    assert abs(out.lambda1) < 1e-9 and abs(out.lambda2) < 1e-9


def test_limit_root_frozen_and_consistent():
    assert find_limit_T0() == pytest.approx(LIMIT_T0, abs=1e-12)
    assert limit_w0(LIMIT_T0) == pytest.approx(0.0, abs=1e-12)


def test_inverse_norm_probe():
    probe = inverse_norm_probe([0.1, 0.01, 0.001], 1.05 * LIMIT_T0)
    assert probe.strictly_increasing and not probe.inconclusive
    with pytest.raises(DomainError):
        inverse_norm_probe([0.1], 0.9 * LIMIT_T0)


def test_mesh_export_of_solution(tmp_path):
    sol = solve_nondegenerate(-0.5, 1.0, "1 + eps*cos(z)", 1e-3, n_t=32, n_theta=16)
    path = sol.export_mesh(tmp_path / "sol.obj")
    text = path.read_text()
    assert text.count("\nv ") == 33 * 16
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sol.phi_callable()(np.array([0.0, 0.5]), np.array([0.0, 1.0]))


def test_zero_eps_gives_zero_profile():
    sol = solve_nondegenerate(-0.3, 1.0, "1 + eps*cos(z)", 0.0, n_t=64, n_theta=8)
    assert sol.phi.sup() == 0.0 and sol.iterations <= 1
    param = make_param(0.3)
    ls = solve_lyapunov_schmidt(param, 0.5 * param.tau, "1 + eps*(x^2 + y^2)", 0.0, 0.2, 0.1, n_t=64, n_theta=8)
    assert ls.phi.sup() < 1e-14 and abs(ls.lambda1) < 1e-14 and abs(ls.lambda2) < 1e-14
    out = solve_with_translation(param, 0.5 * param.tau, "1 + eps*(x^2 + y^2)", 0.0, seed=(0.1, -0.1),
                                 n_t=64, n_theta=8)
    assert (out.p, out.q) == (0.1, -0.1)


def test_halving_eps_halves_profile():
    sups = [solve_nondegenerate(-0.5, 1.0, "1 + eps*cos(z)", eps, n_t=128, n_theta=8).phi.sup()
            for eps in (2e-3, 1e-3)]
    assert sups[0] / sups[1] == pytest.approx(2.0, rel=0.1)


def test_axisymmetric_solve_at_mode_one_degenerate_length():
    param = make_param(0.3)
    sol = solve_axisymmetric(param, 0.5 * param.tau, "1 + eps*z^2", 1e-3, n_t=128)
    assert sol.residual_inf < 1e-10


def test_translation_equivariance():
    param = make_param(0.3)
    T = 0.5 * param.tau
    base = solve_with_translation(param, T, "1 + eps*(x^2 + y^2)", 1e-3, seed=(0.02, 0.01), n_t=128, n_theta=16)
    moved = solve_with_translation(param, T, "1 + eps*((x - 0.1)^2 + y^2)", 1e-3, seed=(0.12, 0.01),
                                   n_t=128, n_theta=16)
    assert moved.p - base.p == pytest.approx(0.1, abs=1e-6)
    assert moved.q == pytest.approx(base.q, abs=1e-6)


def test_obstruction_is_linear_in_field():
    plus = obstruction_integral(-0.3, 1, "1 + eps*(1 + x^2)")
    minus = obstruction_integral(-0.3, 1, "1 - eps*(1 + x^2)")
    assert minus == pytest.approx(-plus, rel=1e-12)


def test_inverse_norm_spikes_at_degenerate_length():
    from pmcsurf.pmc_solver import inverse_norm_sweep
    param = make_param(-0.3)
    root = find_T0(param, 0)
    Ts = root + np.array([-0.2, -0.05, -0.01, 0.01, 0.05, 0.2])
    norms = [n for _, n in inverse_norm_sweep(param, Ts)]
    assert max(norms) in (norms[2], norms[3])
    assert min(norms[2], norms[3]) > 3 * max(norms[0], norms[-1])
