import math

import numpy as np
import pytest

from pmcsurf.curvature_field import parse_field
from pmcsurf.delaunay import delaunay_patch, make_param
from pmcsurf.errors import DomainError
from pmcsurf.melnikov import (check_symmetric_patch, enclosed_volume_monte_carlo, find_critical_points,
                              melnikov_eval, melnikov_grad, melnikov_hessian, melnikov_landscape,
                              melnikov_value, translated_patch, volume_functional, wente_sides)

RADIAL = parse_field("1 + eps*(x^2 + y^2)")


def _cylinder_radial(T, p, q):
    # -int (x^2 + y^2) over a disk of radius 1/2 centred at (p, q), height T
    return -T * (math.pi / 32 + math.pi / 4 * (p * p + q * q))


@pytest.mark.parametrize("p,q", [(0.0, 0.0), (0.2, -0.1), (-0.5, 0.4)])
def test_cylinder_value_closed_form(p, q):
    assert melnikov_value(-0.5, 1.3, RADIAL, p, q) == pytest.approx(_cylinder_radial(1.3, p, q), rel=1e-12)


def test_cylinder_gradient_and_hessian_closed_form():
    T, p, q = 1.3, 0.2, -0.1
    grad = melnikov_grad(-0.5, T, RADIAL, p, q)
    np.testing.assert_allclose(grad, [-T * math.pi / 2 * p, -T * math.pi / 2 * q], atol=1e-12)
    hess = melnikov_hessian(-0.5, T, RADIAL, p, q)
    np.testing.assert_allclose(hess, -T * math.pi / 2 * np.eye(2), atol=1e-7)


def test_constant_field_gives_minus_enclosed_volume():
    param = make_param(-0.3)
    value = melnikov_value(param, 2.0, parse_field("1 + eps"), 0.0, 0.0)
    vol, err = enclosed_volume_monte_carlo(param, 2.0, samples=200_000, seed=42)
    assert abs(-value - vol) < 5 * err


def test_monte_carlo_volume_is_seeded():
    assert enclosed_volume_monte_carlo(-0.3, 1.0, samples=5000, seed=3) == \
        enclosed_volume_monte_carlo(-0.3, 1.0, samples=5000, seed=3)
    with pytest.raises(DomainError):
        enclosed_volume_monte_carlo(0.3, 1.0)


def test_value_equals_volume_functional_off_centre():
    param = make_param(0.3)
    T = 0.5 * param.tau
    fld = parse_field("1 + eps*((x - 1)^2 + y^2 + z^2)")
    mv = melnikov_value(param, T, fld, 0.25, 0.1)
    vf = volume_functional(delaunay_patch(param, 0.25, 0.1), fld, T)
    assert mv == pytest.approx(vf, rel=1e-10)


def test_gradient_matches_difference_quotients():
    param = make_param(-0.6)
    fld = parse_field("1 + eps*(x^3 + x*y + cos(y))")
    p, q, h = 0.1, -0.2, 1e-5
    grad = melnikov_grad(param, 1.0, fld, p, q)
    fd = [(melnikov_value(param, 1.0, fld, p + h, q) - melnikov_value(param, 1.0, fld, p - h, q)) / (2 * h),
          (melnikov_value(param, 1.0, fld, p, q + h) - melnikov_value(param, 1.0, fld, p, q - h)) / (2 * h)]
    np.testing.assert_allclose(grad, fd, rtol=1e-7, atol=1e-9)


def test_critical_point_search_finds_shifted_centre():
    # htilde = (x - c)^2 + y^2 has its unique critical point at (c, 0)
    fld = parse_field("1 + eps*((x - 0.3)^2 + y^2)")
    crit = find_critical_points(-0.5, 1.0, fld, seeds=[(0.0, 0.0), (0.5, 0.5), (0.31, 0.0)])
    assert len(crit) == 1
    assert crit[0].p == pytest.approx(0.3, abs=1e-8)
    assert crit[0].q == pytest.approx(0.0, abs=1e-8)
    assert crit[0].nondegenerate and not crit[0].flat


def test_flat_landscape_flagged():
    ev = melnikov_eval(-0.5, 1.0, parse_field("1 + eps"), 0.3, 0.2)
    crit = find_critical_points(-0.5, 1.0, parse_field("1 + eps"), seeds=[(0.3, 0.2)])
    assert np.allclose(ev.grad, 0.0, atol=1e-12)
    assert crit and all(c.flat for c in crit)


def test_landscape_rows():
    rows = melnikov_landscape(-0.5, 1.0, RADIAL, [0.0, 0.1], [0.0, 0.2])
    assert [(r[0], r[1]) for r in rows] == [(0.0, 0.0), (0.0, 0.2), (0.1, 0.0), (0.1, 0.2)]
    for p, q, value, dp, dq in rows:
        assert value == pytest.approx(_cylinder_radial(1.0, p, q), rel=1e-12)


def test_symmetry_check_rejects_broken_patch():
    base = delaunay_patch(make_param(0.3))
    check_symmetric_patch(translated_patch(0.3, 0.1, 0.1), 1.0)

    def tilted(t, theta):
        return base(t, theta) + np.array([0.0, 0.0, 0.1])

    with pytest.raises(DomainError):
        check_symmetric_patch(tilted, 1.0)


def test_wente_identity_on_polynomial_fields(rng):
    base = delaunay_patch(make_param(-0.3))
    c = rng.normal(size=(2, 3))

    def field(coef):
        def f(t, th):
            t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(th, float))
            return np.stack([coef[k] * (np.cos(th) * t + np.sin(2 * th)) + t * t for k in range(3)], axis=-1)
        return f

    lhs, rhs = wente_sides(base, field(c[0]), field(c[1]), 1.2)
    assert lhs == pytest.approx(rhs, abs=1e-6)


def test_off_centre_field_critical_point_near_one():
    param = make_param(0.3)
    fld = parse_field("1 + eps*((x - 1)^2 + y^2)")
    crit = find_critical_points(param, 0.5 * param.tau, fld, seeds=[(0.8, 0.1)])
    assert crit[0].p == pytest.approx(1.0, abs=1e-8)
    assert crit[0].q == pytest.approx(0.0, abs=1e-8)
