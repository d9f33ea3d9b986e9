"""Melnikov function of a translated Delaunay surface and the weighted volume.

For a perturbative field ``H_eps = 1 + eps * h`` the potential ``Q`` of
:func:`pmcsurf.curvature_field.eval_Q` satisfies ``div Q = h``. The weighted
volume of a patch ``X`` over ``[-T, T] x [-pi, pi]`` is
``V(X) = int Q(X) . X_t ^ X_theta``, and the Melnikov function is
``M(p, q) = V(X_a + p e1 + q e2)``. Its gradient has the closed form
``dM/dp = -int x^2 h(X_a + p e1 + q e2) w_{a,1} cos(theta)`` (``sin`` for
``q``), with ``x^2 w_{a,1} = x z'``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .curvature_field import eval_Q, require_perturbative
from .delaunay import DelaunayParam, delaunay_patch, make_param, roulette
from .errors import DomainError, NumericalFailure
from .quadrature import tensor_rule

MELNIKOV_TOL = 1e-10
_START_PIECES = 4  # 4 x 16 = 64 t-nodes
_START_THETA = 64
_MAX_LEVELS = 5


def _as_param(param):
    return param if isinstance(param, DelaunayParam) else make_param(param)


def _adaptive_integral(integrand, T, tol=MELNIKOV_TOL, refine_theta=True):
    """Tensor Gauss–Legendre integral over ``[-T, T] x [-pi, pi]``.

    ``integrand(t, theta)`` returns an array with trailing components
    (shape ``t.shape + (k,)``). Node counts double (t always, theta when
    ``refine_theta``) until successive levels differ by less than ``tol``
    relative to the integral of the absolute value.
    """
    pieces, n_theta = _START_PIECES, _START_THETA
    prev = None
    for _ in range(_MAX_LEVELS):
        tt, hh, w = tensor_rule(-T, T, 16, n_theta, pieces)
        vals = np.asarray(integrand(tt, hh))
        vals = vals.reshape(tt.shape + (-1,))
        cur = np.einsum("ij,ijk->k", w, vals)
        size = np.einsum("ij,ijk->k", w, np.abs(vals))
        if prev is not None and np.all(np.abs(cur - prev) <= tol * np.maximum(np.abs(cur), size)):
            return cur
        prev = cur
        pieces *= 2
        if refine_theta:
            n_theta *= 2
    raise NumericalFailure(f"tensor quadrature did not reach relative tolerance {tol}")


def _shifted_geometry(param, p, q, t, theta):
    r = roulette(param, t)
    x, dx, z, dz = (np.asarray(v) for v in (r.x, r.dx, r.z, r.dz))
    ct, st = np.cos(theta), np.sin(theta)
    point = (x * ct + p, x * st + q, z)
    normal = np.stack([-x * dz * ct, -x * dz * st, x * dx], axis=-1)
    return point, normal, x, dz, ct, st


def melnikov_value(param, T, field, p, q, tol=MELNIKOV_TOL):
    """``M(p, q) = int Q(X_a + p e1 + q e2) . (X_a)_t ^ (X_a)_theta dt dtheta``."""
    param = _as_param(param)
    require_perturbative(field)
    _check_T(T)

    def integrand(t, theta):
        point, normal, *_ = _shifted_geometry(param, p, q, t, theta)
        return np.sum(eval_Q(field, *point) * normal, axis=-1)

    return float(_adaptive_integral(integrand, T, tol)[0])


def _grad_integrand(param, field, p, q):
    def integrand(t, theta):
        point, _, x, dz, ct, st = _shifted_geometry(param, p, q, t, theta)
        h = field.htilde(*point)
        weight = x * dz * h
        return np.stack([-weight * ct, -weight * st, np.abs(weight)], axis=-1)

    return integrand


def melnikov_grad(param, T, field, p, q, tol=MELNIKOV_TOL, with_scale=False):
    """Closed-form gradient ``(dM/dp, dM/dq)``.

    With ``with_scale`` also returns ``int |x z' h|``, the natural size of
    the gradient used for convergence floors.
    """
    param = _as_param(param)
    require_perturbative(field)
    _check_T(T)
    vals = _adaptive_integral(_grad_integrand(param, field, p, q), T, tol)
    grad = np.array([vals[0], vals[1]])
    return (grad, float(vals[2])) if with_scale else grad


def melnikov_hessian(param, T, field, p, q, step=None):
    """Symmetrized central-difference Hessian of the analytic gradient."""
    param = _as_param(param)
    step = 1e-4 * max(1.0, param.tau) if step is None else step
    cols = []
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        gp = melnikov_grad(param, T, field, p + step * e[0], q + step * e[1])
        gm = melnikov_grad(param, T, field, p - step * e[0], q - step * e[1])
        cols.append((gp - gm) / (2.0 * step))
    hess = np.column_stack(cols)
    return 0.5 * (hess + hess.T)


@dataclass(frozen=True)
class MelnikovEval:
    """Melnikov data at one translation.

    ``flat`` marks a gradient and Hessian both below the floor, the
    signature of a continuum of critical points (for example ``h`` constant).
    """

    p: float
    q: float
    value: float
    grad: tuple
    hessian: tuple
    nondegenerate: bool
    flat: bool = False
    iterations: int = 0


def melnikov_eval(param, T, field, p, q):
    """Value, gradient and Hessian at ``(p, q)`` with the nondegeneracy tag."""
    param = _as_param(param)
    value = melnikov_value(param, T, field, p, q)
    grad, scale = melnikov_grad(param, T, field, p, q, with_scale=True)
    hess = melnikov_hessian(param, T, field, p, q)
    floor = 1e-10 * max(scale, 1e-300)
    flat = bool(np.linalg.norm(grad) <= floor and np.max(np.abs(hess)) <= 1e-6 * max(scale, 1e-300))
    nondeg = bool(abs(np.linalg.det(hess)) > 1e-8 * scale * scale) and not flat
    return MelnikovEval(float(p), float(q), value, tuple(grad), tuple(map(tuple, hess)), nondeg, flat)


def find_critical_points(param, T, field, seeds=((0.0, 0.0),), max_iter=40, tol=1e-10):
    """Newton on the analytic gradient from each seed.

    Steps are clipped to ``0.5 tau_a``; if the Newton step does not reduce the
    gradient norm it is halved (up to 20 times). Converged points within
    ``1e-6`` of each other are merged; results are sorted by ``(p, q)``.
    Seeds that fail to converge are dropped. For a gradient that vanishes
    identically every seed is returned with ``flat=True``.
    """
    param = _as_param(param)
    require_perturbative(field)
    found = []
    for seed in seeds:
        pq = np.array(seed, dtype=float)
        grad, scale = melnikov_grad(param, T, field, *pq, with_scale=True)
        floor = tol * max(scale, 1e-300)
        converged = False
        for it in range(max_iter + 1):
            if np.linalg.norm(grad) <= floor:
                converged = True
                break
            if it == max_iter:
                break
            hess = melnikov_hessian(param, T, field, *pq)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -grad / max(scale, 1e-300)
            norm = np.linalg.norm(step)
            limit = 0.5 * param.tau
            if norm > limit:
                step *= limit / norm
            for _ in range(20):
                trial = pq + step
                g_trial = melnikov_grad(param, T, field, *trial)
                if np.linalg.norm(g_trial) < np.linalg.norm(grad):
                    break
                step *= 0.5
            pq, grad = trial, g_trial
        if converged:
            ev = melnikov_eval(param, T, field, *pq)
            found.append(MelnikovEval(ev.p, ev.q, ev.value, ev.grad, ev.hessian,
                                      ev.nondegenerate, ev.flat, it))
    merged = []
    for ev in sorted(found, key=lambda e: (e.p, e.q)):
        if ev.flat or not any(math.hypot(ev.p - m.p, ev.q - m.q) <= 1e-6 for m in merged):
            merged.append(ev)
    return merged


def _check_T(T):
    if not T > 0:
        raise DomainError("half-length T must be positive")


_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def _tangents(patch, t, theta, h):
    xt = sum(w * np.asarray(patch(t + i * h, theta)) for i, w in _D1) / (12.0 * h)
    xh = sum(w * np.asarray(patch(t, theta + i * h)) for i, w in _D1) / (12.0 * h)
    return xt, xh


def check_symmetric_patch(patch, T, samples=64, tol=1e-9, seed=7):
    """Check that ``X.e1``, ``X.e2`` are even and ``X.e3`` is odd in ``t``.

    Raises
    ------
    DomainError
        On a violation at the sampled points.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, T, samples)
    theta = rng.uniform(-np.pi, np.pi, samples)
    plus, minus = np.asarray(patch(t, theta)), np.asarray(patch(-t, theta))
    scale = max(1.0, float(np.max(np.abs(plus))))
    bad = max(
        float(np.max(np.abs(plus[..., :2] - minus[..., :2]))),
        float(np.max(np.abs(plus[..., 2] + minus[..., 2]))),
    )
    if bad > tol * scale:
        raise DomainError(f"patch breaks the symmetry contract (deviation {bad:.3g})")


def volume_functional(patch, field, T, h=1e-3, tol=MELNIKOV_TOL, check=True):
    """Weighted volume ``int Q(X) . X_t ^ X_theta`` of a patch over ``[-T, T] x S^1``.

    Tangent vectors come from 4th-order central differences with step ``h``.
    """
    require_perturbative(field)
    _check_T(T)
    if check:
        check_symmetric_patch(patch, T)

    def integrand(t, theta):
        pos = np.asarray(patch(t, theta))
        xt, xh = _tangents(patch, t, theta, h)
        q = eval_Q(field, pos[..., 0], pos[..., 1], pos[..., 2])
        return np.sum(q * np.cross(xt, xh), axis=-1)

    return float(_adaptive_integral(integrand, T, tol)[0])


def first_variation_check(family, field, T, ds=1e-3, h=1e-3):
    """Compare the first-variation formula for the weighted volume with FD.

    Parameters
    ----------
    family : callable
        ``family(s)`` returns a patch sampler; ``family(0)`` is the base.
    field : CurvatureField
        Perturbative field; its ``htilde`` plays the role of ``div Q``.
    T : float
    ds : float
        Step of the 5-point difference in ``s``.

    Returns
    -------
    analytic, numeric : float
        ``int h(X) Xdot . X_t ^ X_theta - int [Q(X) . X_theta ^ Xdot]_{t=-T}^{t=T}``
        and the finite-difference derivative of the volume.
    """
    require_perturbative(field)
    base = family(0.0)
    stencil = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
    fams = {i: family(i * ds) for i, _ in stencil}

    def velocity(t, theta):
        return sum(w * np.asarray(fams[i](t, theta)) for i, w in stencil) / (12.0 * ds)

    def interior(t, theta):
        pos = np.asarray(base(t, theta))
        xt, xh = _tangents(base, t, theta, h)
        hval = field.htilde(pos[..., 0], pos[..., 1], pos[..., 2])
        return hval * np.sum(velocity(t, theta) * np.cross(xt, xh), axis=-1)

    bulk = float(_adaptive_integral(interior, T)[0])

    def edge(t_value):
        from .quadrature import composite_nodes
        theta, w = composite_nodes(-np.pi, np.pi, 4, 32)
        t = np.full_like(theta, t_value)
        pos = np.asarray(base(t, theta))
        _, xh = _tangents(base, t, theta, h)
        q = eval_Q(field, pos[..., 0], pos[..., 1], pos[..., 2])
        return float(w @ np.sum(q * np.cross(xh, velocity(t, theta)), axis=-1))

    analytic = bulk - (edge(T) - edge(-T))
    numeric = sum(w * volume_functional(fams[i], field, T, h, check=False) for i, w in stencil) / (12.0 * ds)
    return analytic, float(numeric)


def wente_sides(X, Y, Z, T, h=1e-3):
    """Both sides of the integration-by-parts identity behind the first variation.

    ``int Y . (X_t ^ Z_theta + Z_t ^ X_theta)`` against
    ``int Z . (Y_t ^ X_theta + X_t ^ Y_theta) + int [Z . X_theta ^ Y]_{t=-T}^{t=T} dtheta``
    for theta-periodic vector fields ``X, Y, Z``.

    Returns
    -------
    lhs, rhs : float
    """
    def lhs_integrand(t, theta):
        xt, xh = _tangents(X, t, theta, h)
        zt, zh = _tangents(Z, t, theta, h)
        y = np.asarray(Y(t, theta))
        return np.sum(y * (np.cross(xt, zh) + np.cross(zt, xh)), axis=-1)

    def rhs_integrand(t, theta):
        xt, xh = _tangents(X, t, theta, h)
        yt, yh = _tangents(Y, t, theta, h)
        z = np.asarray(Z(t, theta))
        return np.sum(z * (np.cross(yt, xh) + np.cross(xt, yh)), axis=-1)

    def edge(t_value):
        from .quadrature import composite_nodes
        theta, w = composite_nodes(-np.pi, np.pi, 4, 32)
        t = np.full_like(theta, t_value)
        _, xh = _tangents(X, t, theta, h)
        return float(w @ np.sum(np.asarray(Z(t, theta)) * np.cross(xh, np.asarray(Y(t, theta))), axis=-1))

    lhs = float(_adaptive_integral(lhs_integrand, T)[0])
    rhs = float(_adaptive_integral(rhs_integrand, T)[0]) + edge(T) - edge(-T)
    return lhs, rhs


def enclosed_volume_monte_carlo(param, T, samples=200_000, seed=42):
    """Monte-Carlo volume of the solid bounded by an unduloid and the planes ``z = +-z_a(T)``.

    Only for ``a`` in (-1, 0), where ``z_a`` is increasing so each height
    meets the profile once.

    Returns
    -------
    volume, standard_error : float
    """
    param = _as_param(param)
    if param.a >= 0:
        raise DomainError("the enclosed solid is defined for unduloids (a in (-1, 0)) only")
    t_grid = np.linspace(-T, T, 4001)
    prof = roulette(param, t_grid)
    z_grid, x_grid = np.asarray(prof.z), np.asarray(prof.x)
    rmax = float(np.max(x_grid))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(samples, 2)) * rmax
    zs = rng.uniform(z_grid[0], z_grid[-1], size=samples)
    inside = np.hypot(pts[:, 0], pts[:, 1]) < np.interp(zs, z_grid, x_grid)
    box = (2 * rmax) ** 2 * (z_grid[-1] - z_grid[0])
    frac = inside.mean()
    return float(box * frac), float(box * math.sqrt(frac * (1 - frac) / samples))


def melnikov_landscape(param, T, field, p_values, q_values):
    """Rows ``(p, q, M, dM/dp, dM/dq)`` on a rectangular grid."""
    param = _as_param(param)
    rows = []
    for p in p_values:
        for q in q_values:
            g = melnikov_grad(param, T, field, p, q)
            rows.append((float(p), float(q), melnikov_value(param, T, field, p, q), float(g[0]), float(g[1])))
    return rows


def translated_patch(param, p, q):
    """``X_a + p e1 + q e2`` as a patch sampler."""
    return delaunay_patch(_as_param(param), p, q)
