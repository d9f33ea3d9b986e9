"""Delaunay roulettes, the surfaces they generate, and curvature evaluation.

The profile ``(x_a, z_a)`` of the Delaunay surface with parameter ``a``
solves ``x'' = (1 + 2 gamma) x - 2 x^3`` and ``z' = x^2 - gamma`` with
``gamma = a (1 + a)``, ``x(0) = 1 + a``, ``x'(0) = 0`` and ``z(0) = 0``. The
surface is ``X_a(t, theta) = (x cos theta, x sin theta, z)`` and has mean
curvature one. Unduloids have ``a`` in (-1, 0), nodoids ``a > 0``; ``a = -1/2``
is the cylinder of radius 1/2.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from . import elliptic
from .errors import DegenerateGraphError, DomainError, NumericalFailure

CYLINDER = -0.5
_GUARD = 1e-6


@dataclass(frozen=True)
class DelaunayParam:
    """Delaunay parameter with its derived constants.

    Attributes
    ----------
    a : float
        Delaunay parameter in (-1, 0) or (0, inf).
    gamma : float
        ``a (1 + a)``.
    m : float
        Elliptic parameter of the ``dn`` representation of the profile.
    tau : float
        Half-period: ``x_a`` has period ``2 tau`` and ``x_a(tau) = |a|``.
    branch : str
        ``"unduloid"``, ``"cylinder"`` or ``"nodoid"``.
    scale : float
        Factor in front of ``dn``: ``1 + a``, or ``|a|`` when ``a < -1/2``.
    K, E : float
        Complete elliptic integrals at ``m``.
    """

    a: float
    gamma: float
    m: float
    tau: float
    branch: str
    scale: float
    K: float = field(repr=False)
    E: float = field(repr=False)

    @property
    def shifted(self):
        """True on the branch ``a < -1/2`` whose ``dn`` argument is ``t - tau``."""
        return self.a < CYLINDER

    @property
    def is_cylinder(self):
        return self.branch == "cylinder"

    @property
    def neck(self):
        """Minimal distance from the surface to the axis."""
        return min(abs(self.a), 1.0 + self.a)

    @property
    def bulge(self):
        """Maximal distance from the surface to the axis."""
        return max(abs(self.a), 1.0 + self.a)


def make_param(a):
    """Validate ``a`` and compute the derived Delaunay constants.

    Raises
    ------
    DomainError
        If ``a`` is not in (-1, 0) or (0, inf), or lies within ``1e-6`` of
        the singular limits ``a = -1`` and ``a = 0`` where ``m -> 1``.
    """
    a = float(a)
    if not np.isfinite(a) or a <= -1.0 or a == 0.0:
        raise DomainError(f"Delaunay parameter a={a} must lie in (-1, 0) or (0, inf)")
    if abs(a) < _GUARD or a < -1.0 + _GUARD:
        raise DomainError(
            f"Delaunay parameter a={a} is within {_GUARD} of a singular limit (a=-1 or a=0); "
            "admissible set is (-1, 0) or (0, inf)"
        )
    gamma = a * (1.0 + a)
    if a == CYLINDER:
        return DelaunayParam(a, gamma, 0.0, np.pi, "cylinder", 0.5, np.pi / 2, np.pi / 2)
    if a > CYLINDER:
        scale = 1.0 + a
        m = 1.0 - a * a / (scale * scale)
    else:
        scale = abs(a)
        m = 1.0 - (1.0 + a) ** 2 / (a * a)
    kk, ee = elliptic.complete_integrals(m)
    branch = "nodoid" if a > 0 else "unduloid"
    return DelaunayParam(a, gamma, m, kk / scale, branch, scale, kk, ee)


@dataclass(frozen=True)
class RouletteEval:
    """Profile state ``(x, x', z, z')`` at ``t`` (scalars or equal-shape arrays)."""

    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    z: np.ndarray
    dz: np.ndarray


def _as_param(param):
    return param if isinstance(param, DelaunayParam) else make_param(param)


def roulette(param, t):
    """Closed-form profile of the Delaunay roulette.

    Parameters
    ----------
    param : DelaunayParam or float
    t : float or array_like

    Returns
    -------
    RouletteEval
        ``x`` from the ``dn`` representation, ``z = int_0^t x^2 - gamma t``
        with the integral in closed form, ``z' = x^2 - gamma``.
    """
    param = _as_param(param)
    t_arr = np.asarray(t, dtype=float)
    if param.is_cylinder:
        x = np.full_like(t_arr, 0.5)
        dx = np.zeros_like(t_arr)
        z = 0.5 * t_arr
        dz = np.full_like(t_arr, 0.5)
    else:
        c = param.scale
        arg = c * (t_arr - param.tau) if param.shifted else c * t_arr
        amp, d, dd = elliptic.am_dn(arg, param.m)
        x = c * np.asarray(d)
        dx = c * c * np.asarray(dd)
        integral = c * np.asarray(elliptic.incomplete_E(amp, param.m))
        if param.shifted:
            integral = integral + c * param.E
        z = integral - param.gamma * t_arr
        dz = x * x - param.gamma
    if t_arr.ndim == 0:
        return RouletteEval(float(t_arr), float(x), float(dx), float(z), float(dz))
    return RouletteEval(t_arr, x, dx, z, dz)


def profile_jet(param, t):
    """Profile values and the derivatives the curvature formulas need.

    Returns
    -------
    dict
        Keys ``x, dx, ddx, dddx, z, dz, ddz`` as arrays shaped like ``t``.
        Higher derivatives come from the profile ODE.
    """
    param = _as_param(param)
    r = roulette(param, np.asarray(t, dtype=float))
    g = param.gamma
    x, dx = np.asarray(r.x), np.asarray(r.dx)
    ddx = (1.0 + 2.0 * g) * x - 2.0 * x ** 3
    dddx = (1.0 + 2.0 * g) * dx - 6.0 * x * x * dx
    return {
        "x": x, "dx": dx, "ddx": ddx, "dddx": dddx,
        "z": np.asarray(r.z), "dz": np.asarray(r.dz), "ddz": 2.0 * x * dx,
    }


def roulette_ode_oracle(a, t_grid, rtol=1e-12, atol=1e-12):
    """Integrate the profile ODE directly, independent of elliptic functions.

    Parameters
    ----------
    a : float
        Delaunay parameter.
    t_grid : array_like
        Ascending sample points starting at 0.

    Returns
    -------
    RouletteEval
        Array-valued, one entry per grid point.

    Raises
    ------
    NumericalFailure
        If the integrator stops early (for example step-size underflow).
    """
    param = _as_param(a)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) < 0):
        raise DomainError("t_grid must be ascending and start at 0")
    g = param.gamma
    c = 1.0 + 2.0 * g

    def rhs(_, y):
        x, dx, _z = y
        return [dx, c * x - 2.0 * x ** 3, x * x - g]

    y0 = [1.0 + param.a, 0.0, 0.0]
    if t_grid[-1] == 0.0:
        ys = np.array(y0)[:, None]
    else:
        sol = solve_ivp(rhs, (0.0, t_grid[-1]), y0, method="DOP853", t_eval=t_grid,
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            raise NumericalFailure(f"profile integration failed: {sol.message}")
        ys = sol.y
    x, dx, z = ys
    return RouletteEval(t_grid, x, dx, z, x * x - g)


def p_weight(param, t):
    """Potential ``p_a = x^2 + gamma^2 / x^2`` of the Jacobi operator."""
    param = _as_param(param)
    x = np.asarray(roulette(param, t).x)
    out = x * x + param.gamma ** 2 / (x * x)
    return float(out) if np.ndim(out) == 0 else out


def roulette_da(param, t):
    """Derivatives of ``x_a(t)`` and ``z_a(t)`` with respect to ``a``.

    Returns
    -------
    dx_da, dz_da : float or ndarray

    Raises
    ------
    DomainError
        At the cylinder, where the closed forms divide by ``1 + 2a = 0``.
    """
    param = _as_param(param)
    if param.is_cylinder:
        raise DomainError("a-derivatives of the profile are singular at a=-1/2; use the cylinder case")
    r = roulette(param, t)
    g = param.gamma
    t = np.asarray(r.t)
    denom = g * (1.0 + 2.0 * param.a)
    dx_da = ((1.0 + 2.0 * g) * r.x + 2.0 * g * r.dx * t + r.dx * r.z - r.x * r.dz) / denom
    dz_da = (2.0 * g * r.z + 2.0 * g * r.dz * t - g * t + r.x * r.dx + r.z * r.dz) / denom
    if np.ndim(dx_da) == 0:
        return float(dx_da), float(dz_da)
    return dx_da, dz_da


def graph_area_factor(param, t, phi):
    """``(X + phi N)_t ^ (X + phi N)_theta . N`` for the normal graph.

    The graph is an immersion where this is positive.
    """
    param = _as_param(param)
    x = np.asarray(roulette(param, t).x)
    phi = np.asarray(phi, dtype=float)
    return x * x * (1.0 - 2.0 * phi + (phi * phi / (x * x)) * (x * x - param.gamma ** 2 / (x * x)))


@dataclass(frozen=True)
class SurfaceSample:
    """Point of a translated normal graph and the unit normal of the base surface."""

    position: np.ndarray
    normal: np.ndarray
    t: float
    theta: float


def _frame(x, dx, z, dz, theta):
    ct, st = np.cos(theta), np.sin(theta)
    pos = np.stack([x * ct, x * st, z * np.ones_like(ct)], axis=-1)
    nrm = np.stack([-dz * ct / x, -dz * st / x, dx / x * np.ones_like(ct)], axis=-1)
    return pos, nrm


def surface_point(param, p, q, t, theta, phi=0.0):
    """Evaluate ``X_a + p e1 + q e2 + phi N_a`` at ``(t, theta)``.

    ``N_a = (-z' cos theta, -z' sin theta, x') / x`` is the unit normal for
    which ``X_a`` has mean curvature ``+1``.

    Raises
    ------
    DegenerateGraphError
        If the graph area factor is not positive at the point.
    """
    param = _as_param(param)
    if graph_area_factor(param, t, phi) <= 0.0:
        raise DegenerateGraphError(f"normal graph degenerates at t={t}, phi={phi}")
    r = roulette(param, float(t))
    pos, nrm = _frame(r.x, r.dx, r.z, r.dz, float(theta))
    pos = pos + np.array([p, q, 0.0]) + phi * nrm
    return SurfaceSample(pos, nrm, float(t), float(theta))


def delaunay_patch(param, p=0.0, q=0.0):
    """Vectorized sampler ``(t, theta) -> X_a + p e1 + q e2``, shape ``(..., 3)``."""
    param = _as_param(param)
    shift = np.array([p, q, 0.0])

    def patch(t, theta):
        t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
        r = roulette(param, t)
        pos, _ = _frame(np.asarray(r.x), np.asarray(r.dx), np.asarray(r.z), np.asarray(r.dz), theta)
        return pos + shift

    return patch


def normal_field(param):
    """Vectorized sampler ``(t, theta) -> N_a``."""
    param = _as_param(param)

    def normal(t, theta):
        t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
        r = roulette(param, t)
        _, nrm = _frame(np.asarray(r.x), np.asarray(r.dx), np.asarray(r.z), np.asarray(r.dz), theta)
        return nrm

    return normal


def normal_graph_patch(param, p, q, phi):
    """Sampler of ``X_a + p e1 + q e2 + phi N_a`` for a callable ``phi(t, theta)``."""
    base = delaunay_patch(param, p, q)
    normal = normal_field(param)

    def patch(t, theta):
        t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
        return base(t, theta) + np.asarray(phi(t, theta))[..., None] * normal(t, theta)

    return patch


_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))


def _curvature_at_step(patch, t, theta, h):
    def shifted(i, j):
        return np.asarray(patch(t + i * h, theta + j * h), dtype=float)

    center = shifted(0, 0)
    xt = sum(w * shifted(i, 0) for i, w in _D1) / (12.0 * h)
    xh = sum(w * shifted(0, j) for j, w in _D1) / (12.0 * h)
    xtt = sum(w * (shifted(i, 0) if i else center) for i, w in _D2) / (12.0 * h * h)
    xhh = sum(w * (shifted(0, j) if j else center) for j, w in _D2) / (12.0 * h * h)
    xth = sum(wi * wj * shifted(i, j) for i, wi in _D1 for j, wj in _D1) / (144.0 * h * h)
    return curvature_from_derivatives(xt, xh, xtt, xth, xhh)


def curvature_from_derivatives(xt, xh, xtt, xth, xhh):
    """Mean curvature from first and second partial derivatives of a patch.

    ``(E N - 2 F M + G L) / (2 (E G - F^2))`` with the unit normal
    ``X_t ^ X_theta / |X_t ^ X_theta|``. Arrays have a trailing axis of 3.
    """
    e = np.sum(xt * xt, axis=-1)
    f = np.sum(xt * xh, axis=-1)
    g = np.sum(xh * xh, axis=-1)
    metric = e * g - f * f
    if np.any(metric <= 0.0):
        raise DegenerateGraphError("degenerate metric: E G - F^2 <= 0")
    n = np.cross(xt, xh)
    n = n / np.sqrt(metric)[..., None]
    ll = np.sum(xtt * n, axis=-1)
    mm = np.sum(xth * n, axis=-1)
    nn = np.sum(xhh * n, axis=-1)
    return (e * nn - 2.0 * f * mm + g * ll) / (2.0 * metric)


def default_step(param=None):
    """Default finite-difference step ``2e-3 tau_a`` (``2e-3`` without a parameter).

    Balances the ``h^4`` truncation error against roundoff, which the
    curvature formula amplifies by ``1 / x^2`` near thin necks.
    """
    tau = 1.0 if param is None else _as_param(param).tau
    return 2e-3 * tau


def mean_curvature(patch, t, theta, h=None, *, return_error=False):
    """Mean curvature of a sampled patch by 4th-order central differences.

    Parameters
    ----------
    patch : callable
        ``patch(t, theta)`` returning positions with a trailing axis of 3;
        must broadcast over array arguments.
    t, theta : float or array_like
    h : float, optional
        Step in both parameters; defaults to ``default_step()``.
    return_error : bool
        Also return the Richardson estimate ``|H(h) - H(2h)| / 15``.
    """
    h = default_step() if h is None else float(h)
    t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    value = _curvature_at_step(patch, t, theta, h)
    if not return_error:
        return float(value) if value.ndim == 0 else value
    coarse = _curvature_at_step(patch, t, theta, 2.0 * h)
    err = np.abs(value - coarse) / 15.0
    if value.ndim == 0:
        return float(value), float(err)
    return value, err


def mesh_arrays(param, T, p=0.0, q=0.0, phi_grid=None, n_t=64, n_theta=64):
    """Vertices and triangles of the surface over ``[-T, T] x [-pi, pi)``.

    Vertex ``(i, k)`` sits at ``t_i = -T + 2 T i / n_t`` and
    ``theta_k = -pi + 2 pi k / n_theta``; the seam is welded.

    Returns
    -------
    vertices : ndarray, shape ((n_t+1) n_theta, 3)
    faces : ndarray of int, shape (2 n_t n_theta, 3), zero-based
    """
    param = _as_param(param)
    if phi_grid is not None:
        phi_grid = np.asarray(getattr(phi_grid, "values", phi_grid), dtype=float)
        n_t, n_theta = phi_grid.shape[0] - 1, phi_grid.shape[1]
    if n_t < 8 or n_theta < 8:
        raise DomainError("mesh resolution must be at least 8 in each direction")
    t = np.linspace(-T, T, n_t + 1)
    theta = -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta
    tt, hh = np.meshgrid(t, theta, indexing="ij")
    pos = delaunay_patch(param, p, q)(tt, hh)
    if phi_grid is not None:
        pos = pos + phi_grid[..., None] * normal_field(param)(tt, hh)
    i, k = np.meshgrid(np.arange(n_t), np.arange(n_theta), indexing="ij")
    v00 = i * n_theta + k
    v01 = i * n_theta + (k + 1) % n_theta
    v10 = v00 + n_theta
    v11 = v01 + n_theta
    faces = np.concatenate([
        np.stack([v00, v10, v11], axis=-1).reshape(-1, 3),
        np.stack([v00, v11, v01], axis=-1).reshape(-1, 3),
    ])
    return pos.reshape(-1, 3), faces


def export_mesh(param, T, path, p=0.0, q=0.0, phi_grid=None, n_t=64, n_theta=64):
    """Write the surface as a Wavefront OBJ file and return its path."""
    vertices, faces = mesh_arrays(param, T, p, q, phi_grid, n_t, n_theta)
    path = Path(path)
    lines = [f"# Delaunay surface a={_as_param(param).a!r} T={T!r} p={p!r} q={q!r}"]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in vertices]
    lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in faces]
    path.write_text("\n".join(lines) + "\n")
    return path
