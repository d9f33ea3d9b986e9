"""Prescribed mean curvature Dirichlet problem on normal graphs.

Unknown: an even, ``theta``-periodic ``phi`` vanishing at ``t = +-T`` such that
``M(U + phi N_a) = H_eps(U + phi N_a)`` with ``U = X_a + p e1 + q e2``.
Discretization: Fourier in theta, 4th-order finite differences in t, unknowns
on the half grid ``t = 0, h, ..., T - h``. The Newton iterations are chord
iterations preconditioned by the Jacobi operator at ``phi = 0``.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from . import grid
from .curvature_field import FieldError, parse_field
from .degeneracy import KERNEL_TOL, find_T0, kernel_basis
from .delaunay import (DelaunayParam, curvature_from_derivatives, export_mesh, make_param,
                       mean_curvature, normal_graph_patch, profile_jet)
from .errors import (DegenerateGraphError, DomainError, NumericalFailure, ObstructionError,
                     SolvabilityError)
from .grid import GridFunction
from .jacobi_field import discrete_jacobi, fundamental_pair, fundamental_pair_derivatives, w_mode
from .melnikov import _adaptive_integral, melnikov_hessian
from .quadrature import gl_nodes

__all__ = [
    "GridFunction", "PMCSolution", "jacobi_invert", "explicit_mode0_inverse", "normal_graph_residual",
    "solve_nondegenerate", "solve_axisymmetric", "solve_lyapunov_schmidt", "solve_with_translation",
    "obstruction_integral", "independent_residual", "find_limit_T0", "inverse_norm_probe",
    "inverse_norm_sweep", "ls_constant",
]

DEFAULT_NT = 256
DEFAULT_NTHETA = 64
SOLVER_TOL = 1e-10
CONTINUATION_STEP = 1e-3
_EXPLICIT_FLOOR = 1e-8
_MIN_DAMPING = 2.0 ** -20


def _as_param(param):
    return param if isinstance(param, DelaunayParam) else make_param(param)


def _as_field(field):
    return parse_field(field) if isinstance(field, str) else field


@dataclass(frozen=True)
class PMCSolution:
    """Converged normal graph.

    Attributes
    ----------
    param : DelaunayParam
    T, eps, p, q : float
    phi : GridFunction
    lambda1, lambda2 : float
        Multipliers of ``w_{a,1} cos(theta)`` and ``w_{a,1} sin(theta)``; zero
        outside the Lyapunov–Schmidt mode.
    residual_inf : float
        Sup over the interior grid rows of ``M - H_eps`` (minus the multiplier
        terms in Lyapunov–Schmidt mode).
    iterations : int
        Linear solves performed (summed over continuation steps).
    mode : str
    eps_reached : float
        Last parameter value with a converged solve; equals ``eps`` on success.
    """

    param: DelaunayParam
    T: float
    eps: float
    p: float
    q: float
    phi: GridFunction
    lambda1: float = 0.0
    lambda2: float = 0.0
    residual_inf: float = 0.0
    iterations: int = 0
    mode: str = "nondegenerate"
    eps_reached: float = 0.0

    def phi_callable(self):
        """Smooth interpolant of ``phi``: trigonometric in theta, degree-7 spline in t."""
        return _grid_interpolant(self.phi)

    def patch(self):
        return normal_graph_patch(self.param, self.p, self.q, self.phi_callable())

    def summary(self):
        return {
            "a": self.param.a, "T": self.T, "eps": self.eps, "p": self.p, "q": self.q,
            "lambda1": self.lambda1, "lambda2": self.lambda2, "residual_inf": self.residual_inf,
            "iterations": self.iterations, "mode": self.mode, "eps_reached": self.eps_reached,
            "phi_sup": self.phi.sup(), "n_t": self.phi.n_t, "n_theta": self.phi.n_theta,
        }

    def export_mesh(self, path, n_t=None, n_theta=None):
        """Write the solved surface as OBJ (grid resolution by default)."""
        return export_mesh(self.param, self.T, path, self.p, self.q, self.phi.values,
                           self.phi.n_t if n_t is None else n_t,
                           self.phi.n_theta if n_theta is None else n_theta)


def _grid_interpolant(phi):
    cos_c, sin_c = grid.fourier_split(phi.values)
    k = min(7, phi.n_t)
    spline = make_interp_spline(phi.t, np.concatenate([cos_c, sin_c], axis=1), k=k)
    n_modes = cos_c.shape[1]
    j = np.arange(n_modes)

    def evaluate(t, theta):
        t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
        coef = spline(t.ravel())
        ang = theta.ravel()[:, None] * j
        out = np.sum(coef[:, :n_modes] * np.cos(ang) + coef[:, n_modes:] * np.sin(ang), axis=1)
        return out.reshape(t.shape)

    return evaluate


# ---------------------------------------------------------------------------
# quadrature on the half grid and the linear solver


def _half_weights(n_t, T):
    """Weights folding the full-grid t rule onto half-grid rows (even integrands)."""
    full = grid.t_weights(n_t, 2.0 * T / n_t)
    mid = n_t // 2
    w = 2.0 * full[mid:n_t]
    w[0] = full[mid]
    return w


class _ModeSolver:
    """Per-mode LU factorizations of ``2 x^2 L`` on the half grid.

    Modes listed in ``bordered`` (mapping ``j`` to the half-grid samples of
    ``w_{a,j}``) are solved with one extra unknown ``mu`` and one constraint
    row: ``L phi = g + mu w_j``, ``int x^2 phi w_j = 0``.
    """

    def __init__(self, param, T, n_t, n_theta, bordered=None):
        self.op = discrete_jacobi(param, T, n_t, n_theta)
        self.n_half = self.op.t_half.size
        self.weights = _half_weights(n_t, T)
        self.bordered = dict(bordered or {})
        self.factors = {}
        x2 = self.op.x_half ** 2
        for j in range(self.op.n_modes):
            mat = self.op.mode_matrix(j)
            if j in self.bordered:
                v = self.bordered[j]
                big = np.zeros((self.n_half + 1, self.n_half + 1))
                big[:-1, :-1] = mat
                big[:-1, -1] = -2.0 * x2 * v
                big[-1, :-1] = self.weights * x2 * v
                mat = big
            self.factors[j] = lu_factor(mat)

    def solve(self, g_half):
        """Solve ``L phi = g (+ mu w_j on bordered modes)``.

        Returns
        -------
        phi_half : ndarray
        multipliers : dict
            ``j -> (mu_cos, mu_sin)`` for bordered modes.
        """
        rhs = 2.0 * self.op.x_half[:, None] ** 2 * g_half
        cos_c, sin_c = grid.fourier_split(rhs)
        out_c, out_s = np.zeros_like(cos_c), np.zeros_like(sin_c)
        multipliers = {}
        for j, fac in self.factors.items():
            cols = np.column_stack([cos_c[:, j], sin_c[:, j]])
            if j in self.bordered:
                cols = np.vstack([cols, np.zeros((1, 2))])
                sol = lu_solve(fac, cols)
                multipliers[j] = (float(sol[-1, 0]), float(sol[-1, 1]))
                sol = sol[:-1]
            else:
                sol = lu_solve(fac, cols)
            out_c[:, j], out_s[:, j] = sol[:, 0], sol[:, 1]
        n_theta = g_half.shape[1]
        if n_theta % 2 == 0:
            out_s[:, -1] = 0.0
        out_s[:, 0] = 0.0
        return grid.fourier_join(out_c, out_s, n_theta), multipliers


def _kernel_components(param, T, g_half, weights, x_half, modes):
    """Normalized weighted projections of ``g`` on the kernel directions."""
    cos_c, sin_c = grid.fourier_split(g_half)
    t_half = np.linspace(0.0, T, x_half.size + 1)[:-1]
    comps = {}
    for j in modes:
        v = np.asarray(w_mode(param, j, t_half), dtype=float)
        norm_sq = weights @ (x_half ** 2 * v * v)
        if j == 0:
            comps["w_0"] = math.sqrt(2.0 * math.pi) * abs(weights @ (x_half ** 2 * v * cos_c[:, 0])) / math.sqrt(norm_sq)
            continue
        arg = "theta" if j == 1 else f"{j} theta"
        for name, coef in (("cos", cos_c[:, j]), ("sin", sin_c[:, j])):
            comps[f"w_{j} {name}({arg})"] = math.sqrt(math.pi) * abs(weights @ (x_half ** 2 * v * coef)) / math.sqrt(norm_sq)
    return comps


def _bordered_modes(param, T, n_t, modes):
    t_half = grid.t_nodes(T, n_t)[n_t // 2:n_t]
    return {j: np.asarray(w_mode(param, j, t_half), dtype=float) for j in modes}


def jacobi_invert(param, T, g, mode_policy="strict", tol=KERNEL_TOL):
    """Solve ``L_a phi = g`` for even Dirichlet ``phi``.

    Parameters
    ----------
    param : DelaunayParam or float
    T : float
    g : GridFunction
        Even in t; its boundary rows are ignored.
    mode_policy : {"strict", "project"}
        At a degenerate ``T``: ``"strict"`` raises when a kernel component
        of ``g`` exceeds ``tol``; ``"project"`` warns and solves for the
        projection of ``g`` on the weighted complement of the kernel.
    tol : float
        Threshold on each normalized component
        ``|int x^2 g v| / ||x v||`` (``v`` a kernel function).

    Returns
    -------
    GridFunction
        Even, Dirichlet; orthogonal to the kernel in the ``x^2`` weighted
        product when ``T`` is degenerate.

    Raises
    ------
    SolvabilityError
        Strict policy with a kernel component above ``tol``.
    """
    param = _as_param(param)
    if mode_policy not in ("strict", "project"):
        raise DomainError(f"unknown mode_policy {mode_policy!r}")
    if T <= 0 or abs(g.T - T) > 1e-12 * T:
        raise DomainError("g must live on [-T, T] with T > 0")
    if not g.even:
        raise DomainError("right-hand side must be even in t")
    g.validate(tol=1e-10) if g.dirichlet else None
    kernel = kernel_basis(param, T)
    solver_modes = [j for j in kernel.modes if j < g.n_theta // 2]
    if solver_modes:
        weights = _half_weights(g.n_t, T)
        x_half = discrete_jacobi(param, T, g.n_t, g.n_theta).x_half
        comps = _kernel_components(param, T, g.half(), weights, x_half, solver_modes)
        worst = max(comps.values())
        if worst > tol:
            msg = (f"right-hand side violates the solvability condition int x_a^2 g v = 0 "
                   f"(largest kernel component {worst:.3g} > {tol:.1e}; components {comps})")
            if mode_policy == "strict":
                raise SolvabilityError(msg, comps)
            warnings.warn(msg + "; projected away", RuntimeWarning, stacklevel=2)
    solver = _ModeSolver(param, T, g.n_t, g.n_theta, _bordered_modes(param, T, g.n_t, solver_modes))
    phi_half, _ = solver.solve(g.half())
    return GridFunction.from_half(phi_half, T)


# ---------------------------------------------------------------------------
# explicit mode-0 inverse


def _cumulative_integrals(func, nodes, order=16):
    """``int_0^{nodes[i]} func`` by Gauss–Legendre on each gap (nodes sorted, nodes[0] = 0)."""
    x, w = gl_nodes(order)
    lo, hi = nodes[:-1], nodes[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    pieces = (np.asarray(func(pts)) @ w) * half
    return np.concatenate([[0.0], np.cumsum(pieces)])


def mode0_wronskian(param):
    """``w v' - w' v`` for the even/odd mode-0 pair (``1 + 2a``; 1 at the cylinder)."""
    param = _as_param(param)
    w, v = fundamental_pair(param, 0, 0.0)
    dw, dv = fundamental_pair_derivatives(param, 0, 0.0)
    return float(w * dv - dw * v)


def explicit_mode0_inverse(param, T, g, t):
    """Variation-of-parameters solution of ``(phi'' + 2 p_a phi) / (2 x_a^2) = g``, ``phi(+-T) = 0``.

    Parameters
    ----------
    param : DelaunayParam or float
    T : float
        Must avoid the mode-0 degeneracy set.
    g : callable or tuple
        Either an even function of ``t`` or a pair ``(nodes, values)`` of
        samples on ``[0, T]`` (interpolated by a degree-5 spline).
    t : array_like
        Evaluation points in ``[0, T]``.
    """
    param = _as_param(param)
    t = np.asarray(t, dtype=float)
    w_T, v_T = (float(val) for val in fundamental_pair(param, 0, T))
    w_scale = float(np.max(np.abs(fundamental_pair(param, 0, np.linspace(0.0, T, 257))[0])))
    if abs(w_T) <= KERNEL_TOL * w_scale:
        raise ObstructionError(f"T={T} lies in the mode-0 degeneracy set; no explicit inverse")
    if callable(g):
        gfun = g
    else:
        nodes, values = (np.asarray(v, dtype=float) for v in g)
        gfun = make_interp_spline(nodes, values, k=min(5, nodes.size - 1))

    def weighted(kind):
        def f(s):
            w, v = fundamental_pair(param, 0, s)
            x = profile_jet(param, s)["x"]
            return x * x * gfun(s) * (w if kind == 0 else v)
        return f

    flat = t.ravel()
    order = np.argsort(flat)
    nodes = np.concatenate([[0.0], flat[order], [T]])
    iw = _cumulative_integrals(weighted(0), nodes)
    iv = _cumulative_integrals(weighted(1), nodes)
    iw_t, iv_t = np.empty_like(flat), np.empty_like(flat)
    iw_t[order], iv_t[order] = iw[1:-1], iv[1:-1]
    iw_T, iv_T = iw[-1], iv[-1]
    w, v = fundamental_pair(param, 0, flat)
    coef = (-iw_T * v_T + iv_T * w_T) / w_T
    out = 2.0 / mode0_wronskian(param) * (iw_t * v - iv_t * w + coef * w)
    return out.reshape(t.shape)


# ---------------------------------------------------------------------------
# curvature of a normal graph on the grid


class _GraphGeometry:
    """Profile data and frame derivatives on ``t_nodes x theta`` for the residual."""

    def __init__(self, param, T, n_t, theta):
        self.param = param
        self.T = float(T)
        self.n_t = n_t
        self.spacing = 2.0 * T / n_t
        self.t = grid.t_nodes(T, n_t)
        self.theta = np.asarray(theta, dtype=float)
        self.d1 = grid.derivative_matrix(n_t, self.spacing, 1)
        self.d2 = grid.derivative_matrix(n_t, self.spacing, 2)
        jet = profile_jet(param, self.t)
        x, dx, ddx, dddx = jet["x"], jet["dx"], jet["ddx"], jet["dddx"]
        z, dz, ddz = jet["z"], jet["dz"], jet["ddz"]
        g = param.gamma
        # N = (-A cos, -A sin, B) with A = z'/x = x - g/x and B = x'/x
        a0 = dz / x
        a1 = dx * (1.0 + g / x ** 2)
        a2 = ddx * (1.0 + g / x ** 2) - 2.0 * g * dx ** 2 / x ** 3
        b0 = dx / x
        b1 = ddx / x - (dx / x) ** 2
        b2 = dddx / x - 3.0 * dx * ddx / x ** 2 + 2.0 * dx ** 3 / x ** 3
        c, s = np.cos(self.theta)[None, :], np.sin(self.theta)[None, :]
        col = lambda v: v[:, None]  # noqa: E731
        zero = np.zeros((x.size, self.theta.size))

        def vec(e1, e2, e3):
            return np.stack(np.broadcast_arrays(e1, e2, e3, zero)[:3], axis=-1)

        self.x = x
        self.base = vec(col(x) * c, col(x) * s, col(z))
        self.base_t = vec(col(dx) * c, col(dx) * s, col(dz))
        self.base_h = vec(-col(x) * s, col(x) * c, 0.0)
        self.base_tt = vec(col(ddx) * c, col(ddx) * s, col(ddz))
        self.base_th = vec(-col(dx) * s, col(dx) * c, 0.0)
        self.base_hh = vec(-col(x) * c, -col(x) * s, 0.0)
        self.n = vec(-col(a0) * c, -col(a0) * s, col(b0))
        self.n_t = vec(-col(a1) * c, -col(a1) * s, col(b1))
        self.n_tt = vec(-col(a2) * c, -col(a2) * s, col(b2))
        self.n_h = vec(col(a0) * s, -col(a0) * c, 0.0)
        self.n_th = vec(col(a1) * s, -col(a1) * c, 0.0)
        self.n_hh = vec(col(a0) * c, col(a0) * s, 0.0)
        self.area_gamma = x ** 2 - g ** 2 / x ** 2

    def surface(self, phi, phi_t, phi_tt, phi_h, phi_th, phi_hh, p=0.0, q=0.0):
        """Position and mean curvature of ``X_a + p e1 + q e2 + phi N_a``."""
        f = phi[..., None]
        pos = self.base + f * self.n
        pos = pos + np.array([p, q, 0.0])
        xt = self.base_t + phi_t[..., None] * self.n + f * self.n_t
        xh = self.base_h + phi_h[..., None] * self.n + f * self.n_h
        xtt = self.base_tt + phi_tt[..., None] * self.n + 2.0 * phi_t[..., None] * self.n_t + f * self.n_tt
        xth = (self.base_th + phi_th[..., None] * self.n + phi_t[..., None] * self.n_h
               + phi_h[..., None] * self.n_t + f * self.n_th)
        xhh = self.base_hh + phi_hh[..., None] * self.n + 2.0 * phi_h[..., None] * self.n_h + f * self.n_hh
        return pos, curvature_from_derivatives(xt, xh, xtt, xth, xhh)

    def check_graph(self, phi):
        """Area factor ``1 - 2 phi + phi^2 (x^2 - gamma^2 / x^2) / x^2`` must stay positive."""
        factor = 1.0 - 2.0 * phi + phi ** 2 * (self.area_gamma / self.x ** 2)[:, None]
        if np.any(factor <= 0.0):
            raise DegenerateGraphError("normal graph degenerates (area factor <= 0)")


def normal_graph_residual(param, T, field, eps, phi, p=0.0, q=0.0):
    """``M(U + phi N_a) - H_eps(U + phi N_a)`` on the full grid.

    Derivatives of ``phi``: 4th-order differences in t, spectral in theta.
    """
    param = _as_param(param)
    field = _as_field(field)
    geom = _GraphGeometry(param, T, phi.n_t, phi.theta)
    return _residual(geom, field, eps, phi.values, p, q)


def _residual(geom, field, eps, values, p, q):
    geom.check_graph(values)
    phi_t = geom.d1 @ values
    phi_tt = geom.d2 @ values
    phi_h = grid.theta_derivative(values, 1)
    phi_hh = grid.theta_derivative(values, 2)
    phi_th = geom.d1 @ phi_h
    pos, curv = geom.surface(values, phi_t, phi_tt, phi_h, phi_th, phi_hh, p, q)
    return curv - field(eps, pos[..., 0], pos[..., 1], pos[..., 2])


def _interior_sup(res):
    return float(np.max(np.abs(res[1:-1])))


def independent_residual(solution, field, samples=200, seed=0, h=None):
    """Sup of ``M - H_eps`` (minus multiplier terms) at random interior points.

    Mean curvature comes from :func:`pmcsurf.delaunay.mean_curvature` applied
    to the interpolated surface, not from the solver's discretization.
    """
    field = _as_field(field)
    rng = np.random.default_rng(seed)
    T = solution.T
    t = rng.uniform(-0.95 * T, 0.95 * T, samples)
    theta = rng.uniform(-np.pi, np.pi, samples)
    patch = solution.patch()
    h = 2e-3 * min(solution.param.tau, T) if h is None else h
    curv = mean_curvature(patch, t, theta, h=h)
    pos = patch(t, theta)
    res = curv - field(solution.eps, pos[..., 0], pos[..., 1], pos[..., 2])
    if solution.lambda1 or solution.lambda2:
        w1 = w_mode(solution.param, 1, t)
        res = res - w1 * (solution.lambda1 * np.cos(theta) + solution.lambda2 * np.sin(theta))
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# Newton loops


def _require_even_field(field):
    if not field.even_in_z:
        raise FieldError(f"field {field.text!r} must be even in z for even-in-t solutions")


def _chord_newton(residual, solve, state, tol, max_iter):
    """Chord Newton with residual backtracking.

    ``residual(state)`` returns the full-grid residual; ``solve(res)`` the
    correction (same structure as ``state``). States are tuples of arrays.
    """
    res = residual(state)
    norm = _interior_sup(res)
    iterations = 0
    while norm > tol:
        if iterations >= max_iter:
            raise NumericalFailure(f"Newton did not converge in {max_iter} steps (residual {norm:.3g})")
        step = solve(res)
        iterations += 1
        damping = 1.0
        while True:
            trial = tuple(s + damping * d for s, d in zip(state, step))
            try:
                trial_res = residual(trial)
                trial_norm = _interior_sup(trial_res)
            except DegenerateGraphError:
                trial_norm = math.inf
            if trial_norm < norm:
                break
            damping *= 0.5
            if damping < _MIN_DAMPING:
                raise NumericalFailure(f"line search stalled at residual {norm:.3g}")
        state, res, norm = trial, trial_res, trial_norm
    return state, norm, iterations


def _obstruction_at(param, T, field, p, q):
    def integrand(t, theta):
        jet = profile_jet(param, t)
        x = jet["x"]
        w = fundamental_pair(param, 0, t)[0]
        h = field.htilde(x * np.cos(theta) + p, x * np.sin(theta) + q, jet["z"])
        return x * x * w * h

    return float(_adaptive_integral(integrand, T)[0])


def _check_nondegenerate(param, T, field, p, q):
    kernel = kernel_basis(param, T)
    if 0 in kernel.modes:
        value = _obstruction_at(param, T, field, p, q)
        raise ObstructionError(
            f"T={T} lies in the mode-0 degeneracy set; nondegenerate solve refused "
            f"(obstruction integral {value:.6g})", value)
    if kernel.dim:
        raise DomainError(f"T={T} is degenerate in modes {kernel.modes}; use the Lyapunov-Schmidt solver")


def _continuation(run, eps, step):
    """Run at ``eps`` directly, else march from 0 in increments of ``step``."""
    try:
        return run(eps, None)
    except NumericalFailure:
        if abs(eps) <= step:
            raise
    n = int(math.ceil(abs(eps) / step))
    warm, total, reached = None, 0, 0.0
    for k in range(1, n + 1):
        target = eps * k / n
        try:
            warm, norm, its = run(target, warm)
        except NumericalFailure as exc:
            err = NumericalFailure(f"continuation stopped at eps={reached:.6g} (target {eps}): {exc}")
            err.eps_reached = reached
            raise err from exc
        total += its
        reached = target
    return warm, norm, total


def solve_nondegenerate(param, T, field, eps, p=0.0, q=0.0, tol=SOLVER_TOL, max_iter=50,
                        n_t=DEFAULT_NT, n_theta=DEFAULT_NTHETA, continuation_step=CONTINUATION_STEP):
    """Newton solve of the Dirichlet problem at a nondegenerate half-length.

    Raises
    ------
    ObstructionError
        ``T`` is in the mode-0 degeneracy set; carries the obstruction integral.
    DomainError
        ``T`` is degenerate in another mode, or the field is not even in z.
    NumericalFailure
        No convergence, even with continuation in ``eps``.
    """
    param = _as_param(param)
    field = _as_field(field)
    _require_even_field(field)
    grid.check_shape(n_t, n_theta)
    _check_nondegenerate(param, T, field, p, q)
    geom = _GraphGeometry(param, T, n_t, grid.theta_nodes(n_theta))
    solver = _ModeSolver(param, T, n_t, n_theta)
    mid = n_t // 2
    ext = grid.even_extension(n_t)

    def run(eps_value, warm):
        def residual(state):
            return _residual(geom, field, eps_value, ext @ state[0], p, q)

        def solve(res):
            return (solver.solve(-res[mid:n_t])[0],)

        start = (np.zeros((mid, n_theta)),) if warm is None else warm
        return _chord_newton(residual, solve, start, tol, max_iter)

    (phi_half,), norm, its = _continuation(run, eps, continuation_step)
    return PMCSolution(param, float(T), float(eps), float(p), float(q), GridFunction.from_half(phi_half, T),
                       0.0, 0.0, norm, its, "nondegenerate", float(eps))


def _require_axisymmetric(field, samples=64, seed=11):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2.0, 2.0, size=(4, samples))
    eps = rng.uniform(-1.0, 1.0, samples)
    a = field(eps, pts[0], pts[1], pts[2])
    b = field(eps, pts[3], -pts[0], pts[2])
    if np.max(np.abs(a - b)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
        raise FieldError(f"field {field.text!r} depends on x or y; the axisymmetric path needs H(z) only")


def solve_axisymmetric(param, T, field, eps, tol=SOLVER_TOL, max_iter=50, n_t=DEFAULT_NT,
                       n_theta=DEFAULT_NTHETA, continuation_step=CONTINUATION_STEP):
    """Newton solve for ``phi = phi(t)`` with the explicit mode-0 inverse.

    Needs only ``T`` outside the mode-0 degeneracy set, so it also runs at
    half-lengths degenerate in mode 1.
    """
    param = _as_param(param)
    field = _as_field(field)
    _require_even_field(field)
    _require_axisymmetric(field)
    grid.check_shape(n_t, n_theta)
    w_T = float(fundamental_pair(param, 0, T)[0])
    w_scale = float(np.max(np.abs(fundamental_pair(param, 0, np.linspace(0.0, T, 257))[0])))
    if abs(w_T) <= KERNEL_TOL * w_scale:
        raise ObstructionError(f"T={T} lies in the mode-0 degeneracy set; axisymmetric solve refused",
                               _obstruction_at(param, T, field, 0.0, 0.0))
    geom = _GraphGeometry(param, T, n_t, np.zeros(1))
    mid = n_t // 2
    nodes = geom.t[mid:]

    def run(eps_value, warm):
        def residual(state):
            prof = np.concatenate([state[0][:0:-1], state[0]])[:, None]
            zero = np.zeros_like(prof)
            pos, curv = geom.surface(prof, geom.d1 @ prof, geom.d2 @ prof, zero, zero, zero)
            geom.check_graph(prof)
            return curv - field(eps_value, pos[..., 0], pos[..., 1], pos[..., 2])

        def solve(res):
            step = explicit_mode0_inverse(param, T, (nodes, -res[mid:, 0]), nodes)
            step[-1] = 0.0
            return (step,)

        def polish(res):
            step = lu_solve(discrete_mode0(), 2.0 * x_half ** 2 * -res[mid:-1, 0])
            return (np.append(step, 0.0),)

        start = (np.zeros(nodes.size),) if warm is None else warm
        state, norm, its = _chord_newton(residual, solve, start, max(tol, _EXPLICIT_FLOOR), max_iter)
        if norm > tol:
            # the continuous inverse stops contracting near the discretization floor
            state, norm, more = _chord_newton(residual, polish, state, tol, max_iter)
            its += more
        return state, norm, its

    cache = {}

    def discrete_mode0():
        if "lu" not in cache:
            cache["lu"] = lu_factor(discrete_jacobi(param, T, n_t, 8).mode_matrix(0))
        return cache["lu"]

    x_half = np.asarray(profile_jet(param, nodes[:-1])["x"])

    (prof,), norm, its = _continuation(run, eps, continuation_step)
    full = np.concatenate([prof[:0:-1], prof])
    full[0] = full[-1] = 0.0
    phi = GridFunction(np.repeat(full[:, None], n_theta, axis=1), T)
    return PMCSolution(param, float(T), float(eps), 0.0, 0.0, phi, 0.0, 0.0, norm, its, "axisym", float(eps))


def ls_constant(param, T):
    """``C_0 = pi int_{-T}^{T} x_a^2 w_{a,1}^2 dt``, the normalization of the multipliers."""
    param = _as_param(param)

    def f(t):
        x = profile_jet(param, t)["x"]
        return x * x * w_mode(param, 1, t) ** 2

    from .quadrature import integrate
    return 2.0 * math.pi * integrate(f, 0.0, T)


def _check_ls(param, T):
    if not 0.0 < param.a <= 0.5 * (math.sqrt(3.0) - 1.0) + 1e-12:
        raise DomainError("Lyapunov-Schmidt mode needs a in (0, (sqrt(3) - 1) / 2]")
    kernel = kernel_basis(param, T)
    if kernel.dim != 2 or kernel.modes != (1,):
        raise DomainError(f"Lyapunov-Schmidt mode needs a kernel spanned by w_1 cos, w_1 sin; got {kernel.labels}")


def solve_lyapunov_schmidt(param, T, field, eps, p=0.0, q=0.0, tol=SOLVER_TOL, max_iter=50,
                           n_t=DEFAULT_NT, n_theta=DEFAULT_NTHETA, warm=None):
    """Solve ``M - H_eps = lambda1 w_1 cos + lambda2 w_1 sin`` with ``phi`` orthogonal to the kernel.

    The multipliers enter as bordered unknowns of the mode-1 block, so the
    two orthogonality conditions hold exactly at the discrete level.
    """
    param = _as_param(param)
    field = _as_field(field)
    _require_even_field(field)
    grid.check_shape(n_t, n_theta)
    _check_ls(param, T)
    geom = _GraphGeometry(param, T, n_t, grid.theta_nodes(n_theta))
    bordered = _bordered_modes(param, T, n_t, (1,))
    solver = _ModeSolver(param, T, n_t, n_theta, bordered)
    mid = n_t // 2
    ext = grid.even_extension(n_t)
    w1 = np.asarray(w_mode(param, 1, geom.t))[:, None]
    ct, st = np.cos(geom.theta)[None, :], np.sin(geom.theta)[None, :]

    def residual(state):
        phi_half, lam = state
        res = _residual(geom, field, eps, ext @ phi_half, p, q)
        return res - w1 * (lam[0] * ct + lam[1] * st)

    def solve(res):
        step, mult = solver.solve(-res[mid:n_t])
        return step, np.array(mult[1])

    start = (np.zeros((mid, n_theta)), np.zeros(2)) if warm is None else warm
    (phi_half, lam), norm, its = _chord_newton(residual, solve, start, tol, max_iter)
    return PMCSolution(param, float(T), float(eps), float(p), float(q), GridFunction.from_half(phi_half, T),
                       float(lam[0]), float(lam[1]), norm, its, "lyapunov-schmidt", float(eps))


def kernel_projections(solution):
    """``(int x^2 phi w_1 cos, int x^2 phi w_1 sin)`` with the solver's quadrature."""
    phi = solution.phi
    weights = _half_weights(phi.n_t, phi.T)
    t_half = phi.t[phi.n_t // 2:phi.n_t]
    x = profile_jet(solution.param, t_half)["x"]
    v = np.asarray(w_mode(solution.param, 1, t_half))
    cos_c, sin_c = grid.fourier_split(phi.half())
    return (math.pi * float(weights @ (x * x * v * cos_c[:, 1])),
            math.pi * float(weights @ (x * x * v * sin_c[:, 1])))


def solve_with_translation(param, T, field, eps, seed=(0.0, 0.0), tol=SOLVER_TOL, max_iter=20,
                           n_t=DEFAULT_NT, n_theta=DEFAULT_NTHETA):
    """Outer Newton on ``(p, q)`` driving the Lyapunov–Schmidt multipliers to zero.

    The Jacobian of ``(lambda1, lambda2)`` is approximated by
    ``eps / C_0`` times the Melnikov Hessian, refreshed by Broyden updates.

    Raises
    ------
    NumericalFailure
        On divergence; the exception carries ``last`` (the final iterate).
    """
    param = _as_param(param)
    field = _as_field(field)
    pq = np.array(seed, dtype=float)
    if eps == 0.0:
        _check_ls(param, T)
        zero = GridFunction(np.zeros((n_t + 1, n_theta)), T)
        return PMCSolution(param, float(T), 0.0, float(pq[0]), float(pq[1]), zero, 0.0, 0.0, 0.0, 0,
                           "translation", 0.0)
    c0 = ls_constant(param, T)
    jac = eps / c0 * melnikov_hessian(param, T, field, *pq)
    sol = solve_lyapunov_schmidt(param, T, field, eps, *pq, tol=tol, n_t=n_t, n_theta=n_theta)
    lam = np.array([sol.lambda1, sol.lambda2])
    total = sol.iterations
    for _ in range(max_iter):
        if np.max(np.abs(lam)) <= tol:
            return PMCSolution(param, sol.T, sol.eps, float(pq[0]), float(pq[1]), sol.phi, sol.lambda1,
                               sol.lambda2, sol.residual_inf, total, "translation", sol.eps)
        step = -np.linalg.solve(jac, lam)
        limit = 0.5 * param.tau
        if np.linalg.norm(step) > limit:
            step *= limit / np.linalg.norm(step)
        pq = pq + step
        sol = solve_lyapunov_schmidt(param, T, field, eps, *pq, tol=tol, n_t=n_t, n_theta=n_theta)
        total += sol.iterations
        new_lam = np.array([sol.lambda1, sol.lambda2])
        jac = jac + np.outer(new_lam - lam - jac @ step, step) / (step @ step)
        lam = new_lam
    err = NumericalFailure(f"outer Newton on (p, q) did not converge (|lambda| = {np.max(np.abs(lam)):.3g})")
    err.last = sol
    raise err


# ---------------------------------------------------------------------------
# obstruction and inverse-norm diagnostics


def obstruction_integral(param, k, field, p0=0.0, q0=0.0):
    """``int x_a^2 w_{a,0} htilde(X_a + p0 e1 + q0 e2)`` over ``[-T_{a,k}, T_{a,k}] x S^1``."""
    param = _as_param(param)
    field = _as_field(field)
    return _obstruction_at(param, find_T0(param, k), field, p0, q0)


def limit_w0(t):
    """``-1 + t tanh(t)``, the mode-0 solution of the limiting sphere chain."""
    return -1.0 + t * np.tanh(t)


def find_limit_T0():
    """Positive zero of ``-1 + t tanh t`` (Brent on ``(1, 2)``)."""
    return float(brentq(limit_w0, 1.0, 2.0, xtol=1e-15, rtol=8.9e-16, maxiter=200))


@dataclass(frozen=True)
class InverseNormProbe:
    """Sup-norms of the mode-0 inverse applied to one right-hand side.

    ``overlap`` is ``int_0^{T0} g (1 - s tanh s) sech^2 s ds``; when it is
    (numerically) zero the probe is ``inconclusive``.
    """

    T: float
    T0: float
    overlap: float
    rows: tuple
    inconclusive: bool

    @property
    def strictly_increasing(self):
        norms = [n for _, n in self.rows]
        return all(b > a for a, b in zip(norms, norms[1:]))


def _default_profile(t):
    return np.ones_like(np.asarray(t, dtype=float))


def inverse_norm_probe(a_list, T, g=None, samples=2001):
    """Apply the explicit mode-0 inverse to ``g`` for each ``a`` and report ``sup |phi|`` on ``[0, T]``.

    Parameters
    ----------
    a_list : sequence of float
    T : float
        Must exceed the limiting root ``T0``.
    g : callable, optional
        Even profile; defaults to ``g = 1``.
    """
    g = _default_profile if g is None else g
    T0 = find_limit_T0()
    if T <= T0:
        raise DomainError(f"T={T} must exceed T0={T0:.12g}")
    from .quadrature import integrate
    overlap = integrate(lambda s: g(s) * (1.0 - s * np.tanh(s)) / np.cosh(s) ** 2, 0.0, T0)
    t = np.linspace(0.0, T, samples)
    rows = []
    for a in a_list:
        phi = explicit_mode0_inverse(a, T, g, t)
        rows.append((float(a), float(np.max(np.abs(phi)))))
    return InverseNormProbe(float(T), T0, float(overlap), tuple(rows), abs(overlap) <= 1e-12)


def inverse_norm_sweep(param, T_values, g=None, samples=1001):
    """Rows ``(T, sup |phi|)`` of the explicit inverse along a sweep in ``T``.

    Half-lengths in the mode-0 degeneracy set give ``inf``.
    """
    param = _as_param(param)
    g = _default_profile if g is None else g
    rows = []
    for T in T_values:
        try:
            phi = explicit_mode0_inverse(param, T, g, np.linspace(0.0, T, samples))
            rows.append((float(T), float(np.max(np.abs(phi)))))
        except ObstructionError:
            rows.append((float(T), math.inf))
    return rows
