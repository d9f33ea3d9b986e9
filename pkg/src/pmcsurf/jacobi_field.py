"""Fundamental solutions of the mode-j Hill equation and the Jacobi operator.

For ``phi = u(t) cos(j theta)`` the Jacobi operator of the Delaunay surface,
``L phi = (phi_tt + phi_thetatheta + 2 p_a phi) / (2 x_a^2)``, vanishes iff
``u'' = (j^2 - 2 p_a) u``. ``w_{a,j}`` is the even solution with
``w(0) = (-1)^(j+1)``; for ``j = 0, 1`` it and an odd partner ``v_{a,j}`` have
closed forms in the profile.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import svdvals

from . import grid
from .delaunay import DelaunayParam, make_param, roulette, roulette_da
from .errors import DomainError, NumericalFailure

HILL_RTOL = 1e-12
HILL_ATOL = 1e-14
PARABOLIC_TOL = 1e-7
SAMPLES_PER_TAU = 400


def _as_param(param):
    return param if isinstance(param, DelaunayParam) else make_param(param)


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def w0_closed(param, t):
    """Closed form of ``w_{a,0}`` in the profile, valid for ``a != -1/2``.

    ``(1 + 2 gamma - 2 x^2 + (x'/x)(2 z - t)) / (1 + 2a)``.
    """
    param = _as_param(param)
    if param.is_cylinder:
        raise DomainError("closed form of w_{a,0} divides by 1+2a; at a=-1/2 use fundamental_pair")
    r = roulette(param, t)
    t = np.asarray(r.t)
    out = (1.0 + 2.0 * param.gamma - 2.0 * r.x ** 2 + (r.dx / r.x) * (2.0 * r.z - t)) / (1.0 + 2.0 * param.a)
    return _scalar_or_array(out)


def w0_from_derivatives(param, t):
    """``w_{a,0} = -(z'/x) dx/da + (x'/x) dz/da`` from the a-derivatives of the profile."""
    param = _as_param(param)
    r = roulette(param, t)
    dx_da, dz_da = roulette_da(param, t)
    return _scalar_or_array(-(r.dz / r.x) * dx_da + (r.dx / r.x) * dz_da)


def fundamental_pair(param, j, t):
    """Even and odd closed-form solutions ``(w_{a,j}, v_{a,j})`` for ``j`` in {0, 1}."""
    param = _as_param(param)
    t = np.asarray(t, dtype=float)
    if j == 0:
        if param.is_cylinder:
            return _scalar_or_array(-np.cos(t)), _scalar_or_array(-np.sin(t))
        r = roulette(param, t)
        return w0_closed(param, t), _scalar_or_array(r.dx / r.x)
    if j == 1:
        r = roulette(param, t)
        return _scalar_or_array(r.dz / r.x), _scalar_or_array((r.x * r.dx + r.z * r.dz) / r.x)
    raise DomainError("closed-form fundamental pairs exist for j = 0 and j = 1 only")


def fundamental_pair_derivatives(param, j, t):
    """t-derivatives ``(w', v')`` of :func:`fundamental_pair`."""
    param = _as_param(param)
    t = np.asarray(t, dtype=float)
    r = roulette(param, t)
    g = param.gamma
    x, dx, z, dz = (np.asarray(v) for v in (r.x, r.dx, r.z, r.dz))
    ddx = (1.0 + 2.0 * g) * x - 2.0 * x ** 3
    if j == 0:
        if param.is_cylinder:
            return _scalar_or_array(np.sin(t)), _scalar_or_array(-np.cos(t))
        # differentiate the closed form of w_{a,0}
        dv = ddx / x - (dx / x) ** 2
        num_d = -4.0 * x * dx + dv * (2.0 * z - t) + (dx / x) * (2.0 * dz - 1.0)
        return _scalar_or_array(num_d / (1.0 + 2.0 * param.a)), _scalar_or_array(dv)
    if j == 1:
        dw = dx * (1.0 + g / x ** 2)
        # v = x' + z z'/x
        dv = ddx + (dz * dz + z * 2.0 * x * dx) / x - z * dz * dx / x ** 2
        return _scalar_or_array(dw), _scalar_or_array(dv)
    raise DomainError("closed-form fundamental pairs exist for j = 0 and j = 1 only")


@dataclass(frozen=True, eq=False)
class FundamentalSolution:
    """Sampled solution of ``u'' = (j^2 - 2 p_a) u`` on ``[0, t_max]``.

    Attributes
    ----------
    j : int
    kind : str
        ``"even"`` (``u'(0) = 0``), ``"odd"`` (``u(0) = 0``) or ``"general"``.
    t, value, derivative : ndarray
        Uniform samples on ``[0, t_max]``.
    source : str
        ``"ode"`` or ``"closed-form"``.

    Calling the object evaluates the solution by cubic Hermite
    interpolation; even and odd solutions extend to negative ``t`` by parity.
    """

    j: int
    kind: str
    t: np.ndarray
    value: np.ndarray
    derivative: np.ndarray
    source: str = "ode"

    def __post_init__(self):
        spline = CubicHermiteSpline(self.t, self.value, self.derivative, extrapolate=False)
        object.__setattr__(self, "_spline", spline)

    @property
    def t_max(self):
        return float(self.t[-1])

    def _fold(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "general" and np.any(t < 0):
            raise DomainError("general solutions are only sampled for t >= 0")
        if np.any(np.abs(t) > self.t_max * (1 + 1e-12)):
            raise DomainError(f"t outside the sampled range [-{self.t_max}, {self.t_max}]")
        sign = np.where((t < 0) & (self.kind == "odd"), -1.0, 1.0)
        return np.minimum(np.abs(t), self.t_max), sign, t < 0

    def __call__(self, t):
        s, sign, _ = self._fold(t)
        return _scalar_or_array(sign * self._spline(s))

    def slope(self, t):
        s, sign, neg = self._fold(t)
        flip = np.where(neg, -1.0, 1.0)
        return _scalar_or_array(sign * flip * self._spline(s, 1))

    def wronskian(self, other):
        """``u v' - u' v`` at the common sample points."""
        return self.value * other.derivative - self.derivative * other.value


def _hill_rhs(param, j):
    g = param.gamma
    c = 1.0 + 2.0 * g
    jj = float(j * j)

    def rhs(_, y):
        x, dx = y[0], y[1]
        p2 = 2.0 * (x * x + g * g / (x * x))
        out = np.empty_like(y)
        out[0] = dx
        out[1] = c * x - 2.0 * x ** 3
        out[2::2] = y[3::2]
        out[3::2] = (jj - p2) * y[2::2]
        return out

    return rhs


def hill_ode(param, j, t_end, init=None, samples_per_tau=SAMPLES_PER_TAU):
    """Integrate the mode-j Hill equation from ``t = 0``.

    The profile ``x_a`` is integrated alongside from its own ODE, so the
    result does not depend on the elliptic-function closed forms.

    Parameters
    ----------
    param : DelaunayParam or float
    j : int
        Fourier mode, ``j >= 0``.
    t_end : float
        Right end of the integration interval.
    init : (float, float), optional
        ``(u(0), u'(0))``; defaults to ``((-1)^(j+1), 0)``, i.e. ``w_{a,j}``.

    Returns
    -------
    FundamentalSolution
    """
    param = _as_param(param)
    if j < 0 or int(j) != j:
        raise DomainError("mode j must be a nonnegative integer")
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    j = int(j)
    if init is None:
        init = ((-1.0) ** (j + 1), 0.0)
    u0, du0 = (float(v) for v in init)
    kind = "even" if du0 == 0.0 else ("odd" if u0 == 0.0 else "general")
    n = max(2001, int(math.ceil(samples_per_tau * t_end / param.tau)) + 1)
    t_eval = np.linspace(0.0, t_end, n)
    sol = solve_ivp(_hill_rhs(param, j), (0.0, t_end), [1.0 + param.a, 0.0, u0, du0],
                    method="DOP853", t_eval=t_eval, rtol=HILL_RTOL, atol=HILL_ATOL)
    if sol.status != 0:
        raise NumericalFailure(f"Hill integration failed for j={j}: {sol.message}")
    return FundamentalSolution(j, kind, t_eval, sol.y[2].copy(), sol.y[3].copy(), "ode")


@lru_cache(maxsize=128)
def _cached_hill(param, j, periods):
    return hill_ode(param, j, periods * param.tau)


def mode_solution(param, j, t_max):
    """Cached ``w_{a,j}`` sampled at least on ``[0, t_max]``.

    Sample ranges are rounded up to a whole number of half-periods (at
    least eight) so repeated queries share a cache entry.
    """
    param = _as_param(param)
    periods = max(8, int(math.ceil(t_max / param.tau * (1 + 1e-12))))
    return _cached_hill(param, int(j), periods)


def w_mode(param, j, t):
    """``w_{a,j}(t)``: closed form for ``j <= 1``, cached Hill ODE otherwise."""
    param = _as_param(param)
    if j <= 1:
        return fundamental_pair(param, j, t)[0]
    t = np.asarray(t, dtype=float)
    sol = mode_solution(param, j, float(np.max(np.abs(t))) if t.size else 0.0)
    return sol(t)


@dataclass(frozen=True)
class MonodromyReport:
    """Transfer matrix of the mode-j Hill equation over ``[0, 2 tau_a]``.

    ``classification`` is ``"hyperbolic"`` (``|trace| > 2``, exponent mu),
    ``"parabolic"`` (``|trace| = 2`` within tolerance, no exponent) or
    ``"elliptic"`` (``|trace| < 2``, exponent sigma).
    """

    j: int
    matrix: np.ndarray
    trace: float
    determinant: float
    classification: str
    exponent: float | None


def monodromy(param, j, tol=PARABOLIC_TOL):
    """Integrate the canonical basis over ``[0, 2 tau_a]`` and classify by trace."""
    param = _as_param(param)
    period = 2.0 * param.tau
    sol = solve_ivp(_hill_rhs(param, int(j)), (0.0, period), [1.0 + param.a, 0.0, 1.0, 0.0, 0.0, 1.0],
                    method="DOP853", rtol=HILL_RTOL, atol=HILL_ATOL)
    if sol.status != 0:
        raise NumericalFailure(f"monodromy integration failed: {sol.message}")
    end = sol.y[:, -1]
    mat = np.array([[end[2], end[4]], [end[3], end[5]]])
    tr = float(np.trace(mat))
    det = float(np.linalg.det(mat))
    if abs(abs(tr) - 2.0) < tol:
        kind, exponent = "parabolic", None
    elif abs(tr) > 2.0:
        kind, exponent = "hyperbolic", math.acosh(abs(tr) / 2.0) / period
    else:
        kind, exponent = "elliptic", math.acos(tr / 2.0) / period
    return MonodromyReport(int(j), mat, tr, det, kind, exponent)


def zero_gap_bound(param, j):
    """Lower bound on the distance between consecutive zeros of ``w_{a,j}``.

    ``pi / sqrt(max (2 p_a - j^2))`` with ``max p_a = 1 + 2 gamma``; ``None``
    when ``2 p_a <= j^2`` everywhere, in which case no two zeros exist.
    """
    param = _as_param(param)
    peak = 2.0 * (1.0 + 2.0 * param.gamma) - j * j
    if peak <= 0.0:
        return None
    return math.pi / math.sqrt(peak)


def max_kernel_mode(param):
    """Largest ``j`` with ``j^2 < 2 (1 + 2 gamma)``; modes above it have no zeros."""
    param = _as_param(param)
    bound = 2.0 * (1.0 + 2.0 * param.gamma)
    j = int(math.floor(math.sqrt(bound)))
    while j * j >= bound:
        j -= 1
    return j


class DiscreteJacobi:
    """Discretized Jacobi operator on even Dirichlet grid functions.

    Fourier modes in theta decouple; each mode acts on the half-grid
    ``t = 0, h, ..., T - h`` through the folded 4th-order second-derivative
    matrix. ``mode_matrix(j)`` is ``2 x^2 L`` restricted to mode ``j``.
    """

    def __init__(self, param, T, n_t, n_theta):
        grid.check_shape(n_t, n_theta)
        if T <= 0:
            raise DomainError("half-length T must be positive")
        self.param = _as_param(param)
        self.T = float(T)
        self.n_t = int(n_t)
        self.n_theta = int(n_theta)
        self.spacing = 2.0 * self.T / self.n_t
        self.t_full = grid.t_nodes(self.T, self.n_t)
        self.t_half = self.t_full[self.n_t // 2:self.n_t]
        self.x_full = np.asarray(roulette(self.param, self.t_full).x)
        self.x_half = self.x_full[self.n_t // 2:self.n_t]
        self.p_half = self.x_half ** 2 + self.param.gamma ** 2 / self.x_half ** 2
        self.d2_half = grid.half_second_derivative(self.n_t, self.spacing)

    @property
    def n_modes(self):
        return self.n_theta // 2 + 1

    def mode_matrix(self, j):
        return self.d2_half + np.diag(2.0 * self.p_half - float(j * j))

    def operator_block(self, j):
        """Matrix of ``L`` on mode ``j`` in half-grid coordinates."""
        return self.mode_matrix(j) / (2.0 * self.x_half ** 2)[:, None]

    def singular_values(self):
        """All singular values of the assembled operator, ascending.

        The real Fourier transform in theta is orthogonal, so these equal the
        singular values of the grid operator on the half-grid values; modes
        with both a cosine and a sine part count twice.
        """
        out = []
        for j in range(self.n_modes):
            sv = svdvals(self.operator_block(j))
            mult = 1 if j == 0 or (self.n_theta % 2 == 0 and j == self.n_theta // 2) else 2
            out.extend(np.repeat(sv, mult))
        return np.sort(np.asarray(out))

    def assembled_matrix(self):
        """Dense matrix of ``L`` on half-grid values, theta index fastest.

        Only practical on small grids; used to check :meth:`singular_values`.
        """
        n_half = self.t_half.size
        eye = np.eye(self.n_theta)
        d2_theta = np.array([grid.theta_derivative(row, 2) for row in eye]).T
        lap = np.kron(self.d2_half, eye) + np.kron(np.eye(n_half), d2_theta)
        pot = np.kron(np.diag(2.0 * self.p_half), eye)
        weight = np.repeat(2.0 * self.x_half ** 2, self.n_theta)
        return (lap + pot) / weight[:, None]


@lru_cache(maxsize=32)
def discrete_jacobi(param, T, n_t, n_theta):
    """Cached :class:`DiscreteJacobi` instance."""
    return DiscreteJacobi(param, T, n_t, n_theta)


def jacobi_apply(param, phi):
    """Apply the Jacobi operator to a grid function.

    Spectral in theta, 4th-order finite differences in t (one-sided near the
    ends), so every row including ``t = +-T`` gets a value.

    Parameters
    ----------
    param : DelaunayParam or float
    phi : GridFunction

    Returns
    -------
    GridFunction
        Not Dirichlet-flagged; even iff ``phi`` is.
    """
    param = _as_param(param)
    d2 = grid.derivative_matrix(phi.n_t, phi.spacing, 2)
    x = np.asarray(roulette(param, phi.t).x)
    p = x * x + param.gamma ** 2 / (x * x)
    vals = phi.values
    lap = d2 @ vals + grid.theta_derivative(vals, 2)
    out = (lap + 2.0 * p[:, None] * vals) / (2.0 * x * x)[:, None]
    if phi.even:
        out = 0.5 * (out + out[::-1])
    return grid.GridFunction(out, phi.T, dirichlet=False, even=phi.even)
