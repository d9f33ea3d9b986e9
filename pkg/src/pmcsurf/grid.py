"""Uniform (t, theta) grids, finite-difference operators and Fourier splitting.

Grids cover ``[-T, T] x [-pi, pi)`` with nodes ``t_i = -T + 2 T i / n_t``
(``i = 0..n_t``) and ``theta_k = -pi + 2 pi k / n_theta``. Functions that are
even in ``t`` and vanish at ``t = +-T`` are represented on the half grid
``t = 0, h, ..., T - h``; the half-grid operators are the full-grid ones
folded by even reflection, so both views agree exactly.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

MIN_POINTS = 8


def fd_weights(offsets, order):
    """Finite-difference weights for derivative ``order`` at offset 0.

    Solves the Vandermonde moment conditions for the given integer offsets
    (unit spacing). Exact for polynomials of degree ``len(offsets) - 1``.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


@lru_cache(maxsize=32)
def _derivative_matrix(n_intervals, order):
    # 4th-order stencils: 5-point central inside, 6-point one-sided near ends
    n = n_intervals + 1
    mat = np.zeros((n, n))
    width = 5 if order == 1 else 6
    for i in range(n):
        if 2 <= i <= n - 3:
            cols = np.arange(i - 2, i + 3)
        elif i < 2:
            cols = np.arange(0, width)
        else:
            cols = np.arange(n - width, n)
        mat[i, cols] = fd_weights(cols - i, order)
    mat.setflags(write=False)
    return mat


def derivative_matrix(n_intervals, spacing, order):
    """4th-order first or second derivative matrix on ``n_intervals + 1`` nodes."""
    if n_intervals < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} intervals in t, got {n_intervals}")
    return _derivative_matrix(int(n_intervals), int(order)) / spacing ** order


def even_extension(n_intervals):
    """Matrix mapping half-grid values (t = 0..T-h) to the full grid.

    Even reflection about ``t = 0`` and zeros at ``t = +-T``.
    """
    half = n_intervals // 2
    ext = np.zeros((n_intervals + 1, half))
    for i in range(1, n_intervals):
        ext[i, abs(i - half)] = 1.0
    return ext


def half_second_derivative(n_intervals, spacing):
    """Second derivative acting on even Dirichlet functions, on the half grid."""
    half = n_intervals // 2
    full = derivative_matrix(n_intervals, spacing, 2)
    return full[half:half + half] @ even_extension(n_intervals)


def check_shape(n_t, n_theta):
    if n_t < MIN_POINTS or n_theta < MIN_POINTS:
        raise DomainError(f"grid too coarse: need at least {MIN_POINTS} points per direction")
    if n_t % 2 or n_theta % 2:
        raise DomainError("grid sizes n_t and n_theta must be even")


def t_nodes(T, n_t):
    return np.linspace(-T, T, n_t + 1)


def theta_nodes(n_theta):
    return -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta


@dataclass(frozen=True)
class GridFunction:
    """Values on the ``(n_t + 1) x n_theta`` grid over ``[-T, T] x [-pi, pi)``.

    Attributes
    ----------
    values : ndarray
    T : float
    dirichlet : bool
        Boundary rows are exactly zero.
    even : bool
        ``value(-t, theta) == value(t, theta)``.
    """

    values: np.ndarray
    T: float
    dirichlet: bool = True
    even: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise DomainError("grid function values must be a 2-d array")
        check_shape(vals.shape[0] - 1, vals.shape[1])
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "T", float(self.T))

    @property
    def n_t(self):
        return self.values.shape[0] - 1

    @property
    def n_theta(self):
        return self.values.shape[1]

    @property
    def t(self):
        return t_nodes(self.T, self.n_t)

    @property
    def theta(self):
        return theta_nodes(self.n_theta)

    @property
    def spacing(self):
        return 2.0 * self.T / self.n_t

    def mesh(self):
        return np.meshgrid(self.t, self.theta, indexing="ij")

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def half(self):
        """Rows ``t = 0, h, ..., T - h`` (the half-grid unknowns)."""
        mid = self.n_t // 2
        return self.values[mid:self.n_t]

    def validate(self, tol=1e-12):
        """Check the declared flags; raises ``DomainError`` on violation."""
        if self.dirichlet and (np.any(self.values[0] != 0.0) or np.any(self.values[-1] != 0.0)):
            raise DomainError("Dirichlet rows at t=+-T are not zero")
        if self.even and np.max(np.abs(self.values - self.values[::-1])) > tol * max(1.0, self.sup()):
            raise DomainError("grid function is not even in t")
        return self

    @classmethod
    def sample(cls, f, T, n_t, n_theta, dirichlet=True, even=True):
        """Sample ``f(t, theta)`` (vectorized) on the grid."""
        check_shape(n_t, n_theta)
        tt, hh = np.meshgrid(t_nodes(T, n_t), theta_nodes(n_theta), indexing="ij")
        vals = np.array(np.broadcast_to(f(tt, hh), tt.shape), dtype=float)
        if even:
            vals = 0.5 * (vals + vals[::-1])
        if dirichlet:
            vals[0] = 0.0
            vals[-1] = 0.0
        return cls(vals, T, dirichlet, even)

    @classmethod
    def from_half(cls, half_values, T):
        """Even Dirichlet function from its half-grid rows."""
        half_values = np.asarray(half_values, dtype=float)
        n_t = 2 * half_values.shape[0]
        return cls(even_extension(n_t) @ half_values, T, True, True)


def _phase(n_modes):
    # the first node sits at theta = -pi, so mode j picks up (-1)^j
    return np.where(np.arange(n_modes) % 2 == 0, 1.0, -1.0)


def fourier_split(values):
    """Real Fourier coefficients along the last axis.

    Returns ``(cos_coef, sin_coef)`` with shape ``(..., n_theta // 2 + 1)`` so
    that ``values = sum_j cos_coef[j] cos(j theta) + sin_coef[j] sin(j theta)``
    on the nodes ``theta_k = -pi + 2 pi k / n_theta``.
    """
    n = values.shape[-1]
    c = np.fft.rfft(values, axis=-1)
    c = c * _phase(c.shape[-1])
    scale = np.full(c.shape[-1], 2.0 / n)
    scale[0] = 1.0 / n
    if n % 2 == 0:
        scale[-1] = 1.0 / n
    return c.real * scale, -c.imag * scale


def fourier_join(cos_coef, sin_coef, n_theta):
    """Inverse of :func:`fourier_split`."""
    scale = np.full(cos_coef.shape[-1], n_theta / 2.0)
    scale[0] = n_theta
    if n_theta % 2 == 0:
        scale[-1] = n_theta
    c = (cos_coef - 1j * sin_coef) * scale * _phase(scale.size)
    return np.fft.irfft(c, n=n_theta, axis=-1)


def theta_derivative(values, order):
    """Spectral derivative in theta of grid values (last axis)."""
    n = values.shape[-1]
    c = np.fft.rfft(values, axis=-1)
    j = np.arange(c.shape[-1])
    factor = (1j * j) ** order
    if order % 2 == 1 and n % 2 == 0:
        factor[-1] = 0.0
    return np.fft.irfft(c * factor, n=n, axis=-1)


def t_weights(n_intervals, spacing):
    """Composite quadrature weights on the uniform t grid.

    Boole's rule (6th order) when ``n_intervals`` is a multiple of 4,
    Simpson's rule otherwise.
    """
    w = np.zeros(n_intervals + 1)
    if n_intervals % 4 == 0:
        block = np.array([7.0, 32.0, 12.0, 32.0, 7.0]) * (2.0 * spacing / 45.0)
        for s in range(0, n_intervals, 4):
            w[s:s + 5] += block
    else:
        block = np.array([1.0, 4.0, 1.0]) * (spacing / 3.0)
        for s in range(0, n_intervals, 2):
            w[s:s + 3] += block
    return w


def weighted_inner(f, g, x, T):
    """``int x^2 f g dt dtheta`` over the grid (``x`` sampled at the t nodes)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    n_t, n_theta = f.shape[0] - 1, f.shape[1]
    wt = t_weights(n_t, 2.0 * T / n_t) * np.asarray(x) ** 2
    return float(wt @ (f * g).sum(axis=1)) * (2.0 * np.pi / n_theta)
