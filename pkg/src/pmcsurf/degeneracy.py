"""Half-lengths T at which the Jacobi operator on [-T, T] x S^1 is degenerate.

The operator on even functions vanishing at ``t = +-T`` has a kernel exactly
when ``w_{a,j}(T) = 0`` for some mode ``j``. Mode 0 has one zero
``T_{a,k}`` in each ``(k tau_a, (k + 1/2) tau_a)``; mode 1 vanishes at the
half-periods ``(k + 1/2) tau_a`` on nodoids and never on unduloids; modes with
``j^2 >= 2 (1 + 2 gamma_a)`` never vanish.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from .delaunay import DelaunayParam, make_param, roulette
from .errors import DomainError, NumericalFailure
from .jacobi_field import fundamental_pair, max_kernel_mode, mode_solution, w_mode

KERNEL_TOL = 1e-8
_SCALE_SAMPLES = 2001


def _as_param(param):
    return param if isinstance(param, DelaunayParam) else make_param(param)


def _w0(param, t):
    return fundamental_pair(param, 0, t)[0]


def find_T0(param, k=0):
    """The unique zero of ``w_{a,0}`` in ``(k tau_a, (k + 1/2) tau_a)``.

    Brent's method on the closed form. At the cylinder returns
    ``(k + 1/2) pi`` exactly.

    Raises
    ------
    NumericalFailure
        If ``w_{a,0}`` does not change sign across the bracket.
    """
    param = _as_param(param)
    k = int(k)
    if k < 0:
        raise DomainError("root index k must be nonnegative")
    if param.is_cylinder:
        return (k + 0.5) * math.pi
    lo, hi = k * param.tau, (k + 0.5) * param.tau
    f_lo, f_hi = _w0(param, lo), _w0(param, hi)
    if f_lo * f_hi >= 0.0:
        raise NumericalFailure(
            f"w_(a,0) has no sign change on ({lo}, {hi}) for a={param.a}: internal inconsistency"
        )
    root = brentq(lambda s: _w0(param, s), lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return float(root)


def T1_set(param, T_max):
    """Half-lengths in ``(0, T_max]`` where mode 1 is degenerate.

    ``(k + 1/2) tau_a`` for nodoids; empty for unduloids and the cylinder.
    """
    param = _as_param(param)
    if param.a < 0:
        return []
    out = []
    k = 0
    while (k + 0.5) * param.tau <= T_max:
        out.append((k + 0.5) * param.tau)
        k += 1
    return out


@dataclass(frozen=True)
class ScanResult:
    """Zeros of ``w_{a,j}`` found on ``(0, T_max]``.

    ``certified_empty`` is True only when ``j^2 >= 2 (1 + 2 gamma_a)``, which
    rules out zeros everywhere. An empty list without the certificate means
    none were found in the window.
    """

    j: int
    window: float
    zeros: tuple
    brackets: tuple
    certified_empty: bool


def scan_zeros(param, j, T_max):
    """All sign changes of ``w_{a,j}`` (``j >= 2``) on ``(0, T_max]``, refined by Brent."""
    param = _as_param(param)
    if j < 2:
        raise DomainError("scan_zeros handles modes j >= 2; use find_T0 / T1_set for j = 0, 1")
    if j * j >= 2.0 * (1.0 + 2.0 * param.gamma):
        return ScanResult(j, float(T_max), (), (), True)
    sol = mode_solution(param, j, T_max)
    mask = sol.t <= T_max
    t, v = sol.t[mask], sol.value[mask]
    zeros, brackets = [], []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        lo, hi = float(t[i]), float(t[i + 1])
        root = brentq(sol, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        zeros.append(float(root))
        brackets.append((lo, hi))
    return ScanResult(j, float(T_max), tuple(zeros), tuple(brackets), False)


@dataclass(frozen=True)
class KernelInfo:
    """Kernel of the Jacobi operator on ``[-T, T] x S^1`` (even, Dirichlet).

    ``modes`` lists the Fourier modes contributing; ``labels`` names one basis
    function per dimension.
    """

    T: float
    dim: int
    labels: tuple
    modes: tuple
    residuals: dict = field(default_factory=dict)


def _mode_scale(param, j, T):
    t = np.linspace(0.0, T, _SCALE_SAMPLES)
    return float(np.max(np.abs(w_mode(param, j, t))))


def kernel_basis(param, T, tol=KERNEL_TOL):
    """Dimension and labels of the kernel at half-length ``T``.

    Mode ``j`` (``0 <= j <= J_a``) contributes when
    ``|w_{a,j}(T)| <= tol * max_{[0,T]} |w_{a,j}|``: one dimension for
    ``j = 0``, two (cosine and sine) otherwise.
    """
    param = _as_param(param)
    if T <= 0:
        raise DomainError("half-length T must be positive")
    dim, labels, modes, residuals = 0, [], [], {}
    for j in range(max_kernel_mode(param) + 1):
        value = float(w_mode(param, j, T))
        scale = _mode_scale(param, j, T)
        residuals[j] = abs(value) / scale
        if abs(value) <= tol * scale:
            modes.append(j)
            if j == 0:
                dim += 1
                labels.append("w_0")
            else:
                dim += 2
                arg = "theta" if j == 1 else f"{j} theta"
                labels += [f"w_{j} cos({arg})", f"w_{j} sin({arg})"]
    return KernelInfo(float(T), dim, tuple(labels), tuple(modes), residuals)


def boundary_jacobian(param, T):
    """``-w_{a,0}(T) / x_a(T)``.

    Jacobian determinant of ``(a, T) -> (x_a(T), z_a(T))``; it vanishes
    exactly on the mode-0 degeneracy set.
    """
    param = _as_param(param)
    return float(-_w0(param, T) / roulette(param, float(T)).x)


@dataclass(frozen=True)
class DegeneracyReport:
    """Degeneracy sets of one Delaunay surface on the window ``(0, T_max]``.

    Attributes
    ----------
    roots : dict
        Mode ``j`` to the sorted zeros of ``w_{a,j}``.
    brackets : dict
        ``(j, T)`` to the interval that contains the root: the theorem
        interval ``(k tau, (k + 1/2) tau)`` for ``j = 0``, the root itself for
        ``j = 1`` and the sampling interval for ``j >= 2``.
    indices : dict
        ``(j, T)`` to the root index ``k``.
    kernel_dims : dict
        Root to kernel dimension there.
    certified_empty : dict
        Mode ``j >= 2`` to its no-zero certificate.
    """

    a: float
    window: float
    roots: dict
    brackets: dict
    indices: dict
    kernel_dims: dict
    certified_empty: dict

    def all_roots(self):
        return sorted({t for ts in self.roots.values() for t in ts})

    def rows(self, param=None):
        """CSV-ready rows ``(a, j, k, T, bracket_lo, bracket_hi, residual)``."""
        param = make_param(self.a) if param is None else param
        out = []
        for j in sorted(self.roots):
            for T in self.roots[j]:
                lo, hi = self.brackets[(j, T)]
                residual = abs(float(w_mode(param, j, T)))
                out.append((self.a, j, self.indices[(j, T)], T, lo, hi, residual))
        return out


def degeneracy_report(param, T_max, j_max=None, kernel_dims=True):
    """Collect the degeneracy sets of all modes up to ``J_a`` on ``(0, T_max]``."""
    param = _as_param(param)
    if T_max <= 0:
        raise DomainError("T_max must be positive")
    top = max_kernel_mode(param) if j_max is None else min(int(j_max), max_kernel_mode(param))
    roots, brackets, indices, certified = {}, {}, {}, {}
    zeros0 = []
    k = 0
    while k * param.tau < T_max:
        root = find_T0(param, k)
        if root > T_max:
            break
        zeros0.append(root)
        brackets[(0, root)] = (k * param.tau, (k + 0.5) * param.tau)
        indices[(0, root)] = k
        k += 1
    roots[0] = zeros0
    if top >= 1:
        ones = T1_set(param, T_max)
        roots[1] = ones
        for k, T in enumerate(ones):
            brackets[(1, T)] = (T, T)
            indices[(1, T)] = k
    for j in range(2, top + 1):
        scan = scan_zeros(param, j, T_max)
        roots[j] = list(scan.zeros)
        certified[j] = scan.certified_empty
        for k, (T, br) in enumerate(zip(scan.zeros, scan.brackets)):
            brackets[(j, T)] = br
            indices[(j, T)] = k
    dims = {}
    if kernel_dims:
        for T in sorted({t for ts in roots.values() for t in ts}):
            dims[T] = kernel_basis(param, T).dim
    return DegeneracyReport(param.a, float(T_max), roots, brackets, indices, dims, certified)
