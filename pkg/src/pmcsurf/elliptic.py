"""Jacobi elliptic functions and elliptic integrals of parameter ``m``.

``m`` is the parameter, not the modulus ``k = sqrt(m)``. All functions accept
scalars or arrays for ``s`` and ``m`` (broadcast together) and return numpy
arrays, or Python floats for scalar input.

The elementwise work runs in a compiled kernel when ``pmcsurf._ckernels`` is
importable, otherwise in the numpy fallback ``pmcsurf._pykernels``. Setting
the environment variable ``PMCSURF_BACKEND=python`` forces the fallback.
"""
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

if os.environ.get("PMCSURF_BACKEND", "").lower() == "python":
    from . import _pykernels as _k
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _k
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        from . import _pykernels as _k
        BACKEND = "python"


def _prepare(s, m, *, allow_zero=True):
    s_arr, m_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m, dtype=float))
    _check_parameter(m_arr, allow_zero=allow_zero)
    scalar = s_arr.ndim == 0
    flat_s = np.ascontiguousarray(s_arr, dtype=float).ravel()
    flat_m = np.ascontiguousarray(m_arr, dtype=float).ravel()
    return flat_s, flat_m, s_arr.shape, scalar


def _check_parameter(m, *, allow_zero=True):
    m = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(m)) or np.any(m >= 1.0) or np.any(m < 0.0):
        raise DomainError("elliptic parameter m must lie in [0, 1)")
    if not allow_zero and np.any(m == 0.0):
        raise DomainError("elliptic parameter m must lie in (0, 1) here")


def _finish(values, shape, scalar):
    out = np.asarray(values).reshape(shape)
    return float(out) if scalar else out


def complete_integrals(m):
    """Complete elliptic integrals ``K(m)`` and ``E(m)``.

    Parameters
    ----------
    m : float or array_like
        Parameter in [0, 1).

    Returns
    -------
    K, E : float or ndarray
    """
    _, flat_m, shape, scalar = _prepare(0.0, m)
    kk, ee = _k.complete_integrals(flat_m)
    return _finish(kk, shape, scalar), _finish(ee, shape, scalar)


def incomplete_F(s, m):
    """Incomplete integral of the first kind ``F(s|m)`` for any real ``s``."""
    flat_s, flat_m, shape, scalar = _prepare(s, m)
    return _finish(_k.ellipf(flat_s, flat_m), shape, scalar)


def incomplete_E(s, m):
    """Incomplete integral of the second kind ``E(s|m)`` for any real ``s``."""
    flat_s, flat_m, shape, scalar = _prepare(s, m)
    return _finish(_k.ellipe(flat_s, flat_m), shape, scalar)


def amplitude(s, m):
    """Jacobi amplitude ``am(s|m)``, the inverse of ``F(.|m)``."""
    flat_s, flat_m, shape, scalar = _prepare(s, m)
    amp, _, _ = _k.am_dn(flat_s, flat_m)
    return _finish(amp, shape, scalar)


def am_dn(s, m):
    """Amplitude, delta amplitude and ``d dn / ds`` in one kernel call."""
    flat_s, flat_m, shape, scalar = _prepare(s, m)
    amp, d, dd = _k.am_dn(flat_s, flat_m)
    return _finish(amp, shape, scalar), _finish(d, shape, scalar), _finish(dd, shape, scalar)


def dn(s, m):
    """Delta amplitude and its derivative in the argument.

    Returns
    -------
    dn : float or ndarray
        ``sqrt(1 - m sin^2 am(s|m))``, which lies in ``[sqrt(1-m), 1]``.
    ddn_ds : float or ndarray
        ``-m sin(am) cos(am)``.
    """
    _, d, dd = am_dn(s, m)
    return d, dd


def dn_squared_integral(s, m):
    """``int_0^s dn(u|m)^2 du``, which equals ``E(am(s|m)|m)``."""
    return incomplete_E(amplitude(s, m), m)


def am_dm(s, m):
    """Derivative of the amplitude with respect to the parameter.

    Singular at ``m = 0``, which is rejected.
    """
    s = np.asarray(s, dtype=float)
    _check_parameter(m, allow_zero=False)
    amp, d, dd = am_dn(s, m)
    integral = incomplete_E(amp, m)
    out = d / (2.0 * m) * (s - dd / ((1.0 - m) * d) - integral / (1.0 - m))
    return out


def dn_dm(s, m):
    """Derivative of ``dn(s|m)`` with respect to the parameter ``m``.

    Uses the closed form in ``dn``, ``d dn/ds`` and ``int_0^s dn^2``.

    Raises
    ------
    DomainError
        If ``m == 0``, where the closed form divides by zero.
    """
    s = np.asarray(s, dtype=float)
    _check_parameter(m, allow_zero=False)
    amp, d, dd = am_dn(s, m)
    integral = incomplete_E(amp, m)
    direct = (d - 1.0 / d) / (2.0 * m)
    shift = dd / (2.0 * m) * (s - dd / ((1.0 - m) * d) - integral / (1.0 - m))
    out = direct + shift
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EllipticPoint:
    """A validated argument/parameter pair ``(s, m)`` with ``m`` in [0, 1)."""

    s: float
    m: float

    def __post_init__(self):
        _check_parameter(self.m)
        if not np.isfinite(self.s):
            raise DomainError("elliptic argument s must be finite")

    def F(self):
        return incomplete_F(self.s, self.m)

    def E(self):
        return incomplete_E(self.s, self.m)

    def am(self):
        return amplitude(self.s, self.m)

    def dn(self):
        return dn(self.s, self.m)

    def dn_dm(self):
        return dn_dm(self.s, self.m)
