# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled elementwise kernels for Jacobi elliptic functions.

Every public function takes contiguous float64 arrays of equal length and
returns new arrays. Broadcasting and validation happen in
:mod:`pmcsurf.elliptic`.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, sin, cos, floor, M_PI, fmax

cnp.import_array()

cdef double _EPS = 2.220446049250313e-16


cdef inline double _rf(double x, double y, double z) noexcept nogil:
    cdef double a0 = (x + y + z) / 3.0
    cdef double q = fmax(fabs(a0 - x), fmax(fabs(a0 - y), fabs(a0 - z))) * 400.0
    cdef double an = a0, f = 1.0, lam, sx, sy, sz
    cdef double xx, yy, zz, e2, e3
    cdef int it = 0
    while q * f >= fabs(an) and it < 60:
        sx = sqrt(x); sy = sqrt(y); sz = sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = 0.25 * (x + lam); y = 0.25 * (y + lam); z = 0.25 * (z + lam)
        an = 0.25 * (an + lam)
        f *= 0.25
        it += 1
    xx = (an - x) / an
    yy = (an - y) / an
    zz = -(xx + yy)
    e2 = xx * yy - zz * zz
    e3 = xx * yy * zz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / sqrt(an)


cdef inline double _rd(double x, double y, double z) noexcept nogil:
    cdef double a0 = (x + y + 3.0 * z) / 5.0
    cdef double q = fmax(fabs(a0 - x), fmax(fabs(a0 - y), fabs(a0 - z))) * 600.0
    cdef double an = a0, f = 1.0, acc = 0.0, lam, sx, sy, sz
    cdef double xx, yy, zz, xy, z2, e2, e3, e4, e5, series
    cdef int it = 0
    while q * f >= fabs(an) and it < 60:
        sx = sqrt(x); sy = sqrt(y); sz = sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        acc += f / (sz * (z + lam))
        x = 0.25 * (x + lam); y = 0.25 * (y + lam); z = 0.25 * (z + lam)
        an = 0.25 * (an + lam)
        f *= 0.25
        it += 1
    xx = (an - x) / an
    yy = (an - y) / an
    zz = -(xx + yy) / 3.0
    xy = xx * yy
    z2 = zz * zz
    e2 = xy - 6.0 * z2
    e3 = (3.0 * xy - 8.0 * z2) * zz
    e4 = 3.0 * (xy - z2) * z2
    e5 = xy * z2 * zz
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
              - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return f * series / (an * sqrt(an)) + 3.0 * acc


cdef inline double _kcomplete(double m) noexcept nogil:
    cdef double a = 1.0, b = sqrt(1.0 - m), t
    cdef int it = 0
    while fabs(a - b) > 1e-16 * a and it < 60:
        t = 0.5 * (a + b)
        b = sqrt(a * b)
        a = t
        it += 1
    return M_PI / (2.0 * a)


cdef inline double _ecomplete(double m) noexcept nogil:
    cdef double a = 1.0, b = sqrt(1.0 - m), c2 = m, t, s = 0.5 * m, w = 0.5
    cdef int it = 0
    while fabs(a - b) > 1e-16 * a and it < 60:
        t = 0.5 * (a + b)
        c2 = 0.25 * (a - b) * (a - b)
        b = sqrt(a * b)
        a = t
        w *= 2.0
        s += w * c2
        it += 1
    return M_PI / (2.0 * a) * (1.0 - s)


cdef inline double _f_reduced(double phi, double m) noexcept nogil:
    cdef double s = sin(phi), c = cos(phi)
    return s * _rf(c * c, 1.0 - m * s * s, 1.0)


cdef inline double _e_reduced(double phi, double m) noexcept nogil:
    cdef double s = sin(phi), c = cos(phi), c2 = c * c, d2 = 1.0 - m * s * s
    return s * _rf(c2, d2, 1.0) - m * s * s * s * _rd(c2, d2, 1.0) / 3.0


cdef inline double _am_reduced(double r, double m, double kk) noexcept nogil:
    # invert F(phi|m) = r on [-pi/2, pi/2] by Newton with a bisection guard
    cdef double lo = -0.5 * M_PI, hi = 0.5 * M_PI
    cdef double phi = 0.5 * M_PI * r / kk, f, step, s, trial
    cdef int it
    if m == 0.0:
        return r
    for it in range(100):
        f = _f_reduced(phi, m) - r
        if f > 0.0:
            hi = phi
        else:
            lo = phi
        s = sin(phi)
        step = f * sqrt(1.0 - m * s * s)
        trial = phi - step
        if trial <= lo or trial >= hi:
            trial = 0.5 * (lo + hi)
            step = phi - trial
        phi = trial
        if fabs(step) <= 4.0 * _EPS * fmax(1.0, fabs(phi)):
            break
    return phi


def complete_integrals(double[::1] m):
    """Complete integrals K(m) and E(m) by the arithmetic-geometric mean."""
    cdef Py_ssize_t n = m.shape[0], i
    kk = np.empty(n)
    ee = np.empty(n)
    cdef double[::1] kv = kk, ev = ee
    with nogil:
        for i in range(n):
            kv[i] = _kcomplete(m[i])
            ev[i] = _ecomplete(m[i])
    return kk, ee


def ellipf(double[::1] phi, double[::1] m):
    """Incomplete integral of the first kind for arbitrary real amplitude."""
    cdef Py_ssize_t n = phi.shape[0], i
    cdef double k, turns, r
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            turns = floor(phi[i] / M_PI + 0.5)
            r = phi[i] - turns * M_PI
            k = _kcomplete(m[i]) if turns != 0.0 else 0.0
            o[i] = 2.0 * turns * k + _f_reduced(r, m[i])
    return out


def ellipe(double[::1] phi, double[::1] m):
    """Incomplete integral of the second kind for arbitrary real amplitude."""
    cdef Py_ssize_t n = phi.shape[0], i
    cdef double e, turns, r
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            turns = floor(phi[i] / M_PI + 0.5)
            r = phi[i] - turns * M_PI
            e = _ecomplete(m[i]) if turns != 0.0 else 0.0
            o[i] = 2.0 * turns * e + _e_reduced(r, m[i])
    return out


def am_dn(double[::1] u, double[::1] m):
    """Amplitude, delta amplitude and its derivative in the argument."""
    cdef Py_ssize_t n = u.shape[0], i
    cdef double kk, turns, r, phi, s, c
    amp = np.empty(n)
    dn = np.empty(n)
    ddn = np.empty(n)
    cdef double[::1] a = amp, d = dn, dd = ddn
    with nogil:
        for i in range(n):
            kk = _kcomplete(m[i])
            turns = floor(u[i] / (2.0 * kk) + 0.5)
            r = u[i] - 2.0 * turns * kk
            phi = _am_reduced(r, m[i], kk)
            s = sin(phi)
            c = cos(phi)
            a[i] = turns * M_PI + phi
            d[i] = sqrt(1.0 - m[i] * s * s)
            dd[i] = -m[i] * s * c
    return amp, dn, ddn
