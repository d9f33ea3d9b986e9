"""Pure numpy versions of the compiled elliptic kernels.

Same signatures and semantics as :mod:`pmcsurf._ckernels`: each function takes
one-dimensional float64 arrays of equal length. Loops run over iterations,
never over elements, so the cost is a small constant times a numpy pass.
"""
import numpy as np

_EPS = np.finfo(float).eps


def _rf(x, y, z):
    x, y, z = (np.array(v, dtype=float, copy=True) for v in (x, y, z))
    a0 = (x + y + z) / 3.0
    q = np.maximum(np.abs(a0 - x), np.maximum(np.abs(a0 - y), np.abs(a0 - z))) * 400.0
    an = a0.copy()
    f = np.ones_like(x)
    for _ in range(60):
        active = q * f >= np.abs(an)
        if not active.any():
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = np.where(active, 0.25 * (x + lam), x)
        y = np.where(active, 0.25 * (y + lam), y)
        z = np.where(active, 0.25 * (z + lam), z)
        an = np.where(active, 0.25 * (an + lam), an)
        f = np.where(active, 0.25 * f, f)
    xx = (an - x) / an
    yy = (an - y) / an
    zz = -(xx + yy)
    e2 = xx * yy - zz * zz
    e3 = xx * yy * zz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / np.sqrt(an)


def _rd(x, y, z):
    x, y, z = (np.array(v, dtype=float, copy=True) for v in (x, y, z))
    a0 = (x + y + 3.0 * z) / 5.0
    q = np.maximum(np.abs(a0 - x), np.maximum(np.abs(a0 - y), np.abs(a0 - z))) * 600.0
    an = a0.copy()
    f = np.ones_like(x)
    acc = np.zeros_like(x)
    for _ in range(60):
        active = q * f >= np.abs(an)
        if not active.any():
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        acc = np.where(active, acc + f / (sz * (z + lam)), acc)
        x = np.where(active, 0.25 * (x + lam), x)
        y = np.where(active, 0.25 * (y + lam), y)
        z = np.where(active, 0.25 * (z + lam), z)
        an = np.where(active, 0.25 * (an + lam), an)
        f = np.where(active, 0.25 * f, f)
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
    return f * series / (an * np.sqrt(an)) + 3.0 * acc


def complete_integrals(m):
    """Complete integrals K(m) and E(m) by the arithmetic-geometric mean."""
    m = np.asarray(m, dtype=float)
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    s = 0.5 * m
    w = 0.5
    for _ in range(60):
        if np.all(np.abs(a - b) <= 1e-16 * a):
            break
        c2 = 0.25 * (a - b) ** 2
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        w *= 2.0
        s = s + w * c2
    kk = np.pi / (2.0 * a)
    return kk, kk * (1.0 - s)


def _f_reduced(phi, m):
    s, c = np.sin(phi), np.cos(phi)
    return s * _rf(c * c, 1.0 - m * s * s, np.ones_like(s))


def _e_reduced(phi, m):
    s, c = np.sin(phi), np.cos(phi)
    c2, d2, one = c * c, 1.0 - m * s * s, np.ones_like(s)
    return s * _rf(c2, d2, one) - m * s ** 3 * _rd(c2, d2, one) / 3.0


def ellipf(phi, m):
    """Incomplete integral of the first kind for arbitrary real amplitude."""
    phi = np.asarray(phi, dtype=float)
    m = np.asarray(m, dtype=float)
    turns = np.floor(phi / np.pi + 0.5)
    kk, _ = complete_integrals(m)
    return 2.0 * turns * kk + _f_reduced(phi - turns * np.pi, m)


def ellipe(phi, m):
    """Incomplete integral of the second kind for arbitrary real amplitude."""
    phi = np.asarray(phi, dtype=float)
    m = np.asarray(m, dtype=float)
    turns = np.floor(phi / np.pi + 0.5)
    _, ee = complete_integrals(m)
    return 2.0 * turns * ee + _e_reduced(phi - turns * np.pi, m)


def _am_reduced(r, m, kk):
    lo = np.full_like(r, -0.5 * np.pi)
    hi = np.full_like(r, 0.5 * np.pi)
    phi = 0.5 * np.pi * r / kk
    done = m == 0.0
    phi = np.where(done, r, phi)
    for _ in range(100):
        if done.all():
            break
        f = _f_reduced(phi, m) - r
        hi = np.where(f > 0.0, phi, hi)
        lo = np.where(f > 0.0, lo, phi)
        s = np.sin(phi)
        step = f * np.sqrt(1.0 - m * s * s)
        trial = phi - step
        outside = (trial <= lo) | (trial >= hi)
        trial = np.where(outside, 0.5 * (lo + hi), trial)
        step = phi - trial
        phi = np.where(done, phi, trial)
        done = done | (np.abs(step) <= 4.0 * _EPS * np.maximum(1.0, np.abs(phi)))
    return phi


def am_dn(u, m):
    """Amplitude, delta amplitude and its derivative in the argument."""
    u = np.asarray(u, dtype=float)
    m = np.asarray(m, dtype=float)
    kk, _ = complete_integrals(m)
    turns = np.floor(u / (2.0 * kk) + 0.5)
    phi = _am_reduced(u - 2.0 * turns * kk, m, kk)
    s, c = np.sin(phi), np.cos(phi)
    return turns * np.pi + phi, np.sqrt(1.0 - m * s * s), -m * s * c
