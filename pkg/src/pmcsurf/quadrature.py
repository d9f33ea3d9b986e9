"""Gauss–Legendre quadrature helpers shared by the numerical modules."""
from functools import lru_cache

import numpy as np

from .errors import NumericalFailure


@lru_cache(maxsize=64)
def gl_nodes(n):
    """Gauss–Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(a, b, pieces, order=16):
    """Nodes and weights of a composite Gauss rule with equal sub-intervals."""
    x, w = gl_nodes(order)
    edges = np.linspace(a, b, pieces + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f, a, b, tol=1e-13, order=16, max_pieces=4096):
    """Integrate a vectorized ``f`` over [a, b] by composite Gauss–Legendre.

    The number of sub-intervals doubles until two successive estimates
    differ by less than ``tol`` (absolute, or relative when the integral is
    larger than one).

    Returns
    -------
    float
        The converged estimate.
    """
    if a == b:
        return 0.0
    pieces = 1
    nodes, weights = composite_nodes(a, b, pieces, order)
    prev = float(np.dot(weights, f(nodes)))
    while pieces < max_pieces:
        pieces *= 2
        nodes, weights = composite_nodes(a, b, pieces, order)
        cur = float(np.dot(weights, f(nodes)))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise NumericalFailure(f"quadrature on [{a}, {b}] did not converge to {tol}")


def tensor_rule(t_lo, t_hi, n_t, n_theta, pieces_t=1):
    """Tensor Gauss–Legendre rule on [t_lo, t_hi] x [-pi, pi].

    ``n_t`` nodes per sub-interval in t, ``pieces_t`` sub-intervals, and
    ``n_theta`` nodes in theta. Returns meshgrids ``(t, theta, weight)``.
    """
    t, wt = composite_nodes(t_lo, t_hi, pieces_t, n_t)
    th, wth = composite_nodes(-np.pi, np.pi, 1, n_theta)
    tt, hh = np.meshgrid(t, th, indexing="ij")
    return tt, hh, wt[:, None] * wth[None, :]
