"""Product quadrature rules on spheres and intervals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["gauss_legendre", "sphere_rule"]


@lru_cache(maxsize=64)
def _leggauss(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, m: int) -> tuple[np.ndarray, np.ndarray]:
    """``m``-point Gauss-Legendre nodes and weights on ``[a, b]``.

    ``a`` and ``b`` may be arrays of equal shape; the node axis is appended last.
    """
    x, w = _leggauss(m)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=32)
def sphere_rule(n: int, polar_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights integrating smooth functions over S^{n-1} in R^n.

    Hyperspherical angles: the azimuth uses the periodic trapezoid rule with
    ``2 * polar_points`` nodes; each polar angle on ``[0, pi]`` uses
    Gauss-Legendre in the angle itself with the ``sin**m`` Jacobian folded into
    the weights, which keeps the integrand analytic.  ``S^0`` is ``{+1, -1}``.
    """
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    if n == 1:
        d, w = np.array([[1.0], [-1.0]]), np.ones(2)
    else:
        m_az = 2 * polar_points
        phi = 2.0 * np.pi * (np.arange(m_az) + 0.5) / m_az
        dirs = np.column_stack([np.cos(phi), np.sin(phi)])
        w = np.full(m_az, 2.0 * np.pi / m_az)
        theta, tw = gauss_legendre(0.0, np.pi, polar_points)
        for m in range(1, n - 1):
            # lift S^m -> S^{m+1}: new first coordinate cos(theta), rest scaled by sin
            c, s = np.cos(theta), np.sin(theta)
            dirs = np.concatenate(
                [np.repeat(c, len(dirs))[:, None], np.kron(s[:, None], dirs)], axis=1
            )
            w = np.kron(tw * s ** m, w)
        d = dirs
    d.setflags(write=False)
    w.setflags(write=False)
    return d, w
