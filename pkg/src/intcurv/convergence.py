"""Helpers for convergence studies: scale grids, slopes, eigenvalue matching."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .descriptors import eig_sym
from .domains import IntegralInvariants
from .models import GraphModel

__all__ = [
    "geometric_grid",
    "line_angle",
    "loglog_slope",
    "matched_eigenvalues",
    "random_graph_family",
    "normal_offset",
]


def geometric_grid(eps0: float, levels: int = 4) -> np.ndarray:
    """Scales ``eps0 * 2**-j`` for ``j = 0 .. levels-1``."""
    if not eps0 > 0 or levels < 1:
        raise ValueError("need eps0 > 0 and levels >= 1")
    return eps0 * 0.5 ** np.arange(levels)


def loglog_slope(scales: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log|error|`` against ``log(scale)``."""
    s = np.asarray(scales, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if len(s) != len(e) or len(s) < 2:
        raise ValueError("need at least two (scale, error) pairs")
    if np.any(e <= 0) or np.any(s <= 0):
        raise ValueError("slopes need positive scales and non-zero errors")
    return float(np.polyfit(np.log(s), np.log(e), 1)[0])


def line_angle(u, v) -> float:
    """Angle in ``[0, pi/2]`` between the lines spanned by ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    c = u @ v
    # the perpendicular part keeps precision for tiny angles
    s = np.linalg.norm(v - c * u)
    return float(np.arctan2(s, abs(c)))


def normal_offset(inv: IntegralInvariants, normal) -> float:
    """Barycenter offset from the ball centre along ``normal``."""
    return float(np.dot(inv.barycenter - inv.center, normal))


def matched_eigenvalues(inv: IntegralInvariants, kappas, normal,
                        basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Eigenvalues reordered to the ``(tangent_1..tangent_n, normal)`` layout.

    The normal eigenvalue is the one whose eigenvector is closest to
    ``normal``.  Tangent eigenvalues are assigned to curvatures by rank: a
    larger curvature gives a smaller eigenvalue for the component and shell
    domains and, when ``H > 0``, for the patch, so ranks are matched
    accordingly.  With ``basis`` (columns) the quadratic form is read along
    those vectors instead of diagonalising.
    """
    k = np.asarray(kappas, dtype=float)
    n = len(k)
    C = inv.covariance
    if basis is None:
        dec = eig_sym(C)
        lam, vec = dec.eigenvalues, dec.eigenvectors
    else:
        vec = np.asarray(basis, dtype=float)
        lam = np.einsum("ij,ik,kj->j", vec, C, vec)
    j = int(np.argmax(np.abs(vec.T @ np.asarray(normal))))
    tang = np.delete(lam, j)
    out = np.empty(n + 1)
    out[n] = lam[j]
    sign = 1.0
    if inv.domain_kind in ("patch", "discrete") and k.sum() < 0:
        sign = -1.0
    # ascending curvature <-> descending eigenvalue
    rank_k = np.argsort(sign * k, kind="stable")
    out[rank_k] = np.sort(tang)[::-1]
    return out


def random_graph_family(seed: int, count: int = 10, dims: Sequence[int] = (2, 3),
                        kappa_range: float = 2.0, cubic_scale: float = 0.1,
                        min_abs_mean: float = 0.5, min_gap: float = 0.25) -> list:
    """Random graph models for convergence studies.

    Curvatures are uniform in ``[-kappa_range, kappa_range]``, dimensions cycle
    through ``dims`` and the cubic tensor has i.i.d. normal entries.  Draws
    with ``|H| < min_abs_mean`` or a curvature gap below ``min_gap`` are
    rejected: the patch inversion divides by ``H`` and principal directions
    are only defined for separated curvatures, so those draws would test the
    conditioning of the inversion rather than its convergence.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = dims[len(out) % len(dims)]
        k = rng.uniform(-kappa_range, kappa_range, n)
        cubic = rng.normal(scale=cubic_scale, size=(n,) * 3) if cubic_scale else None
        if abs(k.sum()) < min_abs_mean or np.min(np.diff(np.sort(k))) < min_gap:
            continue
        out.append(GraphModel(k, cubic=cubic))
    return out
