"""Truncated small-scale expansions of the domain invariants.

All functions take the principal curvatures and derive ``H`` and the scalar
curvature from them.  Eigenvalues are unnormalized and ordered
``(tangent_1, ..., tangent_n, normal)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import elementary_symmetric
from .sphere_integrals import ball_volume

__all__ = [
    "AsymptoticInvariants",
    "component_asymptotics",
    "curvature_scalars",
    "patch_asymptotics",
    "shell_asymptotics",
]


@dataclass(frozen=True)
class AsymptoticInvariants:
    """Predicted invariants with the first neglected power of ``eps`` per quantity."""

    volume: float
    barycenter_normal: float
    eigenvalues: np.ndarray
    truncation_orders: dict

    @property
    def truncation_order(self) -> int:
        return self.truncation_orders["eigenvalues"]


def _check(n, eps, kappas):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError("dimension must be an integer >= 1")
    eps = float(eps)
    if not eps > 0:
        raise ValueError("scale must be positive")
    k = np.asarray(kappas, dtype=float).ravel()
    if k.shape != (n,) or not np.all(np.isfinite(k)):
        raise ValueError(f"need {n} finite curvatures")
    return int(n), eps, k


def curvature_scalars(kappas) -> tuple[float, float]:
    """Mean curvature ``K_1`` and scalar curvature ``2 K_2`` of ``kappas``."""
    e = elementary_symmetric(kappas)
    return float(e[0]), float(2.0 * e[1]) if len(e) > 1 else 0.0


def component_asymptotics(n: int, eps: float, kappas) -> AsymptoticInvariants:
    """Expansion of volume, normal barycenter offset and eigenvalues of ``V+``."""
    n, eps, k = _check(n, eps, kappas)
    H, _ = curvature_scalars(k)
    Vn, Vn1 = ball_volume(n, eps), ball_volume(n + 1, eps)
    q = Vn / Vn1 * eps ** 2 / (n + 2)
    volume = Vn1 / 2 - eps ** 2 * Vn * H / (2 * (n + 2))
    bary = 2 * q * (1 + q * H)
    base = Vn1 * eps ** 2 / (2 * (n + 3))
    tangent = base - Vn * eps ** 4 * (2 * k + H) / (2 * (n + 2) * (n + 4))
    normal = base - 2 * Vn ** 2 / Vn1 * eps ** 4 / (n + 2) ** 2 * (1 + q * H)
    return AsymptoticInvariants(
        volume=volume, barycenter_normal=bary, eigenvalues=np.append(tangent, normal),
        truncation_orders={"volume": n + 3, "barycenter": 3, "eigenvalues": n + 5},
    )


def patch_asymptotics(n: int, eps: float, kappas) -> AsymptoticInvariants:
    """Expansion of area, normal barycenter offset and eigenvalues of the patch."""
    n, eps, k = _check(n, eps, kappas)
    H, R = curvature_scalars(k)
    Vn = ball_volume(n, eps)
    volume = Vn * (1 + eps ** 2 * (H * H - 2 * R) / (8 * (n + 2)))
    bary = eps ** 2 * H / (2 * (n + 2))
    tangent = Vn * (eps ** 2 / (n + 2)
                    + eps ** 4 * (H * H - 2 * R - 4 * H * k) / (8 * (n + 2) * (n + 4)))
    normal = Vn * eps ** 4 * ((n + 1) * H * H / (n + 2) - R) / (2 * (n + 2) * (n + 4))
    return AsymptoticInvariants(
        volume=volume, barycenter_normal=bary, eigenvalues=np.append(tangent, normal),
        truncation_orders={"volume": n + 3, "barycenter": 3, "eigenvalues": n + 5},
    )


def shell_asymptotics(n: int, eps: float, kappas) -> AsymptoticInvariants:
    """Scale derivative of :func:`component_asymptotics`, term by term.

    ``volume`` is the shell measure, ``barycenter_normal`` the rate of change
    of the component barycenter and ``eigenvalues`` the rates of change of the
    component eigenvalues, which equal the shell second moments about the
    component barycenter along the eigenvectors.
    """
    n, eps, k = _check(n, eps, kappas)
    H, _ = curvature_scalars(k)
    vn, vn1 = ball_volume(n, 1.0), ball_volume(n + 1, 1.0)
    r = vn / vn1 / (n + 2)
    # every term is c * eps**p; differentiate as c * p * eps**(p-1)
    volume = (n + 1) * vn1 * eps ** n / 2 - (n + 2) * eps ** (n + 1) * vn * H / (2 * (n + 2))
    # barycenter 2 r eps (1 + r eps H)
    bary = 2 * r + 4 * r * r * eps * H
    base = (n + 3) * vn1 * eps ** (n + 2) / (2 * (n + 3))
    tangent = base - (n + 4) * vn * eps ** (n + 3) * (2 * k + H) / (2 * (n + 2) * (n + 4))
    normal = (base - 2 * vn ** 2 / vn1 * (n + 3) * eps ** (n + 2) / (n + 2) ** 2
              - 2 * vn ** 2 / vn1 * r * H * (n + 4) * eps ** (n + 3) / (n + 2) ** 2)
    return AsymptoticInvariants(
        volume=volume, barycenter_normal=bary, eigenvalues=np.append(tangent, normal),
        truncation_orders={"volume": n + 2, "barycenter": 2, "eigenvalues": n + 4},
    )
