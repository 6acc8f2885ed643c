"""Curvature descriptors at a fixed scale, obtained by inverting the expansions.

One scale in, one estimate out.  The component route reads ``H`` from the
volume of ``V+`` and each ``kappa`` from a tangent eigenvalue.  The patch route
solves for ``H**2`` and the scalar curvature from the area and the normal
eigenvalue, takes the sign of ``H`` from the barycenter, then recovers each
``kappa`` by dividing by ``H``.  Clouds without an area estimate go through a
volume-free variant that reads ``H`` from the barycenter directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .domains import IntegralInvariants
from .models import elementary_symmetric
from .sphere_integrals import ball_volume

__all__ = [
    "CurvatureEstimate",
    "CurvatureSingularityError",
    "DescriptorError",
    "EigenDecomposition",
    "component_limit_ratio",
    "curvature_from_component",
    "curvature_from_patch",
    "eig_sym",
    "mean_curvature_from_volume",
    "patch_limit_ratios",
]

UMBILIC_RTOL = 1e-8


class DescriptorError(ValueError):
    """Invariants cannot be turned into curvature (degenerate or wrong kind)."""


class CurvatureSingularityError(ArithmeticError):
    """``H**2`` came out negative beyond tolerance: no real mean curvature fits."""


# ---------------------------------------------------------------------------
# symmetric eigensolver


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def eig_sym(A, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi diagonalization of a small dense symmetric matrix.

    Rotations sweep the upper triangle row by row until the off-diagonal
    Frobenius norm falls below ``1e-14 * ||A||``.  Eigenvalues come back in
    descending order (stable for ties) and each eigenvector has its first
    non-negligible component positive.

    Examples
    --------
    >>> eig_sym([[2.0, 1.0], [1.0, 2.0]]).eigenvalues
    array([3., 1.])
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    d = A.shape[0]
    if d > 64:
        raise ValueError("eig_sym handles dimension <= 64")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix must be finite")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > 1e-10 * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    # work at unit scale so squared entries neither underflow nor overflow
    unit = float(np.max(np.abs(A))) or 1.0
    A = 0.5 * (A + A.T) / unit
    V = np.eye(d)
    tol = 1e-14 * np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.triu(A, 1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * Ap - s * Aq, s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * Ap - s * Aq, s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * Vp - s * Vq, s * Vp + c * Vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.diag(A) * unit
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    for j in range(d):
        i = np.flatnonzero(np.abs(V[:, j]) > 1e-12)[0]
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return EigenDecomposition(w, V)


# ---------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class CurvatureEstimate:
    """Curvature read off integral invariants at one scale.

    ``kappas`` is ``None`` when the patch route hits ``H ~ 0``; ``H`` and
    ``scalar_curv`` are still reported and ``elementary_symmetric`` then holds
    only ``(K_1, K_2)``.  Directions are rows, ordered like ``kappas``
    (descending).
    """

    kappas: Optional[np.ndarray]
    principal_directions: np.ndarray
    normal: np.ndarray
    H: float
    scalar_curv: float
    gauss_curv: Optional[float]
    elementary_symmetric: np.ndarray
    scale: float
    source: str
    umbilic: bool = False
    singular: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.principal_directions)

    def oriented(self, reference_normal) -> "CurvatureEstimate":
        """Same estimate expressed with the normal on the side of ``reference_normal``."""
        if float(np.dot(self.normal, reference_normal)) >= 0:
            return self
        kap = None if self.kappas is None else -self.kappas[::-1]
        dirs = self.principal_directions[::-1] if self.kappas is not None else self.principal_directions
        signs = (-1.0) ** np.arange(1, len(self.elementary_symmetric) + 1)
        g = self.gauss_curv
        if g is not None:
            g = g * (-1.0) ** self.n
        return replace(
            self, kappas=kap, principal_directions=dirs.copy(), normal=-self.normal,
            H=-self.H, gauss_curv=g, elementary_symmetric=self.elementary_symmetric * signs,
        )


def _from_kappas(kappas, dirs, normal, eps, source, umbilic, diagnostics, scalar=None):
    order = np.argsort(-kappas, kind="stable")
    kappas, dirs = kappas[order], dirs[order]
    e = elementary_symmetric(kappas)
    R = float(2.0 * e[1]) if len(e) > 1 else 0.0
    if scalar is not None:
        diagnostics["newton_residual"] = float(e[0] ** 2 - np.sum(kappas ** 2) - scalar)
    return CurvatureEstimate(
        kappas=kappas, principal_directions=dirs, normal=normal, H=float(e[0]),
        scalar_curv=R if scalar is None else float(scalar), gauss_curv=float(e[-1]),
        elementary_symmetric=e, scale=eps, source=source, umbilic=umbilic,
        diagnostics=diagnostics,
    )


def _umbilic(lams) -> bool:
    lams = np.asarray(lams)
    if len(lams) < 2:
        return False
    scale = np.max(np.abs(lams))
    return bool(np.max(lams) - np.min(lams) <= UMBILIC_RTOL * scale)


def _prepare(inv: IntegralInvariants, n, eps, kinds):
    if inv.domain_kind not in kinds:
        raise DescriptorError(f"expected {' or '.join(kinds)} invariants, got {inv.domain_kind}")
    d = inv.ambient_dim
    n = d - 1 if n is None else int(n)
    if n != d - 1:
        raise DescriptorError(f"hypersurface of dimension {n} needs ambient dimension {n + 1}")
    eps = inv.eps if eps is None else float(eps)
    if eps is None or not eps > 0:
        raise DescriptorError("a positive scale eps is required")
    return n, eps


def mean_curvature_from_volume(volume: float, n: int, eps: float) -> float:
    """``H`` from the volume of ``V+`` at scale ``eps``."""
    Vn, Vn1 = ball_volume(n, eps), ball_volume(n + 1, eps)
    return (n + 2) * Vn1 / (eps ** 2 * Vn) * (1.0 - 2.0 * volume / Vn1)


def curvature_from_component(inv: IntegralInvariants, n: Optional[int] = None,
                             eps: Optional[float] = None,
                             min_alignment: float = 0.5) -> CurvatureEstimate:
    """Principal curvatures and frame from the invariants of ``V+``.

    The normal is the eigenvector best aligned with the barycenter offset,
    oriented towards it; the other ``n`` eigenpairs give the curvatures and
    principal directions.  ``H`` is the sum of the curvatures; the
    volume-based value is kept in ``diagnostics["H_volume"]``.
    """
    n, eps = _prepare(inv, n, eps, ("component",))
    C = inv.unnormalized_covariance()
    dec = eig_sym(C)
    if dec.eigenvalues[-1] <= 0:
        raise DescriptorError("degenerate covariance")
    offset = inv.barycenter - inv.center
    norm = np.linalg.norm(offset)
    if norm == 0:
        raise DescriptorError("barycenter coincides with the centre; normal undefined")
    cosines = np.abs(dec.eigenvectors.T @ offset) / norm
    k = int(np.argmax(cosines))
    if cosines[k] < min_alignment:
        raise DescriptorError(f"ambiguous normal: best alignment {cosines[k]:.3f}")
    normal = dec.eigenvectors[:, k]
    if normal @ offset < 0:
        normal = -normal
    tang = [j for j in range(n + 1) if j != k]
    lams = dec.eigenvalues[tang]
    dirs = dec.eigenvectors[:, tang].T
    Vn, Vn1 = ball_volume(n, eps), ball_volume(n + 1, eps)
    H_vol = mean_curvature_from_volume(inv.volume, n, eps)
    # tangent eigenvalue = a - c (2 kappa + H) with c = eps^4 V_n / (2(n+2)(n+4)), so
    # kappa = (a - lambda) / (2c) - H/2
    kappas = (n + 2) * (n + 4) / (eps ** 4 * Vn) * (eps ** 2 * Vn1 / (2 * (n + 3)) - lams) - H_vol / 2
    # same curvatures from eigenvalues alone, without the volume
    eigen_only = (n + 4) / (eps ** 4 * Vn) * (
        eps ** 2 * Vn1 / (n + 3) - (n + 2) * lams + lams.sum())
    order = np.argsort(-kappas, kind="stable")
    diag = {"H_volume": H_vol, "normal_alignment": float(cosines[k]),
            "eigenvalues": dec.eigenvalues, "kappas_eigen_only": eigen_only[order]}
    return _from_kappas(kappas, dirs, normal, eps, "component", _umbilic(lams), diag)


def curvature_from_patch(inv: IntegralInvariants, n: Optional[int] = None,
                         eps: Optional[float] = None, h_tol: float = 1e-3,
                         neg_tol: float = 1e-8) -> CurvatureEstimate:
    """Curvature from the invariants of the patch (analytic or discrete).

    With a measured area the scalar curvature and ``H**2`` come from the area
    and the normal eigenvalue, and the sign of ``H`` from the barycenter side
    of the normal.  Without one (raw clouds) the volume-free route is used:
    ``H`` from the barycenter offset, the scalar curvature from the normalized
    normal eigenvalue and the curvatures from tangent eigenvalue differences.

    The returned normal points towards the barycenter, so ``H >= 0`` unless
    the barycenter sits exactly on the tangent plane.  ``|H| <= h_tol`` gives
    a singular estimate without per-direction curvatures.

    Raises
    ------
    CurvatureSingularityError
        If ``H**2 < -neg_tol``.
    """
    n, eps = _prepare(inv, n, eps, ("patch", "discrete"))
    Vn = ball_volume(n, eps)
    measured = inv.volume_is_measure
    dec = eig_sym(inv.unnormalized_covariance() if measured else inv.normalized_covariance())
    normal = dec.eigenvectors[:, -1].copy()
    offset = inv.barycenter - inv.center
    if normal @ offset < 0:
        normal = -normal
    proj = float(normal @ offset)
    lams = dec.eigenvalues[:n]
    dirs = dec.eigenvectors[:, :n].T
    lam_n = dec.eigenvalues[-1]
    diag = {"eigenvalues": dec.eigenvalues, "route": "area" if measured else "volume_free"}
    if measured:
        A = 8 * (n + 2) / eps ** 2 * (inv.volume / Vn - 1.0)
        B = 2 * (n + 2) * (n + 4) * lam_n / (eps ** 4 * Vn)
        R = ((n + 2) * B - (n + 1) * A) / n
        H2 = (n + 2) * (2 * B - A) / n
        if H2 < -neg_tol:
            raise CurvatureSingularityError(f"H^2 = {H2:.3e} < 0: no real mean curvature")
        H = math.sqrt(max(H2, 0.0))  # sign + because the normal faces the barycenter
        gamma = 8 * (n + 2) * (n + 4) / eps ** 4 * (lams / Vn - eps ** 2 / (n + 2))
        diag.update(A=A, B=B, H_squared=H2)
    else:
        H = 2 * (n + 2) * proj / eps ** 2
        Bt = 2 * (n + 2) * (n + 4) * lam_n / eps ** 4
        R = (n + 1) * H * H / (n + 2) - Bt
        gamma = 8 * (n + 2) * (n + 4) / eps ** 4 * (lams - eps ** 2 / (n + 2))
    diag["H_direct"] = H
    umb = _umbilic(lams)
    if abs(H) <= h_tol:
        return CurvatureEstimate(
            kappas=None, principal_directions=dirs, normal=normal, H=H, scalar_curv=R,
            gauss_curv=(R / 2 if n == 2 else (H if n == 1 else None)),
            elementary_symmetric=np.array([H, R / 2])[: min(n, 2)], scale=eps,
            source="patch", umbilic=umb, singular=True, diagnostics=diag,
        )
    if measured:
        kappas = (A - gamma) / (4 * H)
    else:
        kappas = H / n - (n * gamma - gamma.sum()) / (4 * H * n)
    return _from_kappas(kappas, dirs, normal, eps, "patch", umb, diag, scalar=R)


# ---------------------------------------------------------------------------
# limit ratios


def component_limit_ratio(lam_mu: float, lam_nu: float, n: int, eps: float) -> float:
    """``V_{n+1}**2 / V_n * (lam_mu - lam_nu) / (lam_mu * lam_nu)`` for ``V+``.

    Tends to ``4 (n+3)**2 / ((n+2)(n+4)) * (kappa_nu - kappa_mu)``.
    """
    if lam_mu <= 0 or lam_nu <= 0:
        raise DescriptorError("eigenvalues must be positive")
    Vn, Vn1 = ball_volume(n, eps), ball_volume(n + 1, eps)
    return Vn1 ** 2 / Vn * (lam_mu - lam_nu) / (lam_mu * lam_nu)


def patch_limit_ratios(lams, n: int, eps: float) -> tuple[np.ndarray, float]:
    """Scaled eigenvalue ratios of the patch.

    ``lams`` is ordered ``(tangent_1..tangent_n, normal)``.  Returns the matrix
    ``V_n (lam_mu - lam_nu) / (lam_mu lam_nu)``, tending to
    ``(n+2) / (2(n+4)) * (kappa_nu - kappa_mu) H``, and the mean over all
    tangent pairs of ``V_n lam_normal / (lam_mu lam_nu)``, tending to
    ``(n+2) / (2(n+4)) * ((n+1) H**2 / (n+2) - R)``.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.shape != (n + 1,):
        raise ValueError(f"need {n + 1} eigenvalues")
    t = lams[:n]
    if np.any(t <= 0):
        raise DescriptorError("tangent eigenvalues must be positive")
    Vn = ball_volume(n, eps)
    prod = np.outer(t, t)
    tangent = Vn * (t[:, None] - t[None, :]) / prod
    normal = float(np.mean(Vn * lams[n] / prod))
    return tangent, normal
