"""Second fundamental form and Riemann tensor of a submanifold of codimension k.

The cloud is split into k hypersurfaces, one per normal direction: the
points are projected onto the tangent space plus one normal.  Each
projection is analysed with the patch descriptors.  Its Hessian, rebuilt in
the shared tangent basis, becomes one normal component of II.  The Gauss
equation then gives the intrinsic curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .descriptors import CurvatureEstimate, curvature_from_patch, eig_sym
from .domains import cloud_patch_invariants
from .models import PointCloud

__all__ = [
    "AdaptedFrame",
    "FrameError",
    "SubmanifoldCurvature",
    "assemble_second_fundamental_form",
    "estimate_frame",
    "project_to_hypersurface",
    "riemann_from_II",
    "submanifold_curvature",
]


class FrameError(ValueError):
    """The local spectrum shows no clear tangent/normal split."""


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal tangent and normal bases (rows) at a point."""

    tangent_basis: np.ndarray
    normal_basis: np.ndarray
    source: str = "injected"
    spectrum: Optional[np.ndarray] = None

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.tangent_basis, dtype=float))
        N = np.atleast_2d(np.asarray(self.normal_basis, dtype=float))
        if T.shape[1] != N.shape[1] or T.shape[0] + N.shape[0] != T.shape[1]:
            raise ValueError("tangent and normal bases must together span the ambient space")
        F = np.vstack([T, N])
        if np.max(np.abs(F @ F.T - np.eye(len(F)))) > 1e-10:
            raise ValueError("frame is not orthonormal")
        object.__setattr__(self, "tangent_basis", T)
        object.__setattr__(self, "normal_basis", N)

    @property
    def n(self) -> int:
        return self.tangent_basis.shape[0]

    @property
    def k(self) -> int:
        return self.normal_basis.shape[0]


def estimate_frame(cloud: PointCloud, center, eps: float, n: Optional[int] = None,
                   min_gap: float = 10.0) -> AdaptedFrame:
    """Tangent and normal bases from the local scatter matrix.

    Tangent vectors are the top ``n`` eigenvectors.  Without ``n`` the split
    is put at the largest ratio of consecutive eigenvalues, which must
    exceed ``min_gap``.
    """
    inv = cloud_patch_invariants(cloud, center, eps)
    dec = eig_sym(inv.normalized_covariance())
    lam = dec.eigenvalues
    d = len(lam)
    if n is None:
        floor = max(lam[0], 1e-300) * 1e-15
        ratios = lam[:-1] / np.maximum(lam[1:], floor)
        i = int(np.argmax(ratios))
        if ratios[i] < min_gap:
            raise FrameError(f"largest spectral gap ratio {ratios[i]:.3g} < {min_gap:g}; supply n")
        n = i + 1
    n = int(n)
    if not 1 <= n < d:
        raise ValueError(f"intrinsic dimension must be in [1, {d - 1}]")
    V = dec.eigenvectors
    return AdaptedFrame(V[:, :n].T.copy(), V[:, n:].T.copy(), source="estimated", spectrum=lam)


def project_to_hypersurface(cloud: PointCloud, frame: AdaptedFrame, j: int,
                            center=None) -> PointCloud:
    """Coordinates ``(<X-c, e_1>, ..., <X-c, e_n>, <X-c, N_j>)``, with ``j`` from 1 to k."""
    if isinstance(j, bool) or int(j) != j or not 1 <= j <= frame.k:
        raise ValueError(f"normal index must be in 1..{frame.k}")
    c = np.zeros(cloud.ambient_dim) if center is None else np.asarray(center, dtype=float)
    B = np.vstack([frame.tangent_basis, frame.normal_basis[int(j) - 1]])
    return PointCloud((cloud.points - c) @ B.T, weights=cloud.weights)


@dataclass
class SubmanifoldCurvature:
    """II coefficients ``(n, n, k)`` and the curvature derived from them."""

    second_fundamental_form: np.ndarray
    mean_curvature_vector: np.ndarray
    frame: Optional[AdaptedFrame] = None
    riemann: Optional[np.ndarray] = None
    ricci: Optional[np.ndarray] = None
    scalar: Optional[float] = None
    estimates: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.second_fundamental_form.shape[0]

    @property
    def k(self) -> int:
        return self.second_fundamental_form.shape[2]

    def independent_components(self) -> dict:
        """``R[a,b,c,d]`` for ``a<b``, ``c<d``, ``(a,b) <= (c,d)``, 1-based keys."""
        if self.riemann is None:
            raise ValueError("Riemann tensor not computed")
        out = {}
        n = self.n
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        for i, (a, b) in enumerate(pairs):
            for c, d in pairs[i:]:
                out[(a + 1, b + 1, c + 1, d + 1)] = float(self.riemann[a, b, c, d])
        return out


def _polar(U):
    W, _, Zt = np.linalg.svd(U)
    return W @ Zt


def _hessian(est: CurvatureEstimate, n: int, scalar_roots: bool) -> np.ndarray:
    D = _polar(np.asarray(est.principal_directions)[:, :n])
    if est.kappas is not None and not (scalar_roots and n == 2):
        k = est.kappas
    elif n == 2:
        half = 0.5 * np.sqrt(max(est.H ** 2 - 2.0 * est.scalar_curv, 0.0))
        k = np.array([0.5 * est.H + half, 0.5 * est.H - half])
        if est.kappas is None:
            # singular estimate: directions come in tangent-eigenvalue order, and
            # the larger curvature goes with the smaller eigenvalue when H > 0
            D = D[::-1]
    elif est.kappas is None and n == 1:
        k = np.array([est.H])
    else:
        raise ValueError("curvatures unavailable for this projection (H ~ 0 with n > 2)")
    return D.T @ np.diag(k) @ D


def assemble_second_fundamental_form(estimates: Sequence[CurvatureEstimate],
                                     frame: Optional[AdaptedFrame] = None,
                                     scalar_roots: bool = False) -> SubmanifoldCurvature:
    """Stack per-normal Hessians ``V_j K_j V_j^T`` into II.

    Each estimate's principal directions are read in the shared tangent
    coordinates (their first n components).  With ``scalar_roots`` and n = 2
    the two curvatures are instead the roots of ``t**2 - H t + R/2``, so the
    Hessian determinant matches the estimated scalar curvature exactly;
    singular (``H ~ 0``) estimates always use that route.
    """
    if not estimates:
        raise ValueError("need at least one hypersurface estimate")
    n = estimates[0].n
    if any(e.n != n for e in estimates):
        raise ValueError("estimates disagree on the intrinsic dimension")
    if frame is not None and (frame.n != n or frame.k != len(estimates)):
        raise ValueError("frame dimensions do not match the estimates")
    hess = np.stack([_hessian(e, n, scalar_roots) for e in estimates], axis=-1)
    hess = 0.5 * (hess + np.transpose(hess, (1, 0, 2)))
    return SubmanifoldCurvature(
        second_fundamental_form=hess,
        mean_curvature_vector=np.einsum("aaj->j", hess),
        frame=frame,
        estimates=list(estimates),
    )


def riemann_from_II(sc: SubmanifoldCurvature) -> SubmanifoldCurvature:
    """Fill Riemann, Ricci and scalar curvature from II by the Gauss equation.

    ``R[m,n,a,b] = <II(m,b), II(n,a)> - <II(m,a), II(n,b)>``,
    ``Ric[a,b] = sum_m R[m,a,b,m]`` and the scalar is the trace of Ricci.
    Symmetry residuals (and, for k = 1, the hypersurface identities) go to
    ``diagnostics``.
    """
    II = np.asarray(sc.second_fundamental_form, dtype=float)
    if II.ndim != 3 or II.shape[0] != II.shape[1]:
        raise ValueError("II must have shape (n, n, k)")
    R = np.einsum("mbk,nak->mnab", II, II) - np.einsum("mak,nbk->mnab", II, II)
    ric = np.einsum("mabm->ab", R)
    scalar = float(np.trace(ric))
    diag = dict(sc.diagnostics)
    diag["symmetry_residuals"] = riemann_symmetry_residuals(R)
    if II.shape[2] == 1:
        S = II[:, :, 0]
        H = np.trace(S)
        diag["ricci_identity_residual"] = float(np.max(np.abs(ric - (H * S - S @ S))))
        diag["scalar_identity_residual"] = abs(scalar - (H * H - np.sum(S * S)))
    sc.riemann, sc.ricci, sc.scalar, sc.diagnostics = R, ric, scalar, diag
    return sc


def riemann_symmetry_residuals(R: np.ndarray) -> dict:
    """Max deviations from the algebraic symmetries of a curvature tensor."""
    bianchi = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    return {
        "antisym_first": float(np.max(np.abs(R + np.transpose(R, (1, 0, 2, 3))))),
        "antisym_second": float(np.max(np.abs(R + np.transpose(R, (0, 1, 3, 2))))),
        "pair_exchange": float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))))),
        "bianchi": float(np.max(np.abs(bianchi))),
    }


def submanifold_curvature(cloud: PointCloud, center, eps: float, n: Optional[int] = None,
                          frame: Optional[AdaptedFrame] = None, h_tol: float = 1e-3,
                          scalar_roots: bool = True) -> SubmanifoldCurvature:
    """Full pipeline: frame, k projections, patch descriptors, II and Gauss equation.

    Each projection is re-queried with the ball of radius ``eps`` in its own
    (n+1)-dimensional space; sample the cloud slightly beyond ``eps`` so that
    ball is fully covered.  Each projection's normal is oriented along the
    positive ``N_j`` axis.
    """
    c = np.asarray(center, dtype=float)
    if frame is None:
        frame = estimate_frame(cloud, c, eps, n)
    elif n is not None and frame.n != n:
        raise ValueError("injected frame disagrees with n")
    up = np.zeros(frame.n + 1)
    up[-1] = 1.0
    ests = []
    for j in range(1, frame.k + 1):
        P = project_to_hypersurface(cloud, frame, j, c)
        inv = cloud_patch_invariants(P, np.zeros(frame.n + 1), eps)
        ests.append(curvature_from_patch(inv, frame.n, eps, h_tol=h_tol).oriented(up))
    sc = assemble_second_fundamental_form(ests, frame, scalar_roots=scalar_roots)
    sc.diagnostics["frame_source"] = frame.source
    return riemann_from_II(sc)
