"""Synthetic hypersurfaces and submanifolds with exact curvature, and point clouds.

Every model lives in a local chart: a base point ``origin``, an orthonormal
``rotation`` whose first ``n`` columns span the tangent space and whose last
column is the unit normal ``N``.  In chart coordinates the hypersurface is the
graph ``z = height(x)`` with ``height(0) = 0`` and ``grad height(0) = 0``.

Orientation convention: ``N`` points into the side the surface bends towards
when all curvatures are positive, so a sphere seen from its interior has
``kappa = +1/R``.  The interior of the sphere is the ``+1`` side of
:meth:`HypersurfaceModel.side_classifier`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "ChartError",
    "CurvatureOracle",
    "GraphModel",
    "HypersurfaceModel",
    "PointCloud",
    "SphereModel",
    "SubmanifoldGraph",
    "elementary_symmetric",
    "format_cloud_csv",
    "read_cloud_csv",
    "write_cloud_csv",
]

# Ops reject scales beyond this fraction of the chart validity radius.
CHART_FRACTION = 0.8


class ChartError(ValueError):
    """A point or scale falls outside the model's local graph chart."""


def elementary_symmetric(values: Sequence[float]) -> np.ndarray:
    """Elementary symmetric polynomials ``K_1 .. K_n`` of ``values``."""
    values = np.asarray(values, dtype=float)
    e = np.zeros(len(values) + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return e[1:]


@dataclass(frozen=True)
class CurvatureOracle:
    """Exact curvature data of a hypersurface at a point (ambient coordinates)."""

    kappas: np.ndarray
    directions: np.ndarray  # (n, n+1), one unit principal direction per row
    normal: np.ndarray

    @property
    def H(self) -> float:
        return float(np.sum(self.kappas))

    @property
    def scalar_curv(self) -> float:
        return float(2.0 * elementary_symmetric(self.kappas)[1]) if len(self.kappas) > 1 else 0.0

    @property
    def elementary_symmetric(self) -> np.ndarray:
        return elementary_symmetric(self.kappas)

    @property
    def gauss_curv(self) -> float:
        return float(np.prod(self.kappas))


def _pose(dim: int, rotation, origin) -> tuple[np.ndarray, np.ndarray]:
    Q = np.eye(dim) if rotation is None else np.array(rotation, dtype=float)
    p = np.zeros(dim) if origin is None else np.array(origin, dtype=float)
    if Q.shape != (dim, dim) or p.shape != (dim,):
        raise ValueError(f"pose must be a ({dim},{dim}) rotation and a ({dim},) origin")
    if np.max(np.abs(Q.T @ Q - np.eye(dim))) > 1e-10:
        raise ValueError("rotation must be orthogonal")
    Q.setflags(write=False)
    p.setflags(write=False)
    return Q, p


def _disk_samples(rng: np.random.Generator, n: int, radius: float, size: int) -> np.ndarray:
    g = rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(size) ** (1.0 / n))[:, None]


class HypersurfaceModel:
    """Base class: a hypersurface of R^{n+1} given as a graph over its tangent space."""

    n: int
    rotation: np.ndarray
    origin: np.ndarray
    validity_radius: float

    @property
    def ambient_dim(self) -> int:
        return self.n + 1

    @property
    def normal(self) -> np.ndarray:
        return self.rotation[:, -1]

    # -- chart geometry, overridden by subclasses ---------------------------------
    def height(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def slope_bound(self, rho: float) -> float:
        """Upper bound of ``|grad height|`` over the tangent disk of radius ``rho``."""
        raise NotImplementedError

    # -- coordinates -------------------------------------------------------------
    def to_ambient(self, X_local: np.ndarray) -> np.ndarray:
        return np.asarray(X_local, dtype=float) @ self.rotation.T + self.origin

    def to_local(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.origin) @ self.rotation

    def check_scale(self, eps: float) -> float:
        eps = float(eps)
        if not (eps > 0 and math.isfinite(eps)):
            raise ValueError(f"scale must be positive, got {eps!r}")
        limit = CHART_FRACTION * self.validity_radius
        if eps > limit * (1 + 1e-12):
            raise ChartError(f"scale {eps:g} exceeds the chart limit {limit:g}")
        return eps

    def _check_base_point(self, p) -> None:
        if p is not None and np.max(np.abs(np.asarray(p, dtype=float) - self.origin)) > 1e-12:
            raise ValueError("domains are centred at the model's base point (its origin)")

    def area_element(self, x: np.ndarray) -> np.ndarray:
        g = self.gradient(x)
        return np.sqrt(1.0 + np.sum(g * g, axis=-1))

    # -- public operations -------------------------------------------------------
    def graph_eval(self, x) -> np.ndarray:
        """Height of the surface above tangent point(s) ``x`` (chart coordinates)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"tangent vectors must have length {self.n}")
        if np.any(np.linalg.norm(x, axis=-1) > self.validity_radius):
            raise ChartError("tangent point outside the chart radius")
        return self.height(x)

    def side_classifier(self, X, tol: float = 1e-12) -> np.ndarray:
        """+1 on the side ``N`` points into, -1 on the other side, 0 on the surface."""
        L = self.to_local(X)
        x, z = L[..., :-1], L[..., -1]
        if np.any(np.linalg.norm(x, axis=-1) > self.validity_radius):
            raise ChartError("point outside the chart cylinder")
        d = z - self.height(x)
        return np.where(np.abs(d) <= tol, 0, np.sign(d)).astype(int)

    def exact_curvatures(self, p=None, tol: float = 1e-9) -> CurvatureOracle:
        """Principal curvatures, directions and normal at the surface point ``p``.

        ``p`` defaults to the base point.  Curvatures are the eigenvalues of the
        shape operator ``g^{-1} h`` with ``g = I + grad z grad z^T`` and
        ``h = Hess z / sqrt(1 + |grad z|^2)``; the normal is ``(-grad z, 1)``
        normalised, mapped to ambient coordinates.
        """
        if p is None:
            x = np.zeros(self.n)
        else:
            L = self.to_local(p)
            x = L[:-1]
            if np.linalg.norm(x) > self.validity_radius:
                raise ChartError("point outside the chart")
            if abs(L[-1] - self.height(x)) > tol * max(1.0, self.validity_radius):
                raise ValueError("point does not lie on the surface")
        grad = self.gradient(x)
        W = math.sqrt(1.0 + grad @ grad)
        g = np.eye(self.n) + np.outer(grad, grad)
        h = self.hessian(x) / W
        kappas, V = scipy.linalg.eigh(h, g)
        # order eigenpairs by the chart axis each direction aligns with
        order = _axis_order(V)
        kappas, V = kappas[order], V[:, order]
        tangents = np.vstack([V, grad @ V])  # columns are unit tangent vectors
        tangents /= np.linalg.norm(tangents, axis=0)
        for j in range(self.n):
            i = np.argmax(np.abs(tangents[:, j]))
            if tangents[i, j] < 0:
                tangents[:, j] *= -1
        normal = np.append(-grad, 1.0) / W
        return CurvatureOracle(
            kappas=kappas,
            directions=(self.rotation @ tangents).T,
            normal=self.rotation @ normal,
        )

    def sample_patch(self, eps: float, count: int, seed: int = 0, p=None) -> "PointCloud":
        """Area-uniform sample of the patch ``S ∩ B_p(eps)`` by rejection.

        Tangent-disk proposals are accepted when inside the ball and with
        probability ``sqrt(det g) / max sqrt(det g)``.  The generator is numpy's
        PCG64 seeded with ``seed``.
        """
        eps = self.check_scale(eps)
        self._check_base_point(p)
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        w_max = math.sqrt(1.0 + self.slope_bound(eps) ** 2)
        out, have, rounds = [], 0, 0
        while have < count:
            rounds = _check_progress(rounds, have)
            m = max(1024, 2 * (count - have))
            x = _disk_samples(rng, self.n, eps, m)
            u = rng.random(m)
            z = self.height(x)
            keep = (np.sum(x * x, axis=1) + z * z <= eps * eps) & (u * w_max <= self.area_element(x))
            pts = np.column_stack([x[keep], z[keep]])
            out.append(pts)
            have += len(pts)
        local = np.vstack(out)[:count]
        return PointCloud(self.to_ambient(local))


def _check_progress(rounds: int, have: int, limit: int = 200) -> int:
    if rounds >= limit and have == 0:
        raise RuntimeError("rejection sampler accepted no points; check the scale and coefficients")
    return rounds + 1


def _axis_order(V: np.ndarray) -> np.ndarray:
    n = V.shape[1]
    order = np.empty(n, dtype=int)
    free = list(range(n))
    A = np.abs(V)
    for axis in range(n):
        j = max(free, key=lambda c: A[axis, c])
        order[axis] = j
        free.remove(j)
    return order


def _sym_tensor(T, n: int, order: int) -> Optional[np.ndarray]:
    if T is None:
        return None
    T = np.array(T, dtype=float)
    if T.shape != (n,) * order:
        raise ValueError(f"order-{order} coefficient tensor must have shape {(n,) * order}")
    if not np.all(np.isfinite(T)):
        raise ValueError("coefficients must be finite")
    perms = list(itertools.permutations(range(order)))
    S = sum(np.transpose(T, p) for p in perms) / len(perms)
    S.setflags(write=False)
    return S


class GraphModel(HypersurfaceModel):
    """Polynomial graph ``z = 1/2 sum kappa_i x_i^2 + c_ijk x_i x_j x_k + q_ijkl x_i x_j x_k x_l``.

    The cubic and quartic tensors are symmetrised; sums run over all index
    tuples, so ``cubic[0,0,0] = c`` contributes ``c * x_1**3``.

    Parameters
    ----------
    kappas : sequence of float
        Principal curvatures at the base point; the chart axes are the
        principal directions.
    cubic, quartic : array_like, optional
        Coefficient tensors of shape ``(n,)*3`` and ``(n,)*4``.
    validity_radius : float, optional
        Chart radius.  Defaults to ``0.5 / max(max|kappa|, 0.5)``; an exactly
        flat graph without higher-order terms is a global chart (infinite
        radius).
    rotation, origin : array_like, optional
        Pose of the chart in ambient space.
    """

    def __init__(self, kappas, cubic=None, quartic=None, validity_radius=None,
                 rotation=None, origin=None):
        k = np.array(kappas, dtype=float).ravel()
        if k.size < 1 or not np.all(np.isfinite(k)):
            raise ValueError("kappas must be a non-empty finite sequence")
        k.setflags(write=False)
        self.kappas = k
        self.n = k.size
        self.cubic = _sym_tensor(cubic, self.n, 3)
        self.quartic = _sym_tensor(quartic, self.n, 4)
        if validity_radius is None:
            kmax = float(np.max(np.abs(k)))
            validity_radius = 0.5 / max(kmax, 0.5)
            if kmax == 0 and self.cubic is None and self.quartic is None:
                validity_radius = math.inf
        self.validity_radius = float(validity_radius)
        if not self.validity_radius > 0:
            raise ValueError("validity radius must be positive")
        self.rotation, self.origin = _pose(self.n + 1, rotation, origin)

    def __repr__(self):
        extra = ""
        if self.cubic is not None:
            extra += ", cubic=..."
        if self.quartic is not None:
            extra += ", quartic=..."
        return f"GraphModel(kappas={self.kappas.tolist()}{extra})"

    def height(self, x):
        x = np.asarray(x, dtype=float)
        z = 0.5 * np.einsum("...i,i->...", x * x, self.kappas)
        if self.cubic is not None:
            z = z + np.einsum("ijk,...i,...j,...k->...", self.cubic, x, x, x)
        if self.quartic is not None:
            z = z + np.einsum("ijkl,...i,...j,...k,...l->...", self.quartic, x, x, x, x)
        return z

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = x * self.kappas
        if self.cubic is not None:
            g = g + 3.0 * np.einsum("ijk,...j,...k->...i", self.cubic, x, x)
        if self.quartic is not None:
            g = g + 4.0 * np.einsum("ijkl,...j,...k,...l->...i", self.quartic, x, x, x)
        return g

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        H = np.zeros(x.shape[:-1] + (self.n, self.n)) + np.diag(self.kappas)
        if self.cubic is not None:
            H = H + 6.0 * np.einsum("ijk,...k->...ij", self.cubic, x)
        if self.quartic is not None:
            H = H + 12.0 * np.einsum("ijkl,...k,...l->...ij", self.quartic, x, x)
        return H

    def slope_bound(self, rho):
        b = float(np.max(np.abs(self.kappas))) * rho
        if self.cubic is not None:
            b += 3.0 * np.linalg.norm(self.cubic) * rho ** 2
        if self.quartic is not None:
            b += 4.0 * np.linalg.norm(self.quartic) * rho ** 3
        return b


class SphereModel(HypersurfaceModel):
    """Round sphere of radius ``R`` through the base point, centre along ``+N``.

    In the chart the sphere near the base point is the graph
    ``z = R - sqrt(R^2 - |x|^2)``; the chart is valid for ``|x| < R``.
    """

    def __init__(self, radius: float, ambient_dim: int = 3, rotation=None, origin=None):
        radius = float(radius)
        if not (radius > 0 and math.isfinite(radius)):
            raise ValueError("sphere radius must be positive")
        if int(ambient_dim) != ambient_dim or ambient_dim < 2:
            raise ValueError("ambient dimension must be >= 2")
        self.radius = radius
        self.n = int(ambient_dim) - 1
        self.kappas = np.full(self.n, 1.0 / radius)
        self.validity_radius = radius
        self.rotation, self.origin = _pose(self.n + 1, rotation, origin)

    def __repr__(self):
        return f"SphereModel(radius={self.radius}, ambient_dim={self.ambient_dim})"

    @property
    def center(self) -> np.ndarray:
        return self.origin + self.radius * self.normal

    def height(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        # R - sqrt(R^2 - r^2) written without cancellation
        return r2 / (self.radius + np.sqrt(self.radius ** 2 - r2))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return x / np.sqrt(self.radius ** 2 - r2)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        R2 = self.radius ** 2
        r2 = np.sum(x * x, axis=-1)[..., None, None]
        s = np.sqrt(R2 - r2)
        return np.eye(self.n) / s + np.einsum("...i,...j->...ij", x, x) / s ** 3

    def slope_bound(self, rho):
        return rho / math.sqrt(self.radius ** 2 - rho ** 2)

    def side_classifier(self, X, tol: float = 1e-12):
        d = self.radius - np.linalg.norm(np.asarray(X, dtype=float) - self.center, axis=-1)
        return np.where(np.abs(d) <= tol, 0, np.sign(d)).astype(int)

    def exact_curvatures(self, p=None, tol: float = 1e-9) -> CurvatureOracle:
        if p is None:
            p = self.origin
        p = np.asarray(p, dtype=float)
        if abs(np.linalg.norm(p - self.center) - self.radius) > tol * self.radius:
            raise ValueError("point does not lie on the sphere")
        normal = (self.center - p) / self.radius
        # tangent frame: rotate the chart frame so its last axis is the normal
        M = np.column_stack([normal, self.rotation[:, :-1]])
        Qm, _ = np.linalg.qr(M)
        if Qm[:, 0] @ normal < 0:
            Qm = -Qm
        return CurvatureOracle(
            kappas=np.full(self.n, 1.0 / self.radius),
            directions=Qm[:, 1:].T.copy(),
            normal=normal,
        )


class SubmanifoldGraph:
    """n-dimensional graph ``x -> (x, f_1(x), ..., f_k(x))`` in R^{n+k}.

    ``f_j(x) = 1/2 x^T A_j x + sum c^j_abc x_a x_b x_c`` with ``A_j`` the
    Hessians at the base point, so the second fundamental form there is
    ``II(e_a, e_b) = sum_j A_j[a, b] N_j``.
    """

    def __init__(self, hessians, cubics=None, validity_radius=None, rotation=None, origin=None):
        A = np.array(hessians, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError("hessians must have shape (k, n, n)")
        if np.max(np.abs(A - np.transpose(A, (0, 2, 1)))) > 1e-12:
            raise ValueError("hessians must be symmetric")
        self.k, self.n = A.shape[0], A.shape[1]
        self.hessians = A
        self.cubics = None
        if cubics is not None:
            self.cubics = [(_sym_tensor(c, self.n, 3) if c is not None else None) for c in cubics]
            if len(self.cubics) != self.k:
                raise ValueError("one cubic tensor (or None) per normal direction")
        if validity_radius is None:
            s = max(np.max(np.abs(np.linalg.eigvalsh(Aj))) for Aj in A)
            validity_radius = 0.5 / max(s, 0.5)
        self.validity_radius = float(validity_radius)
        self.rotation, self.origin = _pose(self.n + self.k, rotation, origin)

    @property
    def ambient_dim(self) -> int:
        return self.n + self.k

    def heights(self, x) -> np.ndarray:
        """``(..., k)`` array of ``f_j(x)``."""
        x = np.asarray(x, dtype=float)
        f = 0.5 * np.einsum("jab,...a,...b->...j", self.hessians, x, x)
        if self.cubics is not None:
            for j, c in enumerate(self.cubics):
                if c is not None:
                    f[..., j] += np.einsum("abc,...a,...b,...c->...", c, x, x, x)
        return f

    def jacobian(self, x) -> np.ndarray:
        """``(..., k, n)`` array of ``grad f_j``."""
        x = np.asarray(x, dtype=float)
        J = np.einsum("jab,...b->...ja", self.hessians, x)
        if self.cubics is not None:
            for j, c in enumerate(self.cubics):
                if c is not None:
                    J[..., j, :] += 3.0 * np.einsum("abc,...b,...c->...a", c, x, x)
        return J

    def area_element(self, x) -> np.ndarray:
        J = self.jacobian(x)
        g = np.eye(self.n) + np.einsum("...ja,...jb->...ab", J, J)
        return np.sqrt(np.linalg.det(g))

    def to_ambient(self, X_local):
        return np.asarray(X_local, dtype=float) @ self.rotation.T + self.origin

    @property
    def tangent_basis(self) -> np.ndarray:
        return self.rotation[:, : self.n].T.copy()

    @property
    def normal_basis(self) -> np.ndarray:
        return self.rotation[:, self.n:].T.copy()

    def exact_second_fundamental_form(self) -> np.ndarray:
        """``(n, n, k)`` coefficients of II in the chart tangent/normal bases."""
        return np.transpose(self.hessians, (1, 2, 0)).copy()

    def sample_patch(self, eps: float, count: int, seed: int = 0) -> "PointCloud":
        """Area-uniform sample of ``M ∩ B(eps)`` around the base point."""
        eps = float(eps)
        if not eps > 0:
            raise ValueError("scale must be positive")
        if eps > CHART_FRACTION * self.validity_radius * (1 + 1e-12):
            raise ChartError("scale exceeds the chart limit")
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        slope2 = 0.0
        for j in range(self.k):
            b = np.linalg.norm(self.hessians[j], 2) * eps
            if self.cubics is not None and self.cubics[j] is not None:
                b += 3.0 * np.linalg.norm(self.cubics[j]) * eps ** 2
            slope2 += b * b
        # det(I + J^T J) <= (1 + |J|_F^2 / n)^n
        w_max = math.sqrt((1.0 + slope2 / self.n) ** self.n) if self.n else 1.0
        w_max = max(w_max, math.sqrt(1.0 + slope2))
        out, have, rounds = [], 0, 0
        while have < count:
            rounds = _check_progress(rounds, have)
            m = max(1024, 2 * (count - have))
            x = _disk_samples(rng, self.n, eps, m)
            u = rng.random(m)
            f = self.heights(x)
            keep = (np.sum(x * x, axis=1) + np.sum(f * f, axis=1) <= eps * eps)
            keep &= u * w_max <= self.area_element(x)
            out.append(np.column_stack([x[keep], f[keep]]))
            have += int(keep.sum())
        return PointCloud(self.to_ambient(np.vstack(out)[:count]))


@dataclass
class PointCloud:
    """Finite set of points in R^d with optional positive weights."""

    points: np.ndarray
    weights: Optional[np.ndarray] = None
    comments: list = field(default_factory=list)

    def __post_init__(self):
        P = np.array(self.points, dtype=float)
        if P.ndim == 1:
            P = P[None, :]
        if P.ndim != 2 or P.shape[1] < 1:
            raise ValueError("points must be a 2-D array (count, dim)")
        if not np.all(np.isfinite(P)):
            raise ValueError("points must be finite")
        self.points = P
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).ravel()
            if w.shape != (len(P),):
                raise ValueError("one weight per point")
            if not np.all(w > 0):
                raise ValueError("weights must be positive")
            self.weights = w

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)


def format_cloud_csv(cloud: PointCloud, comments: Sequence[str] = ()) -> str:
    """Cloud CSV text: ``# dim=<d>``, comment lines, then one point per line."""
    d = cloud.ambient_dim
    lines = [f"# dim={d}"]
    lines += [f"# {c}" for c in list(cloud.comments) + list(comments)]
    cols = cloud.points if cloud.weights is None else np.column_stack([cloud.points, cloud.weights])
    lines += [",".join(f"{v:.17g}" for v in row) for row in cols]
    return "\n".join(lines) + "\n"


def write_cloud_csv(cloud: PointCloud, path, comments: Sequence[str] = ()) -> None:
    """Write :func:`format_cloud_csv` output to ``path``."""
    Path(path).write_text(format_cloud_csv(cloud, comments))


def read_cloud_csv(path) -> PointCloud:
    """Inverse of :func:`write_cloud_csv`; a ``d+1``-th column is read as weights."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].replace(" ", "").startswith("#dim="):
        raise ValueError(f"{path}: first line must be '# dim=<d>'")
    d = int(text[0].split("=", 1)[1])
    comments, rows = [], []
    for lineno, line in enumerate(text[1:], start=2):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            comments.append(s[1:].strip())
            continue
        vals = [float(v) for v in s.split(",")]
        if len(vals) not in (d, d + 1):
            raise ValueError(f"{path}:{lineno}: expected {d} or {d + 1} columns")
        rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no points")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: weight column present on some rows only")
    A = np.array(rows)
    if A.shape[1] == d:
        return PointCloud(A, comments=comments)
    return PointCloud(A[:, :d], weights=A[:, d], comments=comments)
