"""Numerical volume, barycenter and covariance of ball-induced domains.

Three domains around a surface point ``p`` at scale ``eps``:

* the component ``V+``: the part of the ball ``B_p(eps)`` on the side the
  normal points into;
* the patch ``D``: the piece of the hypersurface inside the ball;
* the shell: the part of the sphere ``|X - p| = eps`` bounding ``V+``.

Graph models are integrated by product quadrature in chart coordinates; any
model exposing ``side_classifier`` can use the scrambled-Sobol path instead.
Point clouds get density-normalized discrete moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .models import ChartError, HypersurfaceModel, PointCloud
from .quadrature import gauss_legendre, sphere_rule

__all__ = [
    "ConvergenceError",
    "IntegralInvariants",
    "QuadratureConfig",
    "boundary_radius",
    "cloud_patch_invariants",
    "component_invariants",
    "patch_invariants",
    "shell_invariants",
]


class ConvergenceError(RuntimeError):
    """Quadrature did not reach the requested tolerance within the refinement cap."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Resolution and tolerance settings shared by all domain integrators.

    ``angular_level`` sets the polar node count ``8 * 2**level`` of the sphere
    rule; ``radial_points`` is the Gauss-Legendre count per radial interval.
    Each refinement doubles both.  ``mc_samples`` points per replicate are used
    by the Sobol path, ``mc_replicates`` independent scramblings give the
    standard error.
    """

    angular_level: int = 1
    radial_points: int = 16
    mc_samples: int = 2 ** 16
    mc_replicates: int = 8
    seed: int = 0
    tolerance: float = 1e-12
    max_refinements: int = 4

    def __post_init__(self):
        if self.angular_level < 0 or self.radial_points < 1:
            raise ValueError("quadrature resolution must be positive")
        if self.mc_samples < 2 or self.mc_replicates < 2:
            raise ValueError("need at least 2 samples and 2 replicates")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")

    @property
    def polar_points(self) -> int:
        return 8 * 2 ** self.angular_level


@dataclass
class IntegralInvariants:
    """Volume, barycenter and covariance of a domain.

    ``covariance`` is taken about ``barycenter`` and is divided by ``volume``
    when ``normalized`` is set.  ``center`` is the ball centre the domain was
    built around.  ``volume_is_measure`` is False when ``volume`` is only a
    sample count and carries no geometric meaning.
    """

    volume: float
    barycenter: np.ndarray
    covariance: np.ndarray
    domain_kind: str
    normalized: bool
    center: np.ndarray
    eps: Optional[float] = None
    volume_is_measure: bool = True
    std_errors: Optional[dict] = None
    reference_point: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.barycenter = np.asarray(self.barycenter, dtype=float)
        C = np.asarray(self.covariance, dtype=float)
        self.covariance = 0.5 * (C + C.T)
        self.center = np.asarray(self.center, dtype=float)
        if not self.volume > 0:
            raise ValueError("domain volume must be positive")

    @property
    def ambient_dim(self) -> int:
        return len(self.barycenter)

    def unnormalized_covariance(self) -> np.ndarray:
        if not self.normalized:
            return self.covariance
        if not self.volume_is_measure:
            raise ValueError("covariance cannot be unnormalized without a measured volume")
        return self.volume * self.covariance

    def normalized_covariance(self) -> np.ndarray:
        return self.covariance if self.normalized else self.covariance / self.volume

    def transformed(self, rotation, translation) -> "IntegralInvariants":
        """Invariants of the domain moved by ``X -> rotation @ X + translation``."""
        Q = np.asarray(rotation, dtype=float)
        t = np.asarray(translation, dtype=float)
        ref = None if self.reference_point is None else Q @ self.reference_point + t
        return replace(
            self,
            barycenter=Q @ self.barycenter + t,
            covariance=Q @ self.covariance @ Q.T,
            center=Q @ self.center + t,
            reference_point=ref,
        )


# ---------------------------------------------------------------------------
# boundary radius


def boundary_radius(model: HypersurfaceModel, direction, eps: float,
                    tol: float = 1e-13) -> np.ndarray:
    """Tangent radius ``r`` where the surface meets the sphere of radius ``eps``.

    Solves ``rho**2 + z(rho * direction)**2 = eps**2`` on ``(0, eps]`` by Newton
    iteration safeguarded with bisection.  ``direction`` may be a single unit
    vector or an array of them (last axis), in chart coordinates.
    """
    eps = model.check_scale(eps)
    u = np.asarray(direction, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != model.n:
        raise ValueError(f"directions must have length {model.n}")
    if np.max(np.abs(np.linalg.norm(u, axis=-1) - 1.0)) > 1e-10:
        raise ValueError("directions must be unit vectors")

    def g_and_dg(rho):
        x = rho[:, None] * u
        z = model.height(x)
        dz = np.einsum("ij,ij->i", model.gradient(x), u)
        return rho * rho + z * z - eps * eps, 2.0 * rho + 2.0 * z * dz

    lo = np.zeros(len(u))
    hi = np.full(len(u), eps)
    g_hi, _ = g_and_dg(hi)
    if np.any(g_hi < -tol * eps * eps):
        raise ChartError("no boundary root in (0, eps]")
    rho = hi.copy()
    done = g_hi <= 0.0
    for _ in range(200):
        g, dg = g_and_dg(rho)
        hi = np.where(g > 0, rho, hi)
        lo = np.where(g <= 0, rho, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = rho - g / dg
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        new = np.where(bad, 0.5 * (lo + hi), step)
        new = np.where(done, rho, new)
        conv = np.abs(new - rho) <= tol * eps * 1e-3
        rho = new
        done |= conv | (hi - lo <= tol * eps * 1e-3)
        if np.all(done):
            break
    else:
        raise ChartError("boundary radius iteration did not converge")
    g, _ = g_and_dg(rho)
    if np.max(np.abs(g)) > 10 * tol * eps * eps:
        raise ChartError("boundary radius residual too large")
    return rho[0] if single else rho


# ---------------------------------------------------------------------------
# moment accumulation


def _moments(points, weights):
    """Volume, barycenter and covariance about it of a weighted node set."""
    V = float(np.sum(weights))
    s = weights @ points / V
    Y = points - s
    C = (Y * weights[:, None]).T @ Y
    return V, s, C


def _to_ambient(model, V, s, C, kind, eps, **extra):
    Q, p = model.rotation, model.origin
    return IntegralInvariants(
        volume=V,
        barycenter=Q @ s + p,
        covariance=Q @ C @ Q.T,
        domain_kind=kind,
        normalized=False,
        center=p.copy(),
        eps=eps,
        **extra,
    )


def _converge(compute, cfg: QuadratureConfig, what: str):
    level, rad = cfg.angular_level, cfg.radial_points
    prev = compute(8 * 2 ** level, rad)
    for _ in range(cfg.max_refinements):
        level += 1
        rad *= 2
        cur = compute(8 * 2 ** level, rad)
        dv = abs(cur[0] - prev[0]) / abs(cur[0])
        dc = np.max(np.abs(cur[2] - prev[2])) / max(np.max(np.abs(cur[2])), 1e-300)
        if max(dv, dc) < cfg.tolerance:
            return cur, {"polar_points": 8 * 2 ** level, "radial_points": rad,
                         "relative_change": max(dv, dc)}
        prev = cur
    raise ConvergenceError(f"{what} quadrature did not converge to {cfg.tolerance:g}")


def _chart_setup(model, p, eps):
    if not isinstance(model, HypersurfaceModel):
        raise TypeError("quadrature needs a graph-chart hypersurface model")
    eps = model.check_scale(eps)
    model._check_base_point(p)
    return eps


def patch_invariants(model: HypersurfaceModel, p=None, eps: float = 0.1,
                     cfg: QuadratureConfig = QuadratureConfig()) -> IntegralInvariants:
    """Unnormalized invariants of the patch ``S ∩ B_p(eps)`` by product quadrature.

    Directions over ``S^{n-1}`` times Gauss-Legendre in ``rho`` on
    ``[0, r(direction)]``, each node weighted by the area element
    ``sqrt(1 + |grad z|**2) * rho**(n-1)``.
    """
    eps = _chart_setup(model, p, eps)
    n = model.n

    def compute(polar, rad):
        dirs, dw = sphere_rule(n, polar)
        r = boundary_radius(model, dirs, eps)
        rho, rw = gauss_legendre(np.zeros_like(r), r, rad)
        x = rho[..., None] * dirs[:, None, :]
        w = (dw[:, None] * rw * rho ** (n - 1)) * model.area_element(x)
        pts = np.concatenate([x, model.height(x)[..., None]], axis=-1)
        return _moments(pts.reshape(-1, n + 1), w.ravel())

    (V, s, C), info = _converge(compute, cfg, "patch")
    return _to_ambient(model, V, s, C, "patch", eps, info=info)


def _component_columns(model, eps, polar, rad):
    """Vertical columns ``[a, b]`` of ``V+`` over tangent nodes, in theta form.

    Tangent radius ``rho = eps sin(theta)`` and sphere height
    ``h = eps cos(theta)`` remove the square-root endpoint behaviour.
    Returns tangent points, column ends and measure weights.
    """
    n = model.n
    dirs, dw = sphere_rule(n, polar)
    r = boundary_radius(model, dirs, eps)
    zr = model.height(r[:, None] * dirs)
    theta_r = np.arctan2(r, np.abs(zr))
    # [0, theta_r]: column from the surface up to the sphere
    t1, w1 = gauss_legendre(np.zeros_like(theta_r), theta_r, rad)
    x1 = (eps * np.sin(t1))[..., None] * dirs[:, None, :]
    a1 = model.height(x1)
    b1 = eps * np.cos(t1)
    m1 = dw[:, None] * w1 * eps ** n * np.sin(t1) ** (n - 1) * np.cos(t1)
    # [theta_r, pi/2]: full chord when the surface has dropped below the ball
    below = zr < 0
    t2, w2 = gauss_legendre(theta_r, np.full_like(theta_r, 0.5 * np.pi), rad)
    x2 = (eps * np.sin(t2))[..., None] * dirs[:, None, :]
    b2 = eps * np.cos(t2)
    m2 = dw[:, None] * w2 * eps ** n * np.sin(t2) ** (n - 1) * np.cos(t2) * below[:, None]
    x = np.concatenate([x1.reshape(-1, n), x2.reshape(-1, n)])
    a = np.concatenate([a1.ravel(), -b2.ravel()])
    b = np.concatenate([b1.ravel(), b2.ravel()])
    m = np.concatenate([m1.ravel(), m2.ravel()])
    return x, a, b, m


def _column_moments(x, a, b, m):
    n = x.shape[1]
    L = (b - a) * m
    V = float(L.sum())
    st = L @ x / V
    sz = float(np.sum((b * b - a * a) * 0.5 * m)) / V
    y = x - st
    bz, az = b - sz, a - sz
    C = np.empty((n + 1, n + 1))
    C[:n, :n] = (y * L[:, None]).T @ y
    cross = (bz * bz - az * az) * 0.5 * m
    C[:n, n] = C[n, :n] = cross @ y
    C[n, n] = np.sum((bz ** 3 - az ** 3) / 3.0 * m)
    return V, np.append(st, sz), C


def component_invariants(model, p=None, eps: float = 0.1,
                         cfg: QuadratureConfig = QuadratureConfig(),
                         method: str = "auto") -> IntegralInvariants:
    """Unnormalized invariants of the spherical component ``V+`` at scale ``eps``.

    ``method="quadrature"`` integrates vertical columns between the graph and
    the sphere; ``method="qmc"`` uses scrambled Sobol points in the bounding
    cube filtered by ``model.side_classifier`` and attaches standard errors.
    ``"auto"`` picks quadrature for graph-chart models.
    """
    if method == "auto":
        method = "quadrature" if isinstance(model, HypersurfaceModel) else "qmc"
    if method == "qmc":
        return _component_qmc(model, p, eps, cfg)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    eps = _chart_setup(model, p, eps)

    def compute(polar, rad):
        return _column_moments(*_component_columns(model, eps, polar, rad))

    (V, s, C), info = _converge(compute, cfg, "component")
    return _to_ambient(model, V, s, C, "component", eps, info=info)


def _component_qmc(model, p, eps, cfg: QuadratureConfig) -> IntegralInvariants:
    from scipy.stats import qmc

    eps = float(eps)
    if hasattr(model, "check_scale"):
        model.check_scale(eps)
    p = np.asarray(model.origin if p is None else p, dtype=float)
    d = len(p)
    m = max(1, int(math.ceil(math.log2(cfg.mc_samples))))
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.mc_replicates)
    cube = (2.0 * eps) ** d
    reps = []
    for ss in seeds:
        U = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(ss)).random_base2(m)
        X = p + eps * (2.0 * U - 1.0)
        inside = np.sum((X - p) ** 2, axis=1) <= eps * eps
        Xin = X[inside]
        keep = model.side_classifier(Xin) > 0
        Y = Xin[keep] - p
        N = len(U)
        reps.append((cube * len(Y) / N, cube * Y.sum(axis=0) / N, cube * Y.T @ Y / N))
    V = np.array([r[0] for r in reps])
    M1 = np.array([r[1] for r in reps])
    M2 = np.array([r[2] for r in reps])
    Vm, M1m, M2m = V.mean(), M1.mean(axis=0), M2.mean(axis=0)
    s = M1m / Vm
    C = M2m - np.outer(M1m, M1m) / Vm
    # replicate spread of the derived quantities
    s_r = M1 / V[:, None]
    C_r = M2 - np.einsum("ri,rj->rij", M1, M1) / V[:, None, None]
    R = cfg.mc_replicates
    se = {
        "volume": float(V.std(ddof=1) / math.sqrt(R)),
        "barycenter": s_r.std(axis=0, ddof=1) / math.sqrt(R),
        "covariance": C_r.std(axis=0, ddof=1) / math.sqrt(R),
    }
    return IntegralInvariants(
        volume=float(Vm), barycenter=s + p, covariance=C, domain_kind="component",
        normalized=False, center=p.copy(), eps=eps, std_errors=se,
        info={"method": "qmc", "points": R * 2 ** m},
    )


def shell_invariants(model: HypersurfaceModel, p=None, eps: float = 0.1,
                     cfg: QuadratureConfig = QuadratureConfig()) -> IntegralInvariants:
    """Moments of the spherical shell ``V+ ∩ {|X - p| = eps}``.

    ``volume`` is the n-dimensional measure of the shell and ``barycenter`` its
    mean point.  ``covariance`` is the second moment about the barycenter of
    the component ``V+`` (stored as ``reference_point``): that matrix is the
    scale derivative of the component covariance.
    """
    eps = _chart_setup(model, p, eps)
    n = model.n
    comp = component_invariants(model, p, eps, cfg, method="quadrature")
    ref = model.to_local(comp.barycenter)

    def compute(polar, rad):
        dirs, dw = sphere_rule(n, polar)
        r = boundary_radius(model, dirs, eps)
        zr = model.height(r[:, None] * dirs)
        theta_r = np.arctan2(r, np.abs(zr))
        below = zr < 0
        meas = lambda t: eps ** n * np.sin(t) ** (n - 1)
        # upper sheet: [0, theta_r], or the whole hemisphere when the surface dips below
        t_end = np.where(below, 0.5 * np.pi, theta_r)
        t1, w1 = gauss_legendre(np.zeros_like(t_end), t_end, rad)
        # lower sheet beyond theta_r
        t2, w2 = gauss_legendre(theta_r, np.full_like(theta_r, 0.5 * np.pi), rad)
        pts, wts = [], []
        for t, w, sgn, mask in ((t1, w1, 1.0, 1.0), (t2, w2, -1.0, below[:, None])):
            x = (eps * np.sin(t))[..., None] * dirs[:, None, :]
            z = sgn * eps * np.cos(t)
            pts.append(np.concatenate([x, z[..., None]], axis=-1).reshape(-1, n + 1))
            wts.append((dw[:, None] * w * meas(t) * mask).ravel())
        P, W = np.vstack(pts), np.concatenate(wts)
        A = float(W.sum())
        sb = W @ P / A
        Y = P - ref
        return A, sb, (Y * W[:, None]).T @ Y

    (A, sb, C), info = _converge(compute, cfg, "shell")
    info["component"] = comp
    Q, p0 = model.rotation, model.origin
    return IntegralInvariants(
        volume=A, barycenter=Q @ sb + p0, covariance=Q @ C @ Q.T, domain_kind="shell",
        normalized=False, center=p0.copy(), eps=eps, reference_point=comp.barycenter,
        info=info,
    )


# ---------------------------------------------------------------------------
# discrete point clouds


def cloud_patch_invariants(cloud: PointCloud, center, eps: float,
                           area_estimate: Optional[float] = None,
                           min_points: Optional[int] = None) -> IntegralInvariants:
    """Density-normalized moments of the cloud points within ``eps`` of ``center``.

    Parameters
    ----------
    cloud : PointCloud
    center : array_like
        Ball centre in ambient coordinates.
    eps : float
        Ball radius.
    area_estimate : float, optional
        Measure of the underlying patch.  Without it ``volume`` is the total
        neighbour weight and is flagged as not being a measure.
    min_points : int, optional
        Minimum neighbour count, default ``ambient_dim + 1``.
    """
    eps = float(eps)
    if not eps > 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    if c.shape != (cloud.ambient_dim,):
        raise ValueError("centre dimension does not match the cloud")
    X = cloud.points
    D = X - c
    sel = np.einsum("ij,ij->i", D, D) <= eps * eps
    need = cloud.ambient_dim + 1 if min_points is None else int(min_points)
    count = int(sel.sum())
    if count < need:
        raise ValueError(f"only {count} points within eps={eps:g}, need {need}")
    w = np.ones(count) if cloud.weights is None else cloud.weights[sel]
    W = float(w.sum())
    if not W > 0:
        raise ValueError("zero total weight in the ball")
    _, s, C = _moments(X[sel], w)
    volume = W if area_estimate is None else float(area_estimate)
    return IntegralInvariants(
        volume=volume, barycenter=s, covariance=C / W, domain_kind="discrete",
        normalized=True, center=c, eps=eps, volume_is_measure=area_estimate is not None,
        info={"neighbors": count},
    )
