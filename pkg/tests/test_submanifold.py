import numpy as np
import pytest

from intcurv.descriptors import CurvatureEstimate, curvature_from_patch
from intcurv.domains import cloud_patch_invariants
from intcurv.convergence import line_angle
from intcurv.models import GraphModel, PointCloud, SubmanifoldGraph
from intcurv.submanifold import (AdaptedFrame, FrameError, SubmanifoldCurvature,
                                 assemble_second_fundamental_form, estimate_frame,
                                 project_to_hypersurface, riemann_from_II,
                                 riemann_symmetry_residuals, submanifold_curvature)
from oracles import random_rotation

SADDLES = np.array([[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [1.0, 0.0]]])


def _plane_cloud(count=2000, seed=0):
    rng = np.random.default_rng(seed)
    Q = random_rotation(rng, 4)
    local = np.column_stack([rng.uniform(-0.1, 0.1, size=(count, 2)), np.zeros((count, 2))])
    return PointCloud(local @ Q.T), Q


def _exact_frame(model):
    return AdaptedFrame(model.tangent_basis, model.normal_basis)


def test_frame_of_plane():
    cloud, Q = _plane_cloud()
    f = estimate_frame(cloud, np.zeros(4), 0.2)
    assert f.n == 2 and f.k == 2
    # every tangent vector lies in the plane spanned by Q's first two columns
    P = Q[:, :2] @ Q[:, :2].T
    for t in f.tangent_basis:
        assert line_angle(t, P @ t) < 1e-6


def test_frame_of_saddle_model():
    m = SubmanifoldGraph(SADDLES)
    cloud = m.sample_patch(0.1, 20000, seed=1)
    f = estimate_frame(cloud, np.zeros(4), 0.1)
    assert f.n == 2
    off_plane = np.linalg.norm(f.tangent_basis[:, 2:])
    assert off_plane < 0.1


def test_frame_is_invariant_under_duplication():
    cloud = SubmanifoldGraph(SADDLES).sample_patch(0.1, 5000, seed=2)
    doubled = PointCloud(np.vstack([cloud.points, cloud.points]))
    a = estimate_frame(cloud, np.zeros(4), 0.1)
    b = estimate_frame(doubled, np.zeros(4), 0.1)
    assert np.allclose(a.tangent_basis, b.tangent_basis, atol=1e-12)


def test_frame_needs_a_gap():
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.normal(scale=0.1, size=(2000, 4)))
    with pytest.raises(FrameError):
        estimate_frame(cloud, np.zeros(4), 1.0)


def test_projection_examples():
    cloud, Q = _plane_cloud()
    frame = AdaptedFrame(Q[:, :2].T, Q[:, 2:].T)
    for j in (1, 2):
        P = project_to_hypersurface(cloud, frame, j)
        assert np.max(np.abs(P.points[:, -1])) < 1e-15
        assert np.allclose(P.points[:, :2], cloud.points @ Q[:, :2], atol=0)
    m = SubmanifoldGraph(SADDLES)
    pts = m.sample_patch(0.1, 500, seed=3)
    P = project_to_hypersurface(pts, _exact_frame(m), 1)
    x, y = P.points[:, 0], P.points[:, 1]
    assert np.allclose(P.points[:, 2], (x * x - y * y) / 2, atol=1e-12)
    with pytest.raises(ValueError):
        project_to_hypersurface(pts, _exact_frame(m), 3)


def _estimate(kappas, dirs, n):
    kappas = np.asarray(kappas, dtype=float)
    return CurvatureEstimate(kappas=kappas, principal_directions=np.asarray(dirs, dtype=float),
                             normal=np.eye(n + 1)[-1], H=float(kappas.sum()), scalar_curv=0.0,
                             gauss_curv=None, elementary_symmetric=kappas, scale=0.1,
                             source="test")


def test_assemble_single_hypersurface():
    sc = assemble_second_fundamental_form([_estimate([2, 1], np.eye(3)[:2], 2)])
    assert np.allclose(sc.second_fundamental_form[:, :, 0], np.diag([2, 1]))
    assert np.allclose(sc.mean_curvature_vector, [3])


def test_assemble_saddles_and_gauss_value():
    s = 1 / np.sqrt(2)
    # f2 = xy has curvatures +1, -1 along the diagonals
    e1 = _estimate([1, -1], [[1, 0, 0], [0, 1, 0]], 2)
    e2 = _estimate([1, -1], [[s, s, 0], [-s, s, 0]], 2)
    sc = riemann_from_II(assemble_second_fundamental_form([e1, e2]))
    II = sc.second_fundamental_form
    assert np.allclose(II[0, 0], [1, 0]) and np.allclose(II[1, 1], [-1, 0])
    assert np.allclose(II[0, 1], [0, 1])
    assert sc.riemann[0, 1, 0, 1] == pytest.approx(2.0)
    assert sc.independent_components() == pytest.approx({(1, 2, 1, 2): 2.0})


def test_assemble_is_linear_in_curvatures():
    e = _estimate([1.5, -0.5], [[0.6, 0.8, 0], [-0.8, 0.6, 0]], 2)
    c = 2.5
    a = assemble_second_fundamental_form([e]).second_fundamental_form
    b = assemble_second_fundamental_form([_estimate(c * e.kappas, e.principal_directions, 2)])
    assert np.allclose(b.second_fundamental_form, c * a)


def test_riemann_flat_and_sphere():
    flat = riemann_from_II(SubmanifoldCurvature(np.zeros((2, 2, 2)), np.zeros(2)))
    assert np.all(flat.riemann == 0) and flat.scalar == 0
    sphere = riemann_from_II(SubmanifoldCurvature(np.eye(2)[:, :, None], np.array([2.0])))
    assert sphere.scalar == pytest.approx(2.0)
    assert sphere.diagnostics["ricci_identity_residual"] < 1e-14
    assert sphere.diagnostics["scalar_identity_residual"] < 1e-14


def test_riemann_symmetries_and_frame_covariance():
    rng = np.random.default_rng(7)
    for n, k in [(2, 2), (3, 2), (4, 3)]:
        II = rng.normal(size=(n, n, k))
        II = 0.5 * (II + II.transpose(1, 0, 2))
        sc = riemann_from_II(SubmanifoldCurvature(II, np.einsum("aaj->j", II)))
        assert max(riemann_symmetry_residuals(sc.riemann).values()) < 1e-10
        O = random_rotation(rng, k)
        rot = riemann_from_II(SubmanifoldCurvature(II @ O.T, np.zeros(k)))
        assert np.allclose(rot.riemann, sc.riemann, atol=1e-10)
        assert np.allclose(rot.ricci, sc.ricci, atol=1e-10)
        assert rot.scalar == pytest.approx(sc.scalar, abs=1e-10)


def test_hypersurface_identities_for_random_shape_operator():
    rng = np.random.default_rng(8)
    S = rng.normal(size=(4, 4))
    S = S + S.T
    sc = riemann_from_II(SubmanifoldCurvature(S[:, :, None], np.array([np.trace(S)])))
    assert sc.diagnostics["ricci_identity_residual"] < 1e-12
    assert sc.diagnostics["scalar_identity_residual"] < 1e-12


def _pooled_error(model, eps, seeds, count):
    vals = [submanifold_curvature(model.sample_patch(1.05 * eps, count, seed=s), np.zeros(4), eps,
                                  n=2).riemann[0, 1, 0, 1] for s in seeds]
    return abs(np.mean(vals) - 2.0)


def test_codimension_two_end_to_end_converges():
    # the O(eps^2) bias of the quadric is comparable to the noise of one cloud,
    # so errors are pooled over independent clouds
    m = SubmanifoldGraph(SADDLES)
    e1, e2 = (_pooled_error(m, eps, range(4), 4 * 10 ** 5) for eps in (0.1, 0.05))
    assert e2 < e1 < 0.05
    rng = np.random.default_rng(0)
    bent = SubmanifoldGraph(SADDLES, cubics=[rng.normal(size=(2, 2, 2)), rng.normal(size=(2, 2, 2))])
    e1, e2 = (_pooled_error(bent, eps, [0], 2 * 10 ** 5) for eps in (0.1, 0.05))
    assert e2 < 0.5 * e1


def test_planar_cloud_gives_zero_curvature():
    cloud, _ = _plane_cloud(5000)
    sc = submanifold_curvature(cloud, np.zeros(4), 0.08, n=2)
    assert np.max(np.abs(sc.riemann)) < 1e-12
    assert np.max(np.abs(sc.second_fundamental_form)) < 1e-9


def test_hypersurface_pipeline_matches_descriptors():
    rng = np.random.default_rng(4)
    m = GraphModel([2.0, 0.7], cubic=rng.normal(scale=0.3, size=(2, 2, 2)))
    cloud = m.sample_patch(0.2, 30000, seed=5)
    eps = 0.15
    frame = AdaptedFrame(np.eye(3)[:2], np.eye(3)[2:])
    est = curvature_from_patch(cloud_patch_invariants(cloud, np.zeros(3), eps), 2, eps)
    est = est.oriented(np.array([0, 0, 1.0]))
    sc = submanifold_curvature(cloud, np.zeros(3), eps, frame=frame, scalar_roots=False)
    assert np.allclose(np.linalg.eigvalsh(sc.second_fundamental_form[:, :, 0]),
                       np.sort(est.kappas), atol=1e-10)
    assert sc.mean_curvature_vector[0] == pytest.approx(est.H, abs=1e-10)
    sc2 = submanifold_curvature(cloud, np.zeros(3), eps, frame=frame, scalar_roots=True)
    assert sc2.scalar == pytest.approx(est.scalar_curv, abs=1e-10)
