import numpy as np
import pytest

from intcurv.asymptotics import patch_asymptotics
from intcurv.convergence import (geometric_grid, line_angle, loglog_slope, matched_eigenvalues,
                                 normal_offset, random_graph_family)
from intcurv.domains import patch_invariants
from intcurv.models import GraphModel


def test_geometric_grid():
    assert np.allclose(geometric_grid(0.2), [0.2, 0.1, 0.05, 0.025])
    with pytest.raises(ValueError):
        geometric_grid(0.0)


def test_loglog_slope_recovers_power():
    s = np.array([0.2, 0.1, 0.05, 0.025])
    assert loglog_slope(s, 3 * s ** 4.5) == pytest.approx(4.5)
    with pytest.raises(ValueError):
        loglog_slope(s, [1, 1, 0, 1])


def test_line_angle_small_and_sign_blind():
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([-1.0, 1e-12, 0.0])
    assert line_angle(u, v) == pytest.approx(1e-12, rel=1e-6)
    assert line_angle(u, [0, 1, 0]) == pytest.approx(np.pi / 2)


def test_matched_eigenvalues_patch_layout():
    m = GraphModel([-1.0, 2.5])
    o = m.exact_curvatures()
    inv = patch_invariants(m, eps=0.05)
    lam = matched_eigenvalues(inv, o.kappas, o.normal)
    a = patch_asymptotics(2, 0.05, o.kappas)
    assert np.allclose(lam, a.eigenvalues, rtol=1e-3)
    assert normal_offset(inv, o.normal) == pytest.approx(a.barycenter_normal, rel=1e-2)


def test_family_is_conditioned_and_reproducible():
    fam = random_graph_family(7)
    assert [m.n for m in fam] == [2, 3] * 5
    for m in fam:
        k = m.kappas
        assert abs(k.sum()) >= 0.5
        assert np.min(np.diff(np.sort(k))) >= 0.25
        assert np.all(np.abs(k) <= 2)
    again = random_graph_family(7)
    assert all(np.array_equal(a.cubic, b.cubic) for a, b in zip(fam, again))
