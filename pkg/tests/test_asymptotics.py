import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intcurv.asymptotics import (component_asymptotics, curvature_scalars, patch_asymptotics,
                                 shell_asymptotics)
from intcurv.domains import component_invariants
from intcurv.models import SphereModel
from intcurv.sphere_integrals import (ball_volume, half_ball_first_moment,
                                      monomial_ball_integral, unit_ball_volume)
from oracles import lens_volume

PI = math.pi


def test_curvature_scalars():
    assert curvature_scalars([3, 1, -2]) == pytest.approx((2.0, -10.0))
    assert curvature_scalars([0.7]) == (0.7, 0.0)


def test_component_flat_example():
    a = component_asymptotics(2, 1.0, [0, 0])
    assert a.eigenvalues[-1] == pytest.approx(2 * PI / 15 - 3 * PI / 32, rel=1e-13)
    assert a.eigenvalues[-1] == pytest.approx(0.12436, abs=1e-5)


def test_component_sphere_volume_matches_lens():
    a = component_asymptotics(2, 0.2, [1, 1])
    assert a.volume == pytest.approx(0.0154985, abs=1e-7)
    assert a.volume == pytest.approx(lens_volume(1.0, 0.2), rel=1e-12)


def test_component_barycenter_example():
    a = component_asymptotics(2, 0.2, [1, 1])
    assert a.barycenter_normal == pytest.approx(0.080625, rel=1e-13)
    q = component_invariants(SphereModel(1.0), eps=0.2)
    assert a.barycenter_normal == pytest.approx(q.barycenter[2], abs=0.2 ** 3)


def test_patch_examples():
    for eps in (0.05, 0.2, 0.7):
        assert patch_asymptotics(2, eps, [1, 1]).volume == pytest.approx(PI * eps ** 2, rel=1e-14)
    assert patch_asymptotics(2, 0.2, [1, 1]).eigenvalues[-1] == pytest.approx(PI * 0.2 ** 6 / 48, rel=1e-13)
    assert PI * 0.2 ** 6 / 48 == pytest.approx(4.1888e-6, rel=1e-4)
    flat = patch_asymptotics(3, 1.0, [0, 0, 0])
    assert np.allclose(flat.eigenvalues, [4 * PI / 15] * 3 + [0.0], rtol=1e-14, atol=0)


def test_shell_examples():
    eps = 0.2
    assert shell_asymptotics(2, eps, [0, 0]).volume == pytest.approx(2 * PI * eps ** 2, rel=1e-14)
    s = shell_asymptotics(2, eps, [1, 1]).volume
    assert s == pytest.approx(2 * PI * eps ** 2 - PI * eps ** 3, rel=1e-13)
    assert s == pytest.approx(0.226195, abs=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_shell_linearity(n):
    k = np.linspace(-1.5, 2.0, n)
    eps = 0.3
    total = shell_asymptotics(n, eps, k).volume + shell_asymptotics(n, eps, -k).volume
    assert total == pytest.approx((n + 1) * unit_ball_volume(n + 1) * eps ** n, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_shell_is_derivative(n):
    k = np.array([1.4, -0.3, 0.8][:n])
    eps, h = 0.2, 1e-5
    lo, hi = component_asymptotics(n, eps - h, k), component_asymptotics(n, eps + h, k)
    s = shell_asymptotics(n, eps, k)
    assert s.volume == pytest.approx((hi.volume - lo.volume) / (2 * h), rel=1e-8)
    assert s.barycenter_normal == pytest.approx((hi.barycenter_normal - lo.barycenter_normal) / (2 * h), rel=1e-8)
    assert np.allclose(s.eigenvalues, (hi.eigenvalues - lo.eigenvalues) / (2 * h), rtol=1e-7)
    assert s.truncation_orders == {"volume": n + 2, "barycenter": 2, "eigenvalues": n + 4}


@pytest.mark.parametrize("n", range(1, 7))
def test_flat_consistency(n):
    eps = 0.7
    c = component_asymptotics(n, eps, np.zeros(n))
    e2 = (2,) + (0,) * n
    tangent = monomial_ball_integral(n + 1, e2, eps) / 2
    V = ball_volume(n + 1, eps) / 2
    normal = tangent - half_ball_first_moment(n + 1, eps) ** 2 / V
    assert c.volume == pytest.approx(V, rel=1e-13)
    assert np.allclose(c.eigenvalues, [tangent] * n + [normal], rtol=1e-12, atol=0)
    p = patch_asymptotics(n, eps, np.zeros(n))
    disk = monomial_ball_integral(n, (2,) + (0,) * (n - 1), eps)
    assert p.volume == pytest.approx(ball_volume(n, eps), rel=1e-14)
    assert np.allclose(p.eigenvalues, [disk] * n + [0.0], rtol=1e-12, atol=0)
    assert p.barycenter_normal == 0.0


kappa_lists = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.floats(-3, 3), min_size=n, max_size=n))


@settings(max_examples=50)
@given(k=kappa_lists, eps=st.floats(0.01, 0.5), data=st.data())
def test_permutation_symmetry(k, eps, data):
    n = len(k)
    perm = data.draw(st.permutations(range(n)))
    kp = np.array(k)[list(perm)]
    for fn in (component_asymptotics, patch_asymptotics, shell_asymptotics):
        a, b = fn(n, eps, k), fn(n, eps, kp)
        assert b.volume == pytest.approx(a.volume, rel=1e-12, abs=1e-300)
        assert b.barycenter_normal == pytest.approx(a.barycenter_normal, rel=1e-12, abs=1e-300)
        assert np.allclose(b.eigenvalues[:n], a.eigenvalues[:n][list(perm)], rtol=1e-12, atol=1e-300)
        assert b.eigenvalues[n] == pytest.approx(a.eigenvalues[n], rel=1e-12, abs=1e-300)


def test_truncation_orders():
    a = component_asymptotics(3, 0.1, [1, 2, 3])
    assert a.truncation_orders == {"volume": 6, "barycenter": 3, "eigenvalues": 8}
    assert a.truncation_order == 8


@pytest.mark.parametrize("args", [(0, 0.1, []), (2, 0.0, [1, 1]), (2, 0.1, [1]), (2, 0.1, [1, np.nan])])
def test_invalid_inputs(args):
    for fn in (component_asymptotics, patch_asymptotics, shell_asymptotics):
        with pytest.raises(ValueError):
            fn(*args)
