import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intcurv.sphere_integrals import (ball_volume, half_ball_first_moment,
                                      half_ball_monomial_integral, monomial_ball_integral,
                                      monomial_sphere_integral, ratio_to_c2, sphere_area,
                                      unit_ball_volume)
from oracles import qmc_ball_moments

PI = math.pi


@pytest.mark.parametrize("n, exps, expected", [
    (2, (2, 0), PI),
    (3, (1, 0, 0), 0.0),
    (3, (2, 0, 0), 4 * PI / 3),
])
def test_sphere_integral_examples(n, exps, expected):
    assert monomial_sphere_integral(n, exps) == pytest.approx(expected, rel=1e-14, abs=0)


@pytest.mark.parametrize("n, exps, eps, expected", [
    (2, (2, 0), 1.0, PI / 4),
    (2, (0, 0), 2.0, 4 * PI),
    (3, (2, 2, 0), 1.0, 4 * PI / 105),
])
def test_ball_integral_examples(n, exps, eps, expected):
    assert monomial_ball_integral(n, exps, eps) == pytest.approx(expected, rel=1e-14)


def test_ball_volume_and_sphere_area_examples():
    assert ball_volume(3, 1) == pytest.approx(4 * PI / 3, rel=1e-15)
    assert sphere_area(2) == pytest.approx(2 * PI, rel=1e-15)
    assert ball_volume(4, 1) == pytest.approx(PI ** 2 / 2, rel=1e-15)


def test_ball_volume_recursion():
    for n in range(3, 15):
        assert unit_ball_volume(n) == pytest.approx(unit_ball_volume(n - 2) * 2 * PI / n, rel=1e-14)


@pytest.mark.parametrize("n, eps, expected", [(3, 1.0, PI / 4), (2, 1.0, 2 / 3), (3, 2.0, 4 * PI)])
def test_half_ball_first_moment_examples(n, eps, expected):
    assert half_ball_first_moment(n, eps) == pytest.approx(expected, rel=1e-14)


def test_half_ball_first_moment_relation():
    for n in range(1, 9):
        eps = 0.7
        assert half_ball_first_moment(n + 1, eps) == pytest.approx(
            eps ** 2 * ball_volume(n, eps) / (n + 2), rel=1e-14)


def test_half_ball_even_moments_are_half():
    assert half_ball_monomial_integral(3, (2, 0, 0)) == pytest.approx(
        monomial_ball_integral(3, (2, 0, 0)) / 2, rel=1e-15)


@pytest.mark.parametrize("bad", [
    lambda: monomial_sphere_integral(0, ()),
    lambda: monomial_sphere_integral(2, (2,)),
    lambda: monomial_sphere_integral(2, (-1, 0)),
    lambda: monomial_ball_integral(2, (2, 0), 0.0),
    lambda: monomial_ball_integral(2, (2, 0), -1.0),
    lambda: ball_volume(0, 1.0),
    lambda: half_ball_first_moment(1, 1.0),
    lambda: half_ball_first_moment(3, 0.0),
])
def test_invalid_inputs(bad):
    with pytest.raises(ValueError):
        bad()


def _c(n, *lead):
    return ratio_to_c2(tuple(lead) + (0,) * (n - len(lead)))


@pytest.mark.parametrize("n", range(1, 11))
def test_ratio_identities_exact(n):
    assert _c(n, 2) == 1
    if n >= 2:
        assert _c(n, 4) == 3 * _c(n, 2, 2)
        assert _c(n, 2, 2) == Fraction(1, n + 2)
    if n >= 3:
        assert _c(n, 2, 4) == 3 * _c(n, 2, 2, 2)
        assert _c(n, 6) == 15 * _c(n, 2, 2, 2)
        assert _c(n, 2, 2, 2) == Fraction(1, (n + 2) * (n + 4))


exps_strategy = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.integers(0, 6), min_size=n, max_size=n))


@given(exps=exps_strategy, eps=st.floats(0.1, 3.0), lam=st.floats(0.2, 5.0))
def test_scaling_law(exps, eps, lam):
    n = len(exps)
    a = monomial_ball_integral(n, exps, lam * eps)
    b = lam ** (n + sum(exps)) * monomial_ball_integral(n, exps, eps)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@given(exps=exps_strategy, data=st.data())
def test_permutation_symmetry(exps, data):
    perm = data.draw(st.permutations(exps))
    assert monomial_sphere_integral(len(exps), perm) == monomial_sphere_integral(len(exps), exps)


@given(exps=exps_strategy)
def test_odd_exponents_vanish_and_even_are_positive(exps):
    n = len(exps)
    v, b = monomial_sphere_integral(n, exps), monomial_ball_integral(n, exps, 1.3)
    if any(a % 2 for a in exps):
        assert v == 0.0 and b == 0.0
    else:
        assert v > 0 and b > 0


def test_matches_quasi_monte_carlo_small():
    est = qmc_ball_moments(3, 4, 2 ** 18, 16, seed=1)
    for exps, (mean, se) in est.items():
        assert abs(mean - monomial_ball_integral(3, exps)) <= 4 * se
