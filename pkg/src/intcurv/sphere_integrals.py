"""Closed-form integrals of coordinate monomials over spheres, balls and half-balls.

For exponents ``alpha = (a_1, ..., a_n)`` the unit-sphere integral is

    C_alpha = 2 * prod Gamma(b_i) / Gamma(sum b_i),   b_i = (a_i + 1) / 2,

when every ``a_i`` is even and zero otherwise; the ball of radius ``eps`` adds the
radial factor ``eps**(n + |alpha|) / (n + |alpha|)``.  Every ``b_i`` is a
half-integer, so Gamma is evaluated exactly as a rational times a power of
``sqrt(pi)`` and rounded once at the end.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

MAX_DEGREE = 32

__all__ = [
    "MAX_DEGREE",
    "ball_volume",
    "half_ball_first_moment",
    "half_ball_monomial_integral",
    "monomial_ball_integral",
    "monomial_sphere_integral",
    "ratio_to_c2",
    "sphere_area",
    "sphere_integral_exact",
    "unit_ball_volume",
]


@lru_cache(maxsize=None)
def _gamma_half(two_beta: int) -> tuple[Fraction, int]:
    """Gamma(two_beta / 2) as ``(q, k)`` with value ``q * sqrt(pi)**k``."""
    if two_beta <= 0:
        raise ValueError("Gamma argument must be positive")
    if two_beta == 1:
        return Fraction(1), 1
    if two_beta == 2:
        return Fraction(1), 0
    q, k = _gamma_half(two_beta - 2)
    # Gamma(z + 1) = z Gamma(z)
    return q * Fraction(two_beta - 2, 2), k


def _to_float(q: Fraction, k: int) -> float:
    return float(q) * math.pi ** (k // 2) * (math.sqrt(math.pi) if k % 2 else 1.0)


def _check_dim(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {n!r}")
    return int(n)


def _check_exponents(n: int, exps: Sequence[int]) -> tuple[int, ...]:
    exps = tuple(exps)
    if len(exps) != n:
        raise ValueError(f"expected {n} exponents, got {len(exps)}")
    out = []
    for a in exps:
        if isinstance(a, bool) or int(a) != a or a < 0:
            raise ValueError(f"exponents must be non-negative integers, got {exps!r}")
        out.append(int(a))
    if sum(out) > MAX_DEGREE:
        raise ValueError(f"total degree {sum(out)} exceeds the supported cap {MAX_DEGREE}")
    return tuple(out)


def _check_eps(eps) -> float:
    eps = float(eps)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"radius must be positive and finite, got {eps!r}")
    return eps


def _gamma_ratio(two_betas: Sequence[int]) -> tuple[Fraction, int]:
    """``prod Gamma(b_i) / Gamma(sum b_i)`` in exact form."""
    q, k = Fraction(1), 0
    for tb in two_betas:
        qi, ki = _gamma_half(tb)
        q *= qi
        k += ki
    qd, kd = _gamma_half(sum(two_betas))
    return q / qd, k - kd


def sphere_integral_exact(exps: Sequence[int]) -> tuple[Fraction, int]:
    """Exact unit-sphere monomial integral as ``(q, k)``, value ``q * sqrt(pi)**k``."""
    n = _check_dim(len(exps))
    exps = _check_exponents(n, exps)
    if any(a % 2 for a in exps):
        return Fraction(0), 0
    q, k = _gamma_ratio([a + 1 for a in exps])
    return 2 * q, k


def ratio_to_c2(exps: Sequence[int]) -> Fraction:
    """Rational ``C_alpha / C_2`` where ``C_2`` is the sphere integral of ``x_1**2``.

    Since ``C_2 = pi**(n/2) / Gamma(n/2 + 1)`` equals the unit-ball volume, this
    also reads as ``C_alpha / V_n(1)``.
    """
    n = len(exps)
    q, k = sphere_integral_exact(exps)
    if q == 0:
        return Fraction(0)
    q2, k2 = sphere_integral_exact((2,) + (0,) * (n - 1))
    assert k == k2
    return q / q2


def monomial_sphere_integral(n: int, exps: Sequence[int]) -> float:
    """Integral of ``x_1**a_1 ... x_n**a_n`` over the unit sphere S^{n-1}.

    Examples
    --------
    >>> round(monomial_sphere_integral(3, (2, 0, 0)), 12)
    4.18879020479
    """
    n = _check_dim(n)
    exps = _check_exponents(n, exps)
    return _to_float(*sphere_integral_exact(exps))


def monomial_ball_integral(n: int, exps: Sequence[int], eps: float = 1.0) -> float:
    """Integral of a coordinate monomial over the ball of radius ``eps`` in R^n."""
    n = _check_dim(n)
    exps = _check_exponents(n, exps)
    eps = _check_eps(eps)
    p = n + sum(exps)
    q, k = sphere_integral_exact(exps)
    return _to_float(q / p, k) * eps ** p


def half_ball_monomial_integral(n: int, exps: Sequence[int], eps: float = 1.0) -> float:
    """Monomial integral over the half-ball ``{|x| <= eps, x_1 >= 0}``.

    An odd power is allowed only on ``x_1``; odd powers elsewhere give zero.
    """
    n = _check_dim(n)
    exps = _check_exponents(n, exps)
    eps = _check_eps(eps)
    if any(a % 2 for a in exps[1:]):
        return 0.0
    p = n + sum(exps)
    if exps[0] % 2 == 0:
        q, k = sphere_integral_exact(exps)
        return _to_float(q / (2 * p), k) * eps ** p
    q, k = _gamma_ratio([a + 1 for a in exps])
    return _to_float(q / p, k) * eps ** p


def half_ball_first_moment(n: int, eps: float = 1.0) -> float:
    """``D_1``: integral of the coordinate normal to the cut over a half-ball in R^n.

    Equals ``eps**2 * V_{n-1}(eps) / (n + 1)``.
    """
    n = _check_dim(n)
    if n < 2:
        raise ValueError("half-ball first moment needs ambient dimension >= 2")
    return half_ball_monomial_integral(n, (1,) + (0,) * (n - 1), eps)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (equal to ``C_2`` in dimension n)."""
    n = _check_dim(n)
    return _to_float(*_unit_ball_exact(n))


@lru_cache(maxsize=None)
def _unit_ball_exact(n: int) -> tuple[Fraction, int]:
    q, k = sphere_integral_exact((0,) * n)
    return q / n, k


def ball_volume(n: int, eps: float = 1.0) -> float:
    """Volume ``V_n(eps)`` of the n-ball."""
    n = _check_dim(n)
    eps = _check_eps(eps)
    return unit_ball_volume(n) * eps ** n


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^{n-1} bounding the n-ball (``n * V_n(1)``)."""
    n = _check_dim(n)
    return _to_float(*sphere_integral_exact((0,) * n))
