"""Independent reference computations shared by the test modules."""

import itertools
import math

import numpy as np
from scipy.stats import qmc


def monomials_up_to(n, degree):
    return [a for a in itertools.product(range(degree + 1), repeat=n) if sum(a) <= degree]


def qmc_ball_moments(n, degree, total_samples, replicates, seed=0, chunk=2 ** 16):
    """Scrambled-Sobol estimates of ball monomial integrals with replicate standard errors.

    Every monomial of degree <= ``degree`` is written as a product of two
    monomials of degree <= ``degree // 2 + degree % 2``, so all sums come from one
    Gram matrix per chunk.  Returns ``{exps: (mean, std_error)}``.
    """
    half = [a for a in monomials_up_to(n, (degree + 1) // 2)]
    per_rep = total_samples // replicates
    per_rep = 2 ** int(math.ceil(math.log2(per_rep)))
    chunk = min(chunk, per_rep)
    pairs = {}
    for i, a in enumerate(half):
        for j, b in enumerate(half):
            s = tuple(x + y for x, y in zip(a, b))
            if sum(s) <= degree and s not in pairs:
                pairs[s] = (i, j)
    A = np.array(half)
    estimates = np.empty((replicates, len(pairs)))
    keys = list(pairs)
    idx = np.array([pairs[k] for k in keys])
    for r in range(replicates):
        eng = qmc.Sobol(n, scramble=True, bits=64, seed=np.random.default_rng([seed, r]))
        G = np.zeros((len(half), len(half)))
        for _ in range(per_rep // chunk):
            X = 2.0 * eng.random(chunk) - 1.0
            X = X[np.einsum("ij,ij->i", X, X) <= 1.0]
            powers = np.stack([X ** e for e in range(A.max() + 1)])
            P = powers[A[:, 0], :, 0].T.copy()
            for j in range(1, n):
                P *= powers[A[:, j], :, j].T
            G += P.T @ P
        estimates[r] = G[idx[:, 0], idx[:, 1]] * 2.0 ** n / per_rep
    mean = estimates.mean(axis=0)
    se = estimates.std(axis=0, ddof=1) / math.sqrt(replicates)
    return {k: (mean[i], se[i]) for i, k in enumerate(keys)}


def lens_volume(radius, eps):
    """Volume of the intersection of two balls (radii ``radius`` and ``eps``)
    whose centres are ``radius`` apart, from the classical two-sphere formula."""
    R, r, d = radius, eps, radius
    return math.pi * (R + r - d) ** 2 * (d * d + 2 * d * r - 3 * r * r + 2 * d * R + 6 * r * R
                                         - 3 * R * R) / (12 * d)


def random_rotation(rng, dim):
    Q, R = np.linalg.qr(rng.normal(size=(dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
