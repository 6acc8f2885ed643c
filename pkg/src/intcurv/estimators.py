"""scikit-learn style transformer computing curvature features of a point cloud."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

try:  # scikit-learn >= 1.6
    from sklearn.utils.validation import validate_data
except ImportError:  # pragma: no cover
    def validate_data(est, X, reset=True, **kw):
        return est._validate_data(X, reset=reset, **kw)

from .descriptors import curvature_from_patch
from .domains import cloud_patch_invariants
from .models import PointCloud

__all__ = ["PatchCurvatureEstimator"]


class PatchCurvatureEstimator(TransformerMixin, BaseEstimator):
    """Per-point curvature of a sampled hypersurface from patch moments.

    ``fit`` stores the reference cloud; ``transform`` returns, for each query
    point, the principal curvatures (descending), ``H`` and the scalar
    curvature read off the neighbours within ``eps``.  Rows are NaN where
    the ball holds too few points, and the curvature columns are NaN where
    ``H`` is numerically zero.

    Parameters
    ----------
    eps : float
        Ball radius.
    area_estimate : float, optional
        Patch area, enabling the area-based route instead of the volume-free one.
    h_tol : float
        ``|H|`` below which per-direction curvatures are not reported.
    min_neighbors : int, optional
        Minimum ball population; defaults to ambient dimension + 1.
    """

    def __init__(self, eps=0.1, area_estimate=None, h_tol=1e-3, min_neighbors=None):
        self.eps = eps
        self.area_estimate = area_estimate
        self.h_tol = h_tol
        self.min_neighbors = min_neighbors

    def fit(self, X, y=None, sample_weight=None):
        X = validate_data(self, X, ensure_min_features=2, ensure_min_samples=3)
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        w = None
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=float).ravel()
            if w.shape != (len(X),) or np.any(w < 0):
                raise ValueError("sample_weight must be one non-negative value per sample")
            # zero weight means the point is absent
            X, w = X[w > 0], w[w > 0]
        self.cloud_ = PointCloud(X, weights=w)
        return self

    def transform(self, X):
        check_is_fitted(self, "cloud_")
        X = validate_data(self, X, reset=False)
        n = self.n_features_in_ - 1
        out = np.full((len(X), n + 2), np.nan)
        for i, q in enumerate(X):
            try:
                inv = cloud_patch_invariants(self.cloud_, q, self.eps, self.area_estimate,
                                             self.min_neighbors)
                est = curvature_from_patch(inv, n, self.eps, h_tol=self.h_tol)
            except (ValueError, ArithmeticError):
                continue
            if est.kappas is not None:
                out[i, :n] = est.kappas
            out[i, n] = est.H
            out[i, n + 1] = est.scalar_curv
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "cloud_")
        n = self.n_features_in_ - 1
        return np.array([f"kappa_{i + 1}" for i in range(n)] + ["H", "scalar_curv"], dtype=object)
