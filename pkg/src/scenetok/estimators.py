"""scikit-learn compatible wrappers around the samplers and the feature pooler.

These let the algorithms sit inside ``sklearn.pipeline.Pipeline`` objects
and be cloned or grid-searched through ``get_params``/``set_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import InputError, check_weight
from .geometry import ViewedPointCloud
from .neighbors import exact_knn
from .sampling import DEFAULT_VOXEL_SIZE, DEFAULT_WEIGHT, fps, fps6d, voxel_average


class _IndexSampler(TransformerMixin, BaseEstimator):
    def _select(self, X):
        raise NotImplementedError

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.indices_ = self._select(X)
        self.n_features_in_ = X.shape[1]
        self.n_samples_fit_ = X.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "indices_")
        X = check_array(X, dtype=None)
        if X.shape[0] != self.n_samples_fit_:
            raise InputError("transform expects the rows the sampler was fitted on")
        return X[self.indices_]


class FarthestPointSampler(_IndexSampler):
    """Select ``n_samples`` rows of X by farthest point sampling.

    Attributes
    ----------
    indices_ : ndarray of shape (n_samples,)
        Selected row indices in selection order.
    """

    def __init__(self, n_samples=4096, start=0):
        self.n_samples = n_samples
        self.start = start

    def _select(self, X):
        return fps(X, self.n_samples, self.start).indices


class ViewAwareSampler(_IndexSampler):
    """FPS6D over rows ``[x, y, z, cam_x, cam_y, cam_z]``.

    X holds each point's position followed by the origin of the camera that
    observed it; ``weight`` trades spatial spread against view spread.
    """

    def __init__(self, n_samples=4096, weight=DEFAULT_WEIGHT, start=0):
        self.n_samples = n_samples
        self.weight = weight
        self.start = start

    def _select(self, X):
        if X.shape[1] != 6:
            raise InputError(f"expected 6 columns (position, camera origin), got {X.shape[1]}")
        check_weight(self.weight)
        cloud = ViewedPointCloud(X[:, :3], np.zeros(len(X), np.int64), X[:, 3:])
        return fps6d(cloud, self.n_samples, self.weight, self.start).indices


class VoxelAverager(TransformerMixin, BaseEstimator):
    """Average rows sharing a voxel; the first three columns are positions.

    ``fit_transform`` returns one row per occupied voxel: the centroid
    followed by the mean of the remaining columns.
    """

    def __init__(self, voxel_size=DEFAULT_VOXEL_SIZE):
        self.voxel_size = voxel_size

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] < 3:
            raise InputError("need at least three position columns")
        feats = X[:, 3:] if X.shape[1] > 3 else None
        res = voxel_average(X[:, :3], feats, self.voxel_size)
        self.counts_ = res.counts
        self.keys_ = res.keys
        self.averaged_ = res.centroids if feats is None else np.hstack([res.centroids, res.features])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        return self.fit(X).averaged_

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).averaged_


class NearestNeighborPooler(TransformerMixin, BaseEstimator):
    """Look up point features at query locations by exact nearest neighbor.

    ``fit(points, features)`` stores the scene; ``transform(queries)``
    returns the feature of the closest scene point (lowest index on ties)
    for every query row, and ``predict`` returns that point's index.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 3:
            raise InputError("scene points must have 3 columns")
        self.points_ = X
        self.features_ = None if y is None else check_array(y, dtype=np.float64, ensure_2d=False)
        if self.features_ is not None and len(self.features_) != len(X):
            raise InputError("one feature row per scene point is required")
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "points_")
        X = check_array(X, dtype=np.float64)
        idx, _ = exact_knn(self.points_, X, 1)
        return idx[:, 0]

    def transform(self, X):
        if getattr(self, "features_", None) is None:
            raise InputError("pooler was fitted without features")
        return self.features_[self.predict(X)]
