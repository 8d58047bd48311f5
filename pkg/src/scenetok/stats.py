"""View-diversity and spatial-regularity statistics of a sampled cloud."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ._validation import InputError
from .geometry import ViewedPointCloud
from .neighbors import exact_knn

__all__ = [
    "SamplingStats",
    "points_per_view_std",
    "views_per_neighborhood",
    "nn_distance",
    "sampling_stats",
    "DEFAULT_K",
]

DEFAULT_K = 32


@dataclass(frozen=True)
class SamplingStats:
    points_per_view_std: float
    views_per_neighborhood_mean: float
    nn_distance_mean: float
    nn_distance_std: float
    k: int
    n_points: int

    def as_dict(self) -> dict:
        return asdict(self)


def points_per_view_std(cloud: ViewedPointCloud, n_views: int | None = None) -> float:
    """Population std of per-view point counts; views with no points count as 0."""
    if len(cloud) == 0:
        raise InputError("empty cloud")
    n_views = cloud.n_views if n_views is None else int(n_views)
    counts = np.bincount(cloud.view_ids, minlength=n_views)
    if len(counts) > n_views:
        raise InputError("view id outside the view table")
    return float(np.std(counts))


def views_per_neighborhood(cloud: ViewedPointCloud, k: int = DEFAULT_K):
    """Distinct views among each point's k nearest neighbors (3D, self excluded).

    Returns
    -------
    counts : (N,) int array
    mean : float
    """
    k = int(k)
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if len(cloud) <= k:
        raise InputError(f"need more than k={k} points, got {len(cloud)}")
    idx, _ = exact_knn(cloud.positions, cloud.positions, k, exclude_self=True)
    views = np.sort(cloud.view_ids[idx], axis=1)
    counts = 1 + np.count_nonzero(np.diff(views, axis=1), axis=1)
    return counts, float(np.mean(counts))


def nn_distance(cloud: ViewedPointCloud):
    """Distance from each point to its closest other point.

    Returns
    -------
    distances : (N,) array
    mean, std : float (population std)
    """
    if len(cloud) < 2:
        raise InputError("need at least 2 points")
    _, d2 = exact_knn(cloud.positions, cloud.positions, 1, exclude_self=True)
    dist = np.sqrt(d2[:, 0])
    return dist, float(np.mean(dist)), float(np.std(dist))


def sampling_stats(cloud: ViewedPointCloud, k: int = DEFAULT_K) -> SamplingStats:
    _, vpn = views_per_neighborhood(cloud, k)
    _, mean, std = nn_distance(cloud)
    return SamplingStats(points_per_view_std(cloud), vpn, mean, std, int(k), len(cloud))
