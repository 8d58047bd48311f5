"""Exact k-nearest-neighbor queries with a deterministic tie rule.

The KD-tree only proposes candidates. Final distances are recomputed with
a fixed per-axis summation order and ranked by (squared distance, index),
so equal distances always resolve to the lowest index.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

_EXTRA = 8
_REL_MARGIN = 1e-9


def squared_distances(queries: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Pairwise squared distances, summed axis by axis in index order."""
    out = np.zeros((len(queries), len(data)))
    for c in range(queries.shape[1]):
        diff = queries[:, c, None] - data[None, :, c]
        out += diff * diff
    return out


def _gather_sq(queries, data, cand):
    out = np.zeros(cand.shape)
    for c in range(queries.shape[1]):
        diff = queries[:, c, None] - data[cand, c]
        out += diff * diff
    return out


def _rank(d2, cand, k):
    order = np.lexsort((cand, d2), axis=-1)[:, :k]
    return (
        np.take_along_axis(cand, order, axis=-1),
        np.take_along_axis(d2, order, axis=-1),
    )


def exact_knn(data, queries, k, exclude_self=False, tree=None):
    """k nearest data points for each query.

    Parameters
    ----------
    data : (N, D) float64 array
    queries : (Q, D) float64 array. With ``exclude_self`` the queries must
        be ``data`` itself and query i never returns index i.
    k : int
    tree : cKDTree over ``data``, optional

    Returns
    -------
    indices : (Q, k) int64, squared_distances : (Q, k) float64
        Each row sorted by (squared distance, index).
    """
    n = len(data)
    need = k + (1 if exclude_self else 0)
    if need > n:
        raise ValueError("not enough points for the requested k")
    q = len(queries)
    if q == 0:
        return np.empty((0, k), np.int64), np.empty((0, k))
    if tree is None:
        tree = cKDTree(data)
    kq = min(n, need + _EXTRA)
    _, cand = tree.query(queries, k=kq)
    cand = np.asarray(cand, dtype=np.int64).reshape(q, kq)
    d2 = _gather_sq(queries, data, cand)
    if exclude_self:
        d2[cand == np.arange(q)[:, None]] = np.inf
    idx, dist = _rank(d2, cand, k)
    if kq == n:
        return idx, dist

    # A row is complete when some candidate lies strictly beyond the k-th
    # distance; otherwise points tied at that radius may be missing.
    finite = np.where(np.isfinite(d2), d2, -np.inf)
    kth = dist[:, -1]
    incomplete = ~(finite.max(axis=1) > kth * (1.0 + _REL_MARGIN) + 1e-300)
    for row in np.flatnonzero(incomplete):
        radius = np.sqrt(kth[row]) * (1.0 + 1e-6) + 1e-12
        ball = np.asarray(sorted(tree.query_ball_point(queries[row], radius)), dtype=np.int64)
        if exclude_self:
            ball = ball[ball != row]
        bd2 = _gather_sq(queries[row : row + 1], data, ball[None, :])
        i, d = _rank(bd2, ball[None, :], k)
        idx[row], dist[row] = i[0], d[0]
    return idx, dist
