"""Farthest point sampling (plain and view-aware) and voxel-grid averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._validation import InputError, as_points, check_count, check_start, check_weight
from .fusion import FeatureSet
from .geometry import ViewedPointCloud, lift_6d

__all__ = [
    "SampleSelection",
    "VoxelResult",
    "fps",
    "fps_oracle",
    "fps6d",
    "voxel_average",
    "DEFAULT_WEIGHT",
    "DEFAULT_VOXEL_SIZE",
]

DEFAULT_WEIGHT = 0.5
DEFAULT_VOXEL_SIZE = 0.2
ORACLE_MAX_POINTS = 2000


@dataclass(frozen=True, eq=False)
class SampleSelection:
    indices: np.ndarray
    method: str
    w: float | None = None
    start: int = 0

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64).reshape(-1)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        if not isinstance(other, SampleSelection):
            return NotImplemented
        return (
            self.method == other.method
            and self.w == other.w
            and self.start == other.start
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class VoxelResult:
    centroids: np.ndarray
    features: np.ndarray | None
    counts: np.ndarray
    keys: np.ndarray
    voxel_size: float


_LEAF_SIZE = 128


def _spatial_blocks(points, leaf_size=_LEAF_SIZE):
    """Group point indices into compact blocks by recursive median splits."""
    order = np.arange(len(points))
    bounds = []
    stack = [(0, len(points))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo <= leaf_size:
            bounds.append((lo, hi))
            continue
        seg = order[lo:hi]
        pts = points[seg]
        axis = int(np.argmax(pts.max(axis=0) - pts.min(axis=0)))
        mid = (hi - lo) // 2
        part = np.argpartition(pts[:, axis], mid, kind="introselect")
        order[lo:hi] = seg[part]
        stack.append((lo + mid, hi))
        stack.append((lo, lo + mid))
    bounds.sort()
    starts = np.array([b[0] for b in bounds] + [len(points)], dtype=np.int64)
    return order, starts


@njit(cache=True)
def _fps_blocked(points, order, starts, m, start):
    n, d = points.shape
    nb = len(starts) - 1
    pts = np.empty((n, d))
    for i in range(n):
        for c in range(d):
            pts[i, c] = points[order[i], c]
    lo_box = np.empty((nb, d))
    hi_box = np.empty((nb, d))
    for b in range(nb):
        for c in range(d):
            lo_box[b, c] = pts[starts[b], c]
            hi_box[b, c] = pts[starts[b], c]
        for i in range(starts[b] + 1, starts[b + 1]):
            for c in range(d):
                v = pts[i, c]
                if v < lo_box[b, c]:
                    lo_box[b, c] = v
                if v > hi_box[b, c]:
                    hi_box[b, c] = v

    mind = np.full(n, np.inf)
    block_max = np.full(nb, np.inf)
    block_arg = np.empty(nb, np.int64)  # original index of the block's best point
    out = np.empty(m, np.int64)
    pos = np.empty(n, np.int64)
    for i in range(n):
        pos[order[i]] = i
    cur = start
    s = np.empty(d)
    for j in range(m):
        out[j] = cur
        if j == m - 1:
            break
        p = pos[cur]
        mind[p] = -1.0
        for c in range(d):
            s[c] = pts[p, c]
        for b in range(nb):
            # lower bound of the squared distance from s to any point in b;
            # rounding is monotone, so lb <= every per-point value computed below
            lb = 0.0
            for c in range(d):
                if s[c] < lo_box[b, c]:
                    g = lo_box[b, c] - s[c]
                elif s[c] > hi_box[b, c]:
                    g = s[c] - hi_box[b, c]
                else:
                    g = 0.0
                lb += g * g
            if lb >= block_max[b] and not (p >= starts[b] and p < starts[b + 1]):
                continue
            bmax = -2.0
            barg = -1
            for i in range(starts[b], starts[b + 1]):
                if mind[i] >= 0.0:
                    acc = 0.0
                    for c in range(d):
                        diff = pts[i, c] - s[c]
                        acc += diff * diff
                    if acc < mind[i]:
                        mind[i] = acc
                v = mind[i]
                oi = order[i]
                if v > bmax or (v == bmax and oi < barg):
                    bmax = v
                    barg = oi
            block_max[b] = bmax
            block_arg[b] = barg
        best = -2.0
        best_i = -1
        for b in range(nb):
            v = block_max[b]
            if v > best or (v == best and block_arg[b] < best_i):
                best = v
                best_i = block_arg[b]
        cur = best_i
    return out


def _check_fps_args(points, m, start):
    pts = as_points(points)
    return pts, check_count(m, len(pts)), check_start(start, len(pts))


def fps(points, m, start=0, method="fps3d") -> SampleSelection:
    """Greedy farthest point sampling.

    Keeps a running minimum squared distance per point and picks the
    unselected point with the largest one; ties go to the lowest index.

    Parameters
    ----------
    points : (N, D) array-like
    m : int
        Number of points to select, 1 <= m <= N.
    start : int
        Index of the first selected point.
    """
    pts, m, start = _check_fps_args(points, m, start)
    order, starts = _spatial_blocks(pts)
    return SampleSelection(_fps_blocked(pts, order, starts, m, start), method, None, start)


def fps_oracle(points, m, start=0) -> SampleSelection:
    """Reference FPS that recomputes every min-distance from scratch each step.

    Quadratic in the number of selected points; meant for checking
    :func:`fps` on small inputs only.
    """
    pts, m, start = _check_fps_args(points, m, start)
    n, d = pts.shape
    if n > ORACLE_MAX_POINTS:
        raise InputError(f"oracle limited to {ORACLE_MAX_POINTS} points, got {n}")
    chosen = [start]
    for _ in range(1, m):
        sel = pts[chosen]
        d2 = np.zeros((n, len(chosen)))
        for c in range(d):
            diff = pts[:, c, None] - sel[None, :, c]
            d2 = d2 + diff * diff
        mind = d2.min(axis=1)
        mind[chosen] = -np.inf
        chosen.append(int(np.argmax(mind)))
    return SampleSelection(chosen, "fps3d", None, start)


def fps6d(cloud: ViewedPointCloud, m, w=DEFAULT_WEIGHT, start=0) -> SampleSelection:
    """FPS in the joint space of point position and observing camera origin."""
    w = check_weight(w)
    sel = fps(lift_6d(cloud, w), m, start, method="fps6d")
    return SampleSelection(sel.indices, "fps6d", w, sel.start)


def voxel_average(cloud, features=None, voxel_size=DEFAULT_VOXEL_SIZE) -> VoxelResult:
    """Merge points sharing a voxel into their centroid and mean feature.

    Voxels are cells ``floor(position / voxel_size)``; output rows follow
    the voxel keys in lexicographic (z, y, x) order.
    """
    positions = cloud.positions if isinstance(cloud, ViewedPointCloud) else cloud
    positions = as_points(positions, "positions", dim=3)
    size = float(voxel_size)
    if not size > 0:
        raise InputError(f"voxel size must be positive, got {voxel_size}")
    if features is not None:
        feats = features.vectors if isinstance(features, FeatureSet) else as_points(features, "features")
        if len(feats) != len(positions):
            raise InputError(f"{len(feats)} feature vectors for {len(positions)} points")
    keys = np.floor(positions / size).astype(np.int64)
    zyx, inverse, counts = np.unique(
        keys[:, ::-1], axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    nv = len(zyx)

    def _mean(values):
        out = np.empty((nv, values.shape[1]))
        for c in range(values.shape[1]):
            out[:, c] = np.bincount(inverse, weights=values[:, c], minlength=nv)
        return out / counts[:, None]

    centroids = _mean(positions)
    mean_feats = _mean(np.asarray(feats, dtype=np.float64)) if features is not None else None
    return VoxelResult(centroids, mean_feats, counts.astype(np.int64), zyx[:, ::-1].copy(), size)
