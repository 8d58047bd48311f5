"""Nearest-neighbor pooling of point features onto patches, and token fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import InputError, as_points
from .geometry import PatchGrid, ViewedPointCloud
from .neighbors import exact_knn

__all__ = ["FeatureSet", "NearestIndexMap", "nearest_neighbor_map", "fuse_tokens"]

PER_POINT = "per_point"
PER_PATCH = "per_patch"


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Opaque D-dimensional vectors attached to points or to patches.

    Per-patch sets keep their vectors flattened in (view, row, col) order
    together with ``grid_shape`` = (V, H, W).
    """

    vectors: np.ndarray
    anchor: str = PER_POINT
    grid_shape: tuple[int, int, int] | None = None

    def __post_init__(self):
        vec = np.array(self.vectors, dtype=np.float64)
        if self.anchor not in (PER_POINT, PER_PATCH):
            raise InputError(f"unknown anchor {self.anchor!r}")
        shape = self.grid_shape
        if self.anchor == PER_PATCH:
            if vec.ndim == 4:
                shape = shape or vec.shape[:3]
                vec = vec.reshape(-1, vec.shape[-1])
            if shape is None:
                raise InputError("per-patch features need a grid shape")
            shape = tuple(int(s) for s in shape)
            if vec.ndim != 2 or len(vec) != int(np.prod(shape)):
                raise InputError(f"per-patch features do not match grid {shape}")
        elif vec.ndim != 2:
            raise InputError(f"per-point features must be 2D, got shape {vec.shape}")
        vec.setflags(write=False)
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "grid_shape", shape)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vectors)

    def as_grid(self) -> np.ndarray:
        if self.anchor != PER_PATCH:
            raise InputError("only per-patch features have a grid layout")
        return self.vectors.reshape(*self.grid_shape, self.dim)


@dataclass(frozen=True, eq=False)
class NearestIndexMap:
    """Scene point index per patch; -1 where the patch is invalid."""

    indices: np.ndarray
    valid: np.ndarray


def nearest_neighbor_map(scene, grid: PatchGrid) -> NearestIndexMap:
    """Index of the closest scene point for every valid patch coordinate.

    ``scene`` is a :class:`ViewedPointCloud` or an (N, 3) array. Equal
    distances resolve to the lowest index.
    """
    positions = scene.positions if isinstance(scene, ViewedPointCloud) else scene
    positions = as_points(positions, "scene", dim=3, allow_empty=True)
    if len(positions) == 0:
        raise InputError("scene point cloud is empty")
    indices = np.full(grid.shape, -1, dtype=np.int64)
    idx, _ = exact_knn(positions, grid.coords[grid.valid], 1)
    indices[grid.valid] = idx[:, 0]
    return NearestIndexMap(indices, grid.valid.copy())


def fuse_tokens(f_im: FeatureSet, f_3d: FeatureSet, f_pe: FeatureSet, nn: NearestIndexMap) -> FeatureSet:
    """Per-patch sum of image feature, pooled point feature and position encoding.

    Invalid patches receive zero vectors.
    """
    if f_im.anchor != PER_PATCH or f_pe.anchor != PER_PATCH:
        raise InputError("f_im and f_pe must be per-patch feature sets")
    if f_3d.anchor != PER_POINT:
        raise InputError("f_3d must be a per-point feature set")
    if not (f_im.dim == f_3d.dim == f_pe.dim):
        raise InputError(f"feature dimensions differ: {f_im.dim}, {f_3d.dim}, {f_pe.dim}")
    shape = tuple(nn.indices.shape)
    if f_im.grid_shape != shape or f_pe.grid_shape != shape:
        raise InputError(f"patch features {f_im.grid_shape}/{f_pe.grid_shape} do not match map {shape}")
    valid = nn.valid.reshape(-1)
    idx = nn.indices.reshape(-1)[valid]
    if len(idx) and (idx.min() < 0 or idx.max() >= len(f_3d)):
        raise InputError("nearest-neighbor index outside the point feature set")
    out = np.zeros_like(f_im.vectors)
    out[valid] = f_im.vectors[valid] + f_3d.vectors[idx] + f_pe.vectors[valid]
    return FeatureSet(out, PER_PATCH, shape)
