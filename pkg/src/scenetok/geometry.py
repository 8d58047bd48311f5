"""Cameras, patch grids and multi-view point clouds.

Conventions
-----------
* World units are meters; all internal arrays are float64.
* A camera frame has x to the right, y down and z along the optical axis.
  ``CameraView.rotation`` maps camera-frame vectors to the world frame and
  ``CameraView.translation`` is the camera origin in world coordinates.
* Pixels are addressed as (x, y) = (column, row). Patch addresses are
  (view, row, col), so a patch grid is laid out V x H x W.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import InputError, as_points, check_weight

__all__ = [
    "CameraView",
    "PatchGrid",
    "ViewedPointCloud",
    "unproject_pixels",
    "project_points",
    "unproject_depth",
    "flatten_grid",
    "lift_6d",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CameraView:
    """Pinhole camera with a rigid camera-to-world pose."""

    index: int
    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=np.float64)
        trans = np.array(self.translation, dtype=np.float64).reshape(-1)
        if rot.shape != (3, 3):
            raise InputError(f"rotation must be 3x3, got {rot.shape}")
        if trans.shape != (3,):
            raise InputError(f"translation must have 3 entries, got {trans.shape}")
        if not (self.fx > 0 and self.fy > 0):
            raise InputError("focal lengths must be positive")
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-6:
            raise InputError("rotation is not orthonormal")
        object.__setattr__(self, "rotation", _frozen(rot))
        object.__setattr__(self, "translation", _frozen(trans))
        object.__setattr__(self, "index", int(self.index))
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def intrinsics(self) -> tuple[float, float, float, float]:
        return (self.fx, self.fy, self.cx, self.cy)

    def __eq__(self, other):
        if not isinstance(other, CameraView):
            return NotImplemented
        return (
            self.index == other.index
            and self.intrinsics == other.intrinsics
            and np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
        )

    __hash__ = None


def unproject_pixels(x, y, depth, camera: CameraView) -> np.ndarray:
    """Map pixel coordinates with z-depth to world points, shape (..., 3)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    cam = np.stack(
        [d * ((x - camera.cx) / camera.fx), d * ((y - camera.cy) / camera.fy), d],
        axis=-1,
    )
    return cam @ camera.rotation.T + camera.translation


def project_points(points, camera: CameraView) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`unproject_pixels`; returns (x, y, depth)."""
    pts = np.asarray(points, dtype=np.float64)
    cam = (pts - camera.translation) @ camera.rotation
    z = cam[..., 2]
    return camera.fx * cam[..., 0] / z + camera.cx, camera.fy * cam[..., 1] / z + camera.cy, z


@dataclass(frozen=True, eq=False)
class PatchGrid:
    """Per-patch world coordinates for V views of H x W patches.

    Invalid patches hold NaN coordinates.
    """

    coords: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        if coords.ndim != 4 or coords.shape[-1] != 3:
            raise InputError(f"coords must be V x H x W x 3, got {coords.shape}")
        if valid.shape != coords.shape[:3]:
            raise InputError("valid mask does not match coords")
        if min(valid.shape) < 1:
            raise InputError("patch grid dimensions must be >= 1")
        if not np.all(np.isfinite(coords[valid])):
            raise InputError("valid patches must have finite coordinates")
        coords[~valid] = np.nan
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def views(self) -> int:
        return self.valid.shape[0]

    @property
    def height(self) -> int:
        return self.valid.shape[1]

    @property
    def width(self) -> int:
        return self.valid.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.valid.shape

    @classmethod
    def stack(cls, grids) -> "PatchGrid":
        grids = list(grids)
        if not grids:
            raise InputError("no grids to stack")
        return cls(
            np.concatenate([g.coords for g in grids]),
            np.concatenate([g.valid for g in grids]),
        )


def unproject_depth(depth, camera: CameraView, patch_stride: int = 1, grid_shape=None) -> PatchGrid:
    """Lift a depth map (meters) to a one-view patch grid.

    Each patch takes the coordinate of the pixel at the center of its
    ``patch_stride`` window (row ``u*s + s//2``, column ``v*s + s//2``).
    Depths that are zero, negative or non-finite mark the patch invalid.

    Parameters
    ----------
    depth : array (H_px, W_px)
    camera : CameraView
    patch_stride : int
        Pixels per patch along each axis.
    grid_shape : (H, W), optional
        Declared patch counts; the depth map must measure exactly
        ``H*stride x W*stride``. Without it the map must divide evenly.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise InputError(f"depth map must be 2D, got shape {depth.shape}")
    s = int(patch_stride)
    if s < 1:
        raise InputError(f"patch_stride must be >= 1, got {patch_stride}")
    if grid_shape is not None:
        h, w = (int(v) for v in grid_shape)
        if depth.shape != (h * s, w * s):
            raise InputError(
                f"depth map {depth.shape} does not match grid {h}x{w} at stride {s}"
            )
    else:
        if depth.shape[0] % s or depth.shape[1] % s:
            raise InputError(f"depth map {depth.shape} is not divisible by stride {s}")
        h, w = depth.shape[0] // s, depth.shape[1] // s
    rows = np.arange(h) * s + s // 2
    cols = np.arange(w) * s + s // 2
    d = depth[np.ix_(rows, cols)]
    valid = np.isfinite(d) & (d > 0)
    yy, xx = np.meshgrid(rows, cols, indexing="ij")
    coords = unproject_pixels(xx, yy, np.where(valid, d, np.nan), camera)
    return PatchGrid(coords[None], valid[None])


@dataclass(frozen=True, eq=False)
class ViewedPointCloud:
    """Points tagged with the view that observed them.

    ``source_patch`` rows are (view, row, col) or (-1, -1, -1) when a point
    did not come from a patch grid. ``n_views`` is the size of the view
    table the ids index into.
    """

    positions: np.ndarray
    view_ids: np.ndarray
    view_origins: np.ndarray
    source_patch: np.ndarray | None = None
    n_views: int | None = None

    def __post_init__(self):
        pos = as_points(self.positions, "positions", dim=3, allow_empty=True).copy()
        n = len(pos)
        ids = np.array(self.view_ids, dtype=np.int64).reshape(-1)
        origins = as_points(self.view_origins, "view_origins", dim=3, allow_empty=True).copy()
        if self.source_patch is None:
            patch = np.full((n, 3), -1, dtype=np.int64)
        else:
            patch = np.array(self.source_patch, dtype=np.int64).reshape(-1, 3)
        if not (len(ids) == len(origins) == len(patch) == n):
            raise InputError("positions, view_ids, view_origins and source_patch differ in length")
        if n and ids.min() < 0:
            raise InputError("view ids must be non-negative")
        n_views = self.n_views
        if n_views is None:
            n_views = int(ids.max()) + 1 if n else 0
        elif n and ids.max() >= n_views:
            raise InputError("view id outside the view table")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "view_ids", _frozen(ids))
        object.__setattr__(self, "view_origins", _frozen(origins))
        object.__setattr__(self, "source_patch", _frozen(patch))
        object.__setattr__(self, "n_views", int(n_views))

    def __len__(self) -> int:
        return len(self.positions)

    @classmethod
    def from_views(cls, positions, view_ids, views, source_patch=None) -> "ViewedPointCloud":
        """Build a cloud, looking up each point's camera origin in ``views``."""
        views = list(views)
        ids = np.asarray(view_ids, dtype=np.int64).reshape(-1)
        table = np.array([v.translation for v in views], dtype=np.float64).reshape(-1, 3)
        if len(ids) and (ids.min() < 0 or ids.max() >= len(table)):
            raise InputError("view id outside the view table")
        return cls(positions, ids, table[ids], source_patch, n_views=len(views))

    def subset(self, indices) -> "ViewedPointCloud":
        idx = np.asarray(indices, dtype=np.int64)
        return ViewedPointCloud(
            self.positions[idx],
            self.view_ids[idx],
            self.view_origins[idx],
            self.source_patch[idx],
            n_views=self.n_views,
        )

    def __eq__(self, other):
        if not isinstance(other, ViewedPointCloud):
            return NotImplemented
        return (
            self.n_views == other.n_views
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.view_ids, other.view_ids)
            and np.array_equal(self.view_origins, other.view_origins)
            and np.array_equal(self.source_patch, other.source_patch)
        )

    __hash__ = None


def flatten_grid(grid: PatchGrid, views) -> ViewedPointCloud:
    """One point per valid patch, in (view, row, col) order."""
    views = list(views)
    if len(views) < grid.views:
        raise InputError(f"view table has {len(views)} entries, grid has {grid.views} views")
    addr = np.argwhere(grid.valid)  # row-major, i.e. k-major then u then v
    positions = grid.coords[grid.valid]
    return ViewedPointCloud.from_views(positions, addr[:, 0], views, source_patch=addr)


def lift_6d(cloud: ViewedPointCloud, w: float = 0.5) -> np.ndarray:
    """Warped joint space ``[sqrt(1-w) * position, sqrt(w) * camera origin]``."""
    w = check_weight(w)
    return np.hstack(
        [np.sqrt(1.0 - w) * cloud.positions, np.sqrt(w) * cloud.view_origins]
    )
