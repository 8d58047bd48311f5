"""Deterministic synthetic multi-view scenes.

Each room is an axis-aligned box seen from the inside, furnished with a few
floor-standing boxes. Cameras sit on a ring around the room center and look
toward it; depth is ray-cast exactly against the boxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import InputError
from .geometry import CameraView
from .io import SceneManifest, write_blob, write_boxes, write_manifest
from .ordering import ObjectBox

ROOM_GAP = 1.0


@dataclass(frozen=True)
class SyntheticScene:
    views: list
    depths: list  # (H_px, W_px) float64 arrays
    rooms: list   # ObjectBox per room (interior)
    furniture: list
    height: int
    width: int
    stride: int


def _look_at(eye, target):
    fwd = np.asarray(target, float) - eye
    fwd /= np.linalg.norm(fwd)
    right = np.cross(fwd, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    return np.column_stack([right, down, fwd])


def _room_exit(origin, dirs, lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dirs > 0, (hi - origin) / dirs, np.where(dirs < 0, (lo - origin) / dirs, np.inf))
    return t.min(axis=-1)


def _box_entry(origin, dirs, lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - origin) / dirs
        t2 = (hi - origin) / dirs
    inside = (origin >= lo) & (origin <= hi)
    tmin = np.where(dirs == 0, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    tmax = np.where(dirs == 0, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    near = tmin.max(axis=-1)
    far = tmax.min(axis=-1)
    hit = (near <= far) & (near > 0)
    return np.where(hit, near, np.inf)


def render_depth(cam: CameraView, hp: int, wp: int, boxes_inside, room: ObjectBox) -> np.ndarray:
    """z-depth for every pixel of ``cam`` (the ray parameter when z = 1)."""
    yy, xx = np.meshgrid(np.arange(hp, dtype=float), np.arange(wp, dtype=float), indexing="ij")
    cam_dirs = np.stack([(xx - cam.cx) / cam.fx, (yy - cam.cy) / cam.fy, np.ones_like(xx)], axis=-1)
    dirs = cam_dirs @ cam.rotation.T
    o = cam.translation
    depth = _room_exit(o, dirs, np.array(room.min_corner), np.array(room.max_corner))
    for box in boxes_inside:
        depth = np.minimum(depth, _box_entry(o, dirs, np.array(box.min_corner), np.array(box.max_corner)))
    return depth


def generate_scene(rooms=1, views=8, seed=0, height=48, width=64, stride=1,
                   boxes_per_room=4, fov_deg=70.0, dropout=0.0) -> SyntheticScene:
    """Build rooms side by side along x and distribute views over them round-robin."""
    if rooms < 1 or views < 1:
        raise InputError("rooms and views must be >= 1")
    if height < 1 or width < 1 or stride < 1:
        raise InputError("grid height, width and stride must be >= 1")
    if not 0.0 <= dropout < 1.0:
        raise InputError("dropout must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    hp, wp = height * stride, width * stride
    fx = (wp / 2.0) / np.tan(np.radians(fov_deg) / 2.0)
    cx, cy = (wp - 1) / 2.0, (hp - 1) / 2.0

    room_boxes, furniture, per_room = [], [], []
    x0 = 0.0
    for r in range(rooms):
        size = rng.uniform([4.0, 3.5, 2.5], [7.0, 6.0, 3.0])
        room = ObjectBox((x0, 0.0, 0.0), (x0 + size[0], size[1], size[2]), f"room{r}")
        inside = []
        for b in range(boxes_per_room):
            ext = rng.uniform([0.4, 0.4, 0.3], [1.5, 1.2, 1.2])
            lo = np.array([x0, 0.0, 0.0]) + rng.uniform([0.2, 0.2, 0.0], [size[0] - ext[0] - 0.2, size[1] - ext[1] - 0.2, 0.0])
            inside.append(ObjectBox(tuple(lo), tuple(lo + ext), f"room{r}_box{b}"))
        room_boxes.append(room)
        furniture.extend(inside)
        per_room.append(inside)
        x0 += size[0] + ROOM_GAP

    cams, depths = [], []
    for k in range(views):
        r = k % rooms
        room = room_boxes[r]
        lo, hi = np.array(room.min_corner), np.array(room.max_corner)
        center = (lo + hi) / 2.0
        in_room = (views - r + rooms - 1) // rooms
        slot = k // rooms
        angle = 2 * np.pi * slot / in_room + rng.uniform(-0.2, 0.2)
        radius = 0.3 * min(hi[0] - lo[0], hi[1] - lo[1])
        eye = center + np.array([radius * np.cos(angle), radius * np.sin(angle), 0.0])
        eye[2] = rng.uniform(1.4, 1.7)
        target = center + rng.uniform([-0.5, -0.5, 0.0], [0.5, 0.5, 0.0])
        target[2] = 0.8
        cam = CameraView(k, fx, fx, cx, cy, _look_at(eye, target), eye)
        d = render_depth(cam, hp, wp, per_room[r], room)
        if dropout > 0:
            d[rng.random(d.shape) < dropout] = 0.0
        cams.append(cam)
        depths.append(d)
    return SyntheticScene(cams, depths, room_boxes, furniture, height, width, stride)


def write_scene(scene: SyntheticScene, out_dir) -> Path:
    """Write depth blobs, a boxes file and ``manifest.json``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for k, d in enumerate(scene.depths):
        name = f"depth_{k:03d}.stk"
        write_blob(out / name, d.reshape(-1, 1))
        names.append(name)
    write_boxes(out / "boxes.json", scene.furniture)
    man = SceneManifest(scene.views, names, scene.height, scene.width, scene.stride, root=str(out))
    path = out / "manifest.json"
    write_manifest(path, man)
    return path
