"""On-disk formats: STK1 feature blobs, JSON scene manifests and records, score CSVs.

STK1 layout (little endian)::

    b"STK1" | u32 count | u32 dim | count*dim float32, row-major

Text records are JSON documents written with sorted keys and two-space
indentation so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import InputError
from .fusion import FeatureSet
from .geometry import CameraView, PatchGrid, ViewedPointCloud, flatten_grid, unproject_depth
from .metrics import METRICS, ScoreTable
from .ordering import ObjectBox, TokenSequence
from .sampling import SampleSelection

MAGIC = b"STK1"
_HEADER = struct.Struct("<4sII")


# -- STK1 --------------------------------------------------------------------

def write_blob(path, array) -> None:
    arr = np.asarray(array, dtype="<f4")
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"blob payload must be 2D, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, arr.shape[0], arr.shape[1]))
        fh.write(np.ascontiguousarray(arr).tobytes())


def read_blob(path) -> np.ndarray:
    """Return the payload as a (count, dim) float32 array."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise InputError(f"{path}: truncated STK1 header")
    magic, count, dim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InputError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * count * dim
    if len(raw) != expected:
        raise InputError(f"{path}: size {len(raw)} != {expected} for {count}x{dim}")
    return np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(count, dim).astype(np.float32)


# -- JSON helpers ------------------------------------------------------------

def _dump(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def camera_to_dict(cam: CameraView) -> dict:
    return {
        "index": cam.index,
        "intrinsics": {"fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy},
        "rotation": cam.rotation.tolist(),
        "translation": cam.translation.tolist(),
    }


def camera_from_dict(d: dict) -> CameraView:
    try:
        k = d["intrinsics"]
        return CameraView(d["index"], k["fx"], k["fy"], k["cx"], k["cy"], d["rotation"], d["translation"])
    except KeyError as exc:
        raise InputError(f"camera record lacks {exc.args[0]!r}") from None


def box_to_dict(box: ObjectBox) -> dict:
    return {"min": list(box.min_corner), "max": list(box.max_corner), "label": box.label}


def box_from_dict(d: dict) -> ObjectBox:
    try:
        return ObjectBox(d["min"], d["max"], d.get("label"))
    except KeyError as exc:
        raise InputError(f"box record lacks {exc.args[0]!r}") from None


def write_boxes(path, boxes) -> None:
    _dump(path, {"boxes": [box_to_dict(b) for b in boxes]})


def read_boxes(path) -> list[ObjectBox]:
    data = load_json(path)
    items = data["boxes"] if isinstance(data, dict) else data
    return [box_from_dict(b) for b in items]


# -- scene manifest ----------------------------------------------------------

FEATURE_KEYS = ("f_im", "f_pe", "f_3d")


@dataclass(eq=True)
class SceneManifest:
    """Cameras, per-view depth blobs and optional feature blobs of one scene.

    Paths are stored relative to ``root`` (the manifest's directory).
    """

    views: list[CameraView]
    depth: list[str]
    height: int
    width: int
    stride: int = 1
    features: dict[str, str] = field(default_factory=dict)
    scene_points: str | None = None
    boxes: list[ObjectBox] = field(default_factory=list)
    root: str = field(default=".", compare=False)

    def resolve(self, rel: str) -> Path:
        return Path(self.root) / rel

    def to_dict(self) -> dict:
        out = {
            "views": [camera_to_dict(v) for v in self.views],
            "depth": list(self.depth),
            "grid": {"height": self.height, "width": self.width, "stride": self.stride},
            "features": dict(self.features),
            "boxes": [box_to_dict(b) for b in self.boxes],
        }
        if self.scene_points is not None:
            out["scene_points"] = self.scene_points
        return out


def write_manifest(path, manifest: SceneManifest) -> None:
    _dump(path, manifest.to_dict())


def read_manifest(path, check_blobs=True) -> SceneManifest:
    data = load_json(path)
    try:
        grid = data["grid"]
        man = SceneManifest(
            views=[camera_from_dict(v) for v in data["views"]],
            depth=list(data["depth"]),
            height=int(grid["height"]),
            width=int(grid["width"]),
            stride=int(grid.get("stride", 1)),
            features=dict(data.get("features", {})),
            scene_points=data.get("scene_points"),
            boxes=[box_from_dict(b) for b in data.get("boxes", [])],
            root=str(Path(path).parent),
        )
    except KeyError as exc:
        raise InputError(f"{path}: manifest lacks {exc.args[0]!r}") from None
    if len(man.depth) != len(man.views):
        raise InputError(f"{path}: {len(man.depth)} depth maps for {len(man.views)} views")
    unknown = set(man.features) - set(FEATURE_KEYS)
    if unknown:
        raise InputError(f"{path}: unknown feature keys {sorted(unknown)}")
    if check_blobs:
        refs = list(man.depth) + list(man.features.values())
        if man.scene_points:
            refs.append(man.scene_points)
        for rel in refs:
            if not man.resolve(rel).is_file():
                raise InputError(f"{path}: referenced file {rel} does not exist")
    return man


def load_grid(man: SceneManifest) -> PatchGrid:
    hp, wp = man.height * man.stride, man.width * man.stride
    slices = []
    for cam, rel in zip(man.views, man.depth):
        blob = read_blob(man.resolve(rel))
        if blob.shape != (hp * wp, 1):
            raise InputError(f"{rel}: expected {hp * wp}x1 depth values, got {blob.shape}")
        slices.append(unproject_depth(blob.reshape(hp, wp), cam, man.stride, (man.height, man.width)))
    return PatchGrid.stack(slices)


def load_cloud(man: SceneManifest, grid: PatchGrid | None = None) -> ViewedPointCloud:
    return flatten_grid(load_grid(man) if grid is None else grid, man.views)


def load_features(man: SceneManifest) -> dict[str, FeatureSet]:
    """Feature sets named in the manifest, checked against the grid size."""
    shape = (len(man.views), man.height, man.width)
    out = {}
    for key, rel in man.features.items():
        blob = read_blob(man.resolve(rel)).astype(np.float64)
        if key == "f_3d":
            out[key] = FeatureSet(blob, "per_point")
        else:
            if len(blob) != int(np.prod(shape)):
                raise InputError(f"{rel}: {len(blob)} rows for a {shape} patch grid")
            out[key] = FeatureSet(blob, "per_patch", shape)
    return out


def load_scene_points(man: SceneManifest, cloud: ViewedPointCloud) -> np.ndarray:
    """Scene cloud used for point features; defaults to the flattened patches."""
    if man.scene_points is None:
        return np.asarray(cloud.positions)
    pts = read_blob(man.resolve(man.scene_points)).astype(np.float64)
    if pts.shape[1] != 3:
        raise InputError(f"{man.scene_points}: scene points must have dim 3")
    return pts


# -- selections and token sequences -------------------------------------------

def selection_to_dict(sel: SampleSelection, **extra) -> dict:
    out = {"method": sel.method, "indices": sel.indices.tolist(), "start": sel.start, "weight": sel.w}
    out.update(extra)
    return out


def write_selection(path, sel: SampleSelection, **extra) -> None:
    _dump(path, selection_to_dict(sel, **extra))


def read_selection_record(path) -> dict:
    data = load_json(path)
    if "method" not in data:
        raise InputError(f"{path}: not a selection record")
    return data


def read_selection(path) -> SampleSelection:
    data = read_selection_record(path)
    if "indices" not in data:
        raise InputError(f"{path}: selection record has no indices")
    return SampleSelection(data["indices"], data["method"], data.get("weight"), data.get("start", 0))


def tokens_to_dict(seq: TokenSequence, **extra) -> dict:
    out = {
        "permutation": seq.permutation,
        "ids": seq.ids.tolist(),
        "groups": seq.groups.tolist(),
        "source_patch": seq.source_patch.tolist(),
        "positions": seq.positions.tolist(),
    }
    out.update(extra)
    return out


def write_tokens(path, seq: TokenSequence, features_path=None, **extra) -> None:
    if features_path is not None:
        if seq.features is None:
            raise InputError("token sequence carries no features to write")
        write_blob(features_path, seq.features)
        extra["features"] = os.path.relpath(features_path, Path(path).parent)
    _dump(path, tokens_to_dict(seq, **extra))


def read_tokens(path) -> TokenSequence:
    data = load_json(path)
    feats = None
    if data.get("features"):
        feats = read_blob(Path(path).parent / data["features"]).astype(np.float64)
    try:
        return TokenSequence(
            data["ids"], data["positions"], data["source_patch"], feats, data["groups"], data["permutation"]
        )
    except KeyError as exc:
        raise InputError(f"{path}: token record lacks {exc.args[0]!r}") from None


# -- score CSV ---------------------------------------------------------------

def _parse_cell(cell: str):
    cell = cell.strip()
    if cell in ("", "-"):
        return None
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"score cell {cell!r} is not a number") from None


def read_score_rows(path) -> list[ScoreTable]:
    """Every data row of a score CSV; '-' or empty cells are unreported metrics."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    if not rows:
        raise InputError(f"{path}: empty score file")
    header = [h.strip() for h in rows[0]]
    unknown = [h for h in header if h not in METRICS]
    if unknown:
        raise InputError(f"{path}: unknown metric columns {unknown}")
    if len(set(header)) != len(header):
        raise InputError(f"{path}: duplicate metric columns")
    tables = []
    for row in rows[1:]:
        if len(row) != len(header):
            raise InputError(f"{path}: row has {len(row)} cells, header has {len(header)}")
        values = {h: v for h, v in zip(header, map(_parse_cell, row)) if v is not None}
        tables.append(ScoreTable(values))
    if not tables:
        raise InputError(f"{path}: no data row")
    return tables


def read_scores(path) -> ScoreTable:
    tables = read_score_rows(path)
    if len(tables) != 1:
        raise InputError(f"{path}: expected one data row, got {len(tables)}")
    return tables[0]


def write_scores(path, tables) -> None:
    if isinstance(tables, ScoreTable):
        tables = [tables]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(METRICS)
        for t in tables:
            out.writerow([repr(t[m]) if m in t else "-" for m in METRICS])
