"""Command-line entry point: ``scenetok {sample,tokens,stats,score,synth-scene}``.

Exit codes: 0 success, 1 internal failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from ._validation import InputError
from .fusion import fuse_tokens, nearest_neighbor_map
from .metrics import format_score, multi_seed_summary, normalized_score
from .ordering import build_tokens, order_default, order_objects, order_patch, order_random
from .sampling import DEFAULT_VOXEL_SIZE, DEFAULT_WEIGHT, fps, fps6d, voxel_average
from .stats import DEFAULT_K, sampling_stats
from .synth import generate_scene, write_scene


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _rel(target, base_file) -> str:
    return Path(os.path.relpath(Path(target).resolve(), Path(base_file).resolve().parent)).as_posix()


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- sample -------------------------------------------------------------------

def cmd_sample(args):
    if args.weight is not None and args.method != "fps6d":
        raise InputError("--weight only applies to --method fps6d")
    if args.voxel_size is not None and args.method != "voxel":
        raise InputError("--voxel-size only applies to --method voxel")
    man = io.read_manifest(args.input)
    cloud = io.load_cloud(man)
    if len(cloud) == 0:
        raise InputError(f"{args.input}: scene has no valid patches")
    scene_ref = _rel(args.input, args.output) if args.output else str(args.input)

    if args.method == "voxel":
        size = DEFAULT_VOXEL_SIZE if args.voxel_size is None else args.voxel_size
        if not size > 0:
            raise InputError(f"--voxel-size must be positive, got {size}")
        res = voxel_average(cloud, None, size)
        record = {
            "method": "voxel",
            "voxel_size": size,
            "scene": scene_ref,
            "n_points": len(cloud),
            "centroids": res.centroids.tolist(),
            "counts": res.counts.tolist(),
        }
        _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", args.output)
        return 0

    if args.count is None:
        raise InputError("--count is required for FPS methods")
    if args.count < 1:
        raise InputError(f"--count must be >= 1, got {args.count}")
    if args.count > len(cloud):
        raise InputError(f"--count {args.count} exceeds the {len(cloud)} scene points")
    if not 0 <= args.start < len(cloud):
        raise InputError(f"--start {args.start} outside [0, {len(cloud)})")
    if args.method == "fps6d":
        w = DEFAULT_WEIGHT if args.weight is None else args.weight
        if not 0 <= w < 1:
            raise InputError(f"--weight must lie in [0, 1), got {w}")
        sel = fps6d(cloud, args.count, w, args.start)
    else:
        sel = fps(cloud.positions, args.count, args.start)
    record = io.selection_to_dict(sel, scene=scene_ref, count=args.count, n_points=len(cloud))
    _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", args.output)
    return 0


# -- tokens -------------------------------------------------------------------

def _scene_from_input(path):
    """(manifest, cloud, selection indices or None) for a manifest or selection file."""
    data = io.load_json(path)
    if "views" in data:
        man = io.read_manifest(path)
        return man, io.load_cloud(man), None
    if "scene" not in data:
        raise InputError(f"{path}: neither a manifest nor a selection record")
    if "indices" not in data:
        raise InputError(f"{path}: selection record has no point indices")
    man = io.read_manifest(Path(path).parent / data["scene"])
    cloud = io.load_cloud(man)
    sel = np.asarray(data["indices"], dtype=np.int64)
    if len(sel) and (sel.min() < 0 or sel.max() >= len(cloud)):
        raise InputError(f"{path}: selection indices outside the scene")
    return man, cloud, sel


def _fused_features(man, cloud):
    feats = io.load_features(man)
    if not all(k in feats for k in io.FEATURE_KEYS):
        return None
    grid = io.load_grid(man)
    scene_pts = io.load_scene_points(man, cloud)
    if len(scene_pts) != len(feats["f_3d"]):
        raise InputError("f_3d rows do not match the scene points")
    nn = nearest_neighbor_map(scene_pts, grid)
    return fuse_tokens(feats["f_im"], feats["f_3d"], feats["f_pe"], nn)


def cmd_tokens(args):
    if args.order == "random" and args.seed is None:
        raise InputError("--seed is required with --order random")
    if args.order != "random" and args.seed is not None:
        raise InputError("--seed only applies to --order random")
    if args.boxes is not None and args.order != "objects":
        raise InputError("--boxes only applies to --order objects")
    man, cloud, sel = _scene_from_input(args.input)
    fused = _fused_features(man, cloud)
    if args.features_out and fused is None:
        raise InputError("--features-out needs f_im, f_pe and f_3d in the manifest")
    ids = np.arange(len(cloud)) if sel is None else np.sort(sel)
    tokens = build_tokens(cloud, ids, fused)
    if args.order == "patch":
        seq = order_patch(tokens)
    elif args.order == "random":
        seq = order_random(tokens, args.seed)
    elif args.order == "default":
        seq = order_default(tokens, ids if sel is None else sel)
    else:
        boxes = io.read_boxes(args.boxes) if args.boxes else []
        seq = order_objects(tokens, boxes)
    extra = {"seed": args.seed}
    if args.output:
        io.write_tokens(args.output, seq, args.features_out, **extra)
    else:
        sys.stdout.write(json.dumps(io.tokens_to_dict(seq, **extra), indent=2, sort_keys=True) + "\n")
    return 0


# -- stats --------------------------------------------------------------------

def cmd_stats(args):
    data = io.read_selection_record(args.input)
    if data.get("method") == "voxel":
        raise InputError("voxel selections carry no per-view provenance")
    _, cloud, sel = _scene_from_input(args.input)
    stats = sampling_stats(cloud.subset(sel), args.k)
    d = stats.as_dict()
    _emit(json.dumps(d, indent=2, sort_keys=True) + "\n", args.output)
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(d))
    writer.writerow([repr(v) for v in d.values()])
    if args.csv:
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
    elif args.output:
        sys.stdout.write(buf.getvalue())
    return 0


# -- score --------------------------------------------------------------------

def cmd_score(args):
    baseline = io.read_scores(args.baseline)
    runs = [io.read_scores(p) for p in args.scores]
    if len(runs) == 1:
        print(format_score(normalized_score(runs[0], baseline, args.task)))
    else:
        mean, std = multi_seed_summary(runs, baseline, args.task)
        print(f"{format_score(mean)} ±{format_score(std)}")
    return 0


# -- synth-scene --------------------------------------------------------------

def cmd_synth(args):
    scene = generate_scene(
        args.rooms, args.views, args.seed, args.height, args.width, args.stride,
        args.boxes_per_room, dropout=args.dropout,
    )
    path = write_scene(scene, args.output)
    if args.feature_dim > 0:
        from .geometry import PatchGrid, flatten_grid, unproject_depth

        out = Path(args.output)
        grid = PatchGrid.stack(
            unproject_depth(d.astype(np.float32), c, scene.stride) for d, c in zip(scene.depths, scene.views)
        )
        pts = flatten_grid(grid, scene.views).positions
        rng = np.random.default_rng([args.seed, 1])
        n_patch = len(scene.views) * scene.height * scene.width
        io.write_blob(out / "f_im.stk", rng.standard_normal((n_patch, args.feature_dim)))
        io.write_blob(out / "f_pe.stk", rng.standard_normal((n_patch, args.feature_dim)))
        io.write_blob(out / "scene_points.stk", pts)
        io.write_blob(out / "f_3d.stk", rng.standard_normal((len(pts), args.feature_dim)))
        man = io.read_manifest(path, check_blobs=False)
        man.features = {"f_im": "f_im.stk", "f_pe": "f_pe.stk", "f_3d": "f_3d.stk"}
        man.scene_points = "scene_points.stk"
        io.write_manifest(path, man)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scenetok", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="subsample a scene's patch points")
    s.add_argument("--method", choices=["fps3d", "fps6d", "voxel"], required=True)
    s.add_argument("--count", type=int)
    s.add_argument("--weight", type=float)
    s.add_argument("--voxel-size", type=float)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--input", required=True, help="scene manifest")
    s.add_argument("--output", help="selection record (stdout if omitted)")
    s.set_defaults(func=cmd_sample)

    t = sub.add_parser("tokens", help="build and order a token sequence")
    t.add_argument("--order", choices=["patch", "random", "default", "objects"], required=True)
    t.add_argument("--seed", type=int)
    t.add_argument("--boxes")
    t.add_argument("--input", required=True, help="selection record or scene manifest")
    t.add_argument("--output")
    t.add_argument("--features-out", help="STK1 file for fused token features")
    t.set_defaults(func=cmd_tokens)

    st = sub.add_parser("stats", help="view-diversity statistics of a selection")
    st.add_argument("--k", type=int, default=DEFAULT_K)
    st.add_argument("--input", required=True)
    st.add_argument("--output")
    st.add_argument("--csv")
    st.set_defaults(func=cmd_stats)

    sc = sub.add_parser("score", help="normalized score against a baseline")
    sc.add_argument("--scores", required=True, nargs="+")
    sc.add_argument("--baseline", required=True)
    sc.add_argument("--task", default="all", type=str.lower, choices=["all", "3dvg", "3dcap", "3dqa"])
    sc.set_defaults(func=cmd_score)

    g = sub.add_parser("synth-scene", help="generate a synthetic multi-view scene")
    g.add_argument("--rooms", type=int, default=1)
    g.add_argument("--views", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--height", type=int, default=48)
    g.add_argument("--width", type=int, default=64)
    g.add_argument("--stride", type=int, default=1)
    g.add_argument("--boxes-per-room", type=int, default=4)
    g.add_argument("--dropout", type=float, default=0.0)
    g.add_argument("--feature-dim", type=int, default=0)
    g.add_argument("--output", required=True, help="output directory")
    g.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"scenetok: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except Exception as exc:  # noqa: BLE001
        print(f"scenetok: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
