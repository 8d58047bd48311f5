import csv
import io as stdio
import json
import shutil

import numpy as np
import pytest

from scenetok import io
from scenetok.cli import main
from scenetok.data import bundled_path
from scenetok.fusion import FeatureSet, fuse_tokens, nearest_neighbor_map
from scenetok.sampling import fps_oracle

from conftest import brute_nn_distance, brute_views_per_neighborhood


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def scene(tmp_path, capsys):
    code, _, _ = run(capsys, "synth-scene", "--views", 3, "--height", 10, "--width", 12, "--seed", 2,
                     "--output", tmp_path / "scene")
    assert code == 0
    return tmp_path / "scene" / "manifest.json"


def _copy_bundled(tmp_path, name):
    dst = tmp_path / name
    shutil.copytree(bundled_path(name), dst)
    return dst / "manifest.json"


# -- sample ------------------------------------------------------------------

def test_sample_tiny_matches_oracle(tmp_path, capsys):
    man = _copy_bundled(tmp_path, "tiny3")
    code, out, _ = run(capsys, "sample", "--method", "fps3d", "--count", 3, "--start", 0, "--input", man)
    assert code == 0
    cloud = io.load_cloud(io.read_manifest(man))
    record = json.loads(out)
    assert record["indices"] == fps_oracle(cloud.positions, 3, 0).indices.tolist()
    assert record["indices"][0] == 0


def test_weight_zero_equals_fps3d(scene, tmp_path, capsys):
    run(capsys, "sample", "--method", "fps3d", "--count", 50, "--input", scene, "--output", tmp_path / "a.json")
    run(capsys, "sample", "--method", "fps6d", "--weight", 0, "--count", 50, "--input", scene,
        "--output", tmp_path / "b.json")
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert a["indices"] == b["indices"]
    assert (a["method"], b["method"], b["weight"]) == ("fps3d", "fps6d", 0.0)


@pytest.mark.parametrize("extra, flag", [
    (["--count", 0], "--count"),
    (["--count", 10**6], "--count"),
    (["--count", 5, "--start", -1], "--start"),
    (["--count", 5, "--weight", 0.5], "--weight"),
])
def test_sample_input_errors(scene, capsys, extra, flag):
    code, _, err = run(capsys, "sample", "--method", "fps3d", "--input", scene, *extra)
    assert code == 2 and flag in err


def test_bad_weight_and_missing_file(scene, tmp_path, capsys):
    code, _, err = run(capsys, "sample", "--method", "fps6d", "--count", 5, "--weight", 1, "--input", scene)
    assert code == 2 and "--weight" in err
    code, _, _ = run(capsys, "sample", "--method", "fps3d", "--count", 5, "--input", tmp_path / "nope.json")
    assert code == 2
    code, _, _ = run(capsys, "sample", "--method", "nonsense", "--input", scene)
    assert code == 2


def test_voxel_record(scene, tmp_path, capsys):
    code, out, _ = run(capsys, "sample", "--method", "voxel", "--voxel-size", 0.5, "--input", scene)
    assert code == 0
    rec = json.loads(out)
    assert sum(rec["counts"]) == rec["n_points"] == 3 * 10 * 12
    assert len(rec["centroids"]) == len(rec["counts"])


def test_repeat_runs_byte_identical(scene, tmp_path, capsys):
    for name in ("a", "b"):
        run(capsys, "sample", "--method", "fps6d", "--count", 40, "--input", scene, "--output", tmp_path / f"{name}.json")
        run(capsys, "tokens", "--order", "default", "--input", tmp_path / f"{name}.json", "--output", tmp_path / f"{name}_t.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a_t.json").read_bytes() == (tmp_path / "b_t.json").read_bytes()


# -- tokens ------------------------------------------------------------------

def test_six_token_objects(tmp_path, capsys):
    man = _copy_bundled(tmp_path, "six")
    code, out, _ = run(capsys, "tokens", "--order", "objects", "--boxes", man.parent / "boxes.json", "--input", man)
    assert code == 0
    rec = json.loads(out)
    assert rec["ids"] == [0, 1, 3, 4, 2, 5]
    assert rec["groups"] == [-1, -1, -1, -1, 0, 0]


def test_objects_without_boxes_equals_patch(scene, tmp_path, capsys):
    run(capsys, "sample", "--method", "fps3d", "--count", 30, "--input", scene, "--output", tmp_path / "s.json")
    _, objects, _ = run(capsys, "tokens", "--order", "objects", "--input", tmp_path / "s.json")
    _, patch, _ = run(capsys, "tokens", "--order", "patch", "--input", tmp_path / "s.json")
    a, b = json.loads(objects), json.loads(patch)
    assert a["ids"] == b["ids"] and a["source_patch"] == b["source_patch"]


def test_random_seed_determinism(scene, tmp_path, capsys):
    for name in ("a", "b"):
        run(capsys, "tokens", "--order", "random", "--seed", 7, "--input", scene, "--output", tmp_path / f"{name}.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    code, _, err = run(capsys, "tokens", "--order", "random", "--input", scene)
    assert code == 2 and "--seed" in err
    code, _, _ = run(capsys, "tokens", "--order", "patch", "--boxes", "x.json", "--input", scene)
    assert code == 2


def test_default_order_follows_selection(scene, tmp_path, capsys):
    run(capsys, "sample", "--method", "fps3d", "--count", 12, "--input", scene, "--output", tmp_path / "s.json")
    _, out, _ = run(capsys, "tokens", "--order", "default", "--input", tmp_path / "s.json")
    sel = json.loads((tmp_path / "s.json").read_text())["indices"]
    assert json.loads(out)["ids"] == sel


def test_fused_features_out(tmp_path, capsys):
    code, _, _ = run(capsys, "synth-scene", "--views", 2, "--height", 6, "--width", 8, "--feature-dim", 4,
                     "--output", tmp_path / "s")
    assert code == 0
    man_path = tmp_path / "s" / "manifest.json"
    code, _, _ = run(capsys, "tokens", "--order", "patch", "--input", man_path,
                     "--output", tmp_path / "t.json", "--features-out", tmp_path / "f.stk")
    assert code == 0
    seq = io.read_tokens(tmp_path / "t.json")
    # independent recomputation of the fused features
    man = io.read_manifest(man_path)
    grid = io.load_grid(man)
    feats = {k: io.read_blob(man.resolve(v)).astype(np.float64) for k, v in man.features.items()}
    shape = grid.shape
    nn = nearest_neighbor_map(io.read_blob(man.resolve(man.scene_points)).astype(np.float64), grid)
    fused = fuse_tokens(FeatureSet(feats["f_im"], "per_patch", shape), FeatureSet(feats["f_3d"], "per_point"),
                        FeatureSet(feats["f_pe"], "per_patch", shape), nn).as_grid()
    sp = seq.source_patch
    expect = fused[sp[:, 0], sp[:, 1], sp[:, 2]].astype(np.float32)
    assert np.array_equal(seq.features, expect)


def test_features_out_needs_features(scene, tmp_path, capsys):
    code, _, _ = run(capsys, "tokens", "--order", "patch", "--input", scene, "--output", tmp_path / "t.json",
                     "--features-out", tmp_path / "f.stk")
    assert code == 2


# -- stats -------------------------------------------------------------------

def test_stats_matches_brute_force(scene, tmp_path, capsys):
    run(capsys, "sample", "--method", "fps6d", "--count", 120, "--input", scene, "--output", tmp_path / "s.json")
    code, out, _ = run(capsys, "stats", "--k", 8, "--input", tmp_path / "s.json", "--csv", tmp_path / "s.csv")
    assert code == 0
    rec = json.loads(out)
    sel = json.loads((tmp_path / "s.json").read_text())["indices"]
    sub = io.load_cloud(io.read_manifest(scene)).subset(sel)
    assert rec["views_per_neighborhood_mean"] == np.mean(brute_views_per_neighborhood(sub.positions, sub.view_ids, 8))
    assert rec["nn_distance_mean"] == np.mean(brute_nn_distance(sub.positions))
    assert rec["points_per_view_std"] == np.std(np.bincount(sub.view_ids, minlength=3))
    rows = list(csv.DictReader(stdio.StringIO((tmp_path / "s.csv").read_text())))
    assert len(rows) == 1 and float(rows[0]["nn_distance_std"]) == rec["nn_distance_std"]


def test_stats_single_view(tmp_path, capsys):
    run(capsys, "synth-scene", "--views", 1, "--height", 8, "--width", 8, "--output", tmp_path / "s")
    run(capsys, "sample", "--method", "fps3d", "--count", 40, "--input", tmp_path / "s" / "manifest.json",
        "--output", tmp_path / "sel.json")
    _, out, _ = run(capsys, "stats", "--input", tmp_path / "sel.json")
    rec = json.loads(out)
    assert rec["views_per_neighborhood_mean"] == 1.0 and rec["points_per_view_std"] == 0.0


def test_stats_rejects_small_and_voxel(scene, tmp_path, capsys):
    run(capsys, "sample", "--method", "fps3d", "--count", 10, "--input", scene, "--output", tmp_path / "s.json")
    code, _, _ = run(capsys, "stats", "--k", 32, "--input", tmp_path / "s.json")
    assert code == 2
    run(capsys, "sample", "--method", "voxel", "--input", scene, "--output", tmp_path / "v.json")
    code, _, _ = run(capsys, "stats", "--input", tmp_path / "v.json")
    assert code == 2


# -- score -------------------------------------------------------------------

@pytest.mark.parametrize("name, text", [
    ("baseline_released.csv", "100.0"), ("video_best.csv", "101.8"), ("point_best.csv", "101.5"),
])
def test_score_rows(capsys, name, text):
    base = bundled_path("scores", "baseline_released.csv")
    code, out, _ = run(capsys, "score", "--scores", bundled_path("scores", name), "--baseline", base)
    assert code == 0 and out == text + "\n"


def test_score_multi_and_errors(tmp_path, capsys):
    base = bundled_path("scores", "baseline_released.csv")
    code, out, _ = run(capsys, "score", "--scores", base, bundled_path("scores", "video_best.csv"),
                       "--baseline", base, "--task", "3DVG")
    assert code == 0 and "±" in out
    (tmp_path / "z.csv").write_text(base.read_text().replace("58.2", "0"))
    code, _, _ = run(capsys, "score", "--scores", base, "--baseline", tmp_path / "z.csv")
    assert code == 2
    code, _, _ = run(capsys, "score", "--scores", bundled_path("scores", "video_seeds.csv"), "--baseline", base)
    assert code == 2


def test_module_entry_point():
    import subprocess
    import sys

    base = bundled_path("scores", "baseline_released.csv")
    res = subprocess.run([sys.executable, "-m", "scenetok", "score", "--scores", str(base), "--baseline", str(base)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == "100.0\n"
