import struct

import numpy as np
import pytest

from scenetok import InputError, io
from scenetok.geometry import CameraView
from scenetok.metrics import ScoreTable
from scenetok.ordering import ObjectBox, TokenSequence
from scenetok.sampling import SampleSelection


def test_blob_round_trip(tmp_path, rng):
    arr = rng.normal(size=(17, 5)).astype(np.float32)
    io.write_blob(tmp_path / "a.stk", arr)
    back = io.read_blob(tmp_path / "a.stk")
    assert back.dtype == np.float32 and np.array_equal(back, arr)
    raw = (tmp_path / "a.stk").read_bytes()
    assert raw[:4] == b"STK1" and struct.unpack("<II", raw[4:12]) == (17, 5)
    assert len(raw) == 12 + 4 * 17 * 5


def test_blob_empty_and_vector(tmp_path):
    io.write_blob(tmp_path / "e.stk", np.zeros((0, 3)))
    assert io.read_blob(tmp_path / "e.stk").shape == (0, 3)
    io.write_blob(tmp_path / "v.stk", [1.0, 2.0])
    assert io.read_blob(tmp_path / "v.stk").shape == (2, 1)


def test_blob_rejects_bad_files(tmp_path):
    p = tmp_path / "x.stk"
    io.write_blob(p, np.ones((2, 2)))
    raw = p.read_bytes()
    p.write_bytes(raw[:-1])
    with pytest.raises(InputError):
        io.read_blob(p)
    p.write_bytes(raw + b"\0\0\0\0")
    with pytest.raises(InputError):
        io.read_blob(p)
    p.write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(InputError):
        io.read_blob(p)
    p.write_bytes(b"STK")
    with pytest.raises(InputError):
        io.read_blob(p)


def _manifest(tmp_path):
    views = [
        CameraView(0, 2.0, 2.0, 1.0, 1.0),
        CameraView(1, 3.0, 3.0, 0.5, 0.5, np.diag([1.0, -1.0, -1.0]), [1.0, 2.0, 3.0]),
    ]
    for i in range(2):
        io.write_blob(tmp_path / f"d{i}.stk", np.full(4, 1.0 + i))
    return io.SceneManifest(
        views, ["d0.stk", "d1.stk"], 2, 2, boxes=[ObjectBox((0, 0, 0), (1, 1, 1), "cup")], root=str(tmp_path)
    )


def test_manifest_round_trip(tmp_path):
    man = _manifest(tmp_path)
    io.write_manifest(tmp_path / "m.json", man)
    back = io.read_manifest(tmp_path / "m.json")
    assert back == man
    cloud = io.load_cloud(back)
    assert len(cloud) == 8 and cloud.n_views == 2


def test_manifest_errors(tmp_path):
    man = _manifest(tmp_path)
    man.depth = ["d0.stk", "missing.stk"]
    io.write_manifest(tmp_path / "m.json", man)
    with pytest.raises(InputError):
        io.read_manifest(tmp_path / "m.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(InputError):
        io.read_manifest(tmp_path / "bad.json")
    (tmp_path / "short.json").write_text('{"views": []}')
    with pytest.raises(InputError):
        io.read_manifest(tmp_path / "short.json")


def test_manifest_depth_size_mismatch(tmp_path):
    man = _manifest(tmp_path)
    io.write_blob(tmp_path / "d1.stk", np.ones(5))
    with pytest.raises(InputError):
        io.load_cloud(man)


def test_selection_round_trip(tmp_path):
    sel = SampleSelection([4, 0, 2], "fps6d", 0.25, 4)
    io.write_selection(tmp_path / "s.json", sel, scene="m.json")
    assert io.read_selection(tmp_path / "s.json") == sel
    text = (tmp_path / "s.json").read_text()
    io.write_selection(tmp_path / "t.json", sel, scene="m.json")
    assert (tmp_path / "t.json").read_text() == text and text.endswith("\n")


def test_tokens_round_trip(tmp_path, rng):
    seq = TokenSequence([3, 1, 2], rng.normal(size=(3, 3)), [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
                        rng.normal(size=(3, 4)).astype(np.float32), [-1, 0, 0], "objects")
    io.write_tokens(tmp_path / "t.json", seq, tmp_path / "f.stk")
    assert io.read_tokens(tmp_path / "t.json") == seq
    plain = TokenSequence([0], [[1.5, 2, 3]], [[0, 0, 0]], permutation="patch")
    io.write_tokens(tmp_path / "p.json", plain)
    assert io.read_tokens(tmp_path / "p.json") == plain


def test_boxes_round_trip(tmp_path):
    boxes = [ObjectBox((0, 0, 0), (1, 2, 3), "a"), ObjectBox((-1, -1, -1), (0, 0, 0))]
    io.write_boxes(tmp_path / "b.json", boxes)
    assert io.read_boxes(tmp_path / "b.json") == boxes


def test_scores_csv(tmp_path):
    t = ScoreTable({"Ac25": 1.5, "C": 2.0})
    io.write_scores(tmp_path / "s.csv", t)
    assert io.read_scores(tmp_path / "s.csv") == t
    (tmp_path / "u.csv").write_text("Ac25,Foo\n1,2\n")
    with pytest.raises(InputError):
        io.read_scores(tmp_path / "u.csv")
    (tmp_path / "d.csv").write_text("Ac25,Ac25\n1,2\n")
    with pytest.raises(InputError):
        io.read_scores(tmp_path / "d.csv")
    (tmp_path / "n.csv").write_text("Ac25\nabc\n")
    with pytest.raises(InputError):
        io.read_scores(tmp_path / "n.csv")
    (tmp_path / "two.csv").write_text("Ac25\n1\n2\n")
    with pytest.raises(InputError):
        io.read_scores(tmp_path / "two.csv")
    assert len(io.read_score_rows(tmp_path / "two.csv")) == 2
