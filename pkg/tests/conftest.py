import numpy as np
import pytest

from scenetok.geometry import CameraView, ViewedPointCloud


def brute_knn(points, k, exclude_self=True, queries=None):
    """All-pairs k-NN ranked by (squared distance, index)."""
    points = np.asarray(points, dtype=float)
    queries = points if queries is None else np.asarray(queries, dtype=float)
    d2 = ((queries[:, None, :] - points[None, :, :]) ** 2).sum(-1)
    if exclude_self:
        np.fill_diagonal(d2, np.inf)
    out = []
    for row in d2:
        order = np.lexsort((np.arange(len(row)), row))
        out.append(order[:k])
    return np.array(out, dtype=np.int64).reshape(len(queries), k), d2


def brute_views_per_neighborhood(positions, view_ids, k):
    idx, _ = brute_knn(positions, k)
    return np.array([len(set(view_ids[r].tolist())) for r in idx])


def brute_nn_distance(positions):
    pts = np.asarray(positions, dtype=float)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def random_multiview_cloud(rng, n=None, n_views=None, spread=5.0):
    n = int(rng.integers(20, 400)) if n is None else n
    n_views = int(rng.integers(2, 9)) if n_views is None else n_views
    views = [
        CameraView(k, 500.0, 500.0, 320.0, 240.0, np.eye(3), rng.uniform(-3, 3, 3))
        for k in range(n_views)
    ]
    ids = rng.integers(0, n_views, n)
    pos = rng.uniform(-spread, spread, (n, 3))
    return ViewedPointCloud.from_views(pos, ids, views)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
