"""Token sequences and the permutations applied before they reach the LLM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import InputError
from .geometry import ViewedPointCloud

__all__ = [
    "SCENE_GROUP",
    "ObjectBox",
    "TokenSequence",
    "build_tokens",
    "order_patch",
    "order_random",
    "order_default",
    "order_objects",
]

SCENE_GROUP = -1


@dataclass(frozen=True)
class ObjectBox:
    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]
    label: str | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min_corner)
        hi = tuple(float(v) for v in self.max_corner)
        if len(lo) != 3 or len(hi) != 3:
            raise InputError("box corners must have 3 coordinates")
        if any(a > b for a, b in zip(lo, hi)):
            raise InputError(f"box has negative extent: {lo} > {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.max_corner, self.min_corner)))

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return np.all((pts >= self.min_corner) & (pts <= self.max_corner), axis=1)


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """Ordered tokens.

    ``ids`` identify each token by its source point index, ``source_patch``
    rows are (view, row, col) with -1 for unknown, ``groups`` hold
    ``SCENE_GROUP`` or the input index of the object box a token belongs to.
    """

    ids: np.ndarray
    positions: np.ndarray
    source_patch: np.ndarray
    features: np.ndarray | None = None
    groups: np.ndarray | None = None
    permutation: str = "none"

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int64).reshape(-1)
        n = len(ids)
        pos = np.array(self.positions, dtype=np.float64).reshape(n, 3)
        patch = np.array(self.source_patch, dtype=np.int64).reshape(n, 3)
        groups = (
            np.full(n, SCENE_GROUP, dtype=np.int64)
            if self.groups is None
            else np.array(self.groups, dtype=np.int64).reshape(n)
        )
        feats = None
        if self.features is not None:
            feats = np.array(self.features, dtype=np.float64)
            if feats.ndim != 2 or len(feats) != n:
                raise InputError("features must hold one row per token")
        for name, arr in (("ids", ids), ("positions", pos), ("source_patch", patch), ("groups", groups), ("features", feats)):
            if arr is not None:
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.ids)

    def take(self, order, permutation: str, groups=None) -> "TokenSequence":
        order = np.asarray(order, dtype=np.int64)
        return TokenSequence(
            self.ids[order],
            self.positions[order],
            self.source_patch[order],
            None if self.features is None else self.features[order],
            self.groups[order] if groups is None else groups,
            permutation,
        )

    def __eq__(self, other):
        if not isinstance(other, TokenSequence):
            return NotImplemented
        same_feats = (self.features is None and other.features is None) or (
            self.features is not None
            and other.features is not None
            and np.array_equal(self.features, other.features)
        )
        return (
            self.permutation == other.permutation
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.source_patch, other.source_patch)
            and np.array_equal(self.groups, other.groups)
            and same_feats
        )

    __hash__ = None


def build_tokens(cloud: ViewedPointCloud, indices=None, features=None) -> TokenSequence:
    """Tokens for ``cloud`` (or the points at ``indices``) in the given order.

    ``features`` may be an (N, D) per-point array or a per-patch
    ``FeatureSet`` gathered through each point's source patch.
    """
    idx = np.arange(len(cloud)) if indices is None else np.asarray(indices, dtype=np.int64)
    feats = None
    if features is not None:
        if getattr(features, "anchor", None) == "per_patch":
            patch = cloud.source_patch[idx]
            if np.any(patch < 0):
                raise InputError("per-patch features need every token's source patch")
            feats = features.as_grid()[patch[:, 0], patch[:, 1], patch[:, 2]]
        else:
            vec = getattr(features, "vectors", features)
            feats = np.asarray(vec, dtype=np.float64)[idx]
    return TokenSequence(idx, cloud.positions[idx], cloud.source_patch[idx], feats)


def _patch_order(patch: np.ndarray) -> np.ndarray:
    if np.any(patch < 0):
        raise InputError("every token needs a source patch for patch ordering")
    # lexsort is stable; last key is primary
    return np.lexsort((patch[:, 2], patch[:, 1], patch[:, 0]))


def order_patch(tokens: TokenSequence) -> TokenSequence:
    """Stable sort by (view, row, col)."""
    return tokens.take(_patch_order(tokens.source_patch), "patch")


def order_random(tokens: TokenSequence, seed) -> TokenSequence:
    rng = np.random.default_rng(seed)
    return tokens.take(rng.permutation(len(tokens)), "random")


def order_default(tokens: TokenSequence, selection) -> TokenSequence:
    """Arrange tokens in the order their source points were sampled."""
    sel = np.asarray(getattr(selection, "indices", selection), dtype=np.int64)
    if len(sel) != len(tokens) or len(np.unique(tokens.ids)) != len(tokens):
        raise InputError(f"selection of {len(sel)} does not match {len(tokens)} tokens")
    where = {int(t): i for i, t in enumerate(tokens.ids)}
    try:
        order = [where[int(s)] for s in sel]
    except KeyError as exc:
        raise InputError(f"selected index {exc.args[0]} has no token") from None
    if len(set(order)) != len(order):
        raise InputError("selection repeats an index")
    return tokens.take(order, "default")


def order_objects(tokens: TokenSequence, boxes) -> TokenSequence:
    """Scene tokens first, then one group per object box, smallest box first.

    A token joins the smallest-volume box containing its position (closed
    bounds, ties by box input order) and stays with the scene otherwise.
    Every group is internally in patch order.
    """
    boxes = [b if isinstance(b, ObjectBox) else ObjectBox(*b) for b in boxes]
    by_size = sorted(range(len(boxes)), key=lambda i: (boxes[i].volume, i))
    groups = np.full(len(tokens), SCENE_GROUP, dtype=np.int64)
    for i in reversed(by_size):  # smaller boxes overwrite larger ones
        groups[boxes[i].contains(tokens.positions)] = i
    rank = np.full(len(boxes) + 1, -1, dtype=np.int64)
    rank[np.array(by_size, dtype=np.int64)] = np.arange(len(boxes))
    group_rank = np.where(groups == SCENE_GROUP, -1, rank[groups])
    patch_rank = np.empty(len(tokens), dtype=np.int64)
    patch_rank[_patch_order(tokens.source_patch)] = np.arange(len(tokens))
    order = np.lexsort((patch_rank, group_rank))
    return tokens.take(order, "objects", groups[order])
