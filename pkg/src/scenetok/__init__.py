"""View-aware point sampling, feature pooling and token ordering for multi-view 3D scenes."""

from ._validation import InputError
from .estimators import FarthestPointSampler, NearestNeighborPooler, ViewAwareSampler, VoxelAverager
from .fusion import FeatureSet, NearestIndexMap, fuse_tokens, nearest_neighbor_map
from .geometry import CameraView, PatchGrid, ViewedPointCloud, flatten_grid, lift_6d, unproject_depth
from .metrics import ScoreTable, multi_seed_summary, normalized_score
from .ordering import ObjectBox, TokenSequence, order_default, order_objects, order_patch, order_random
from .sampling import SampleSelection, VoxelResult, fps, fps6d, fps_oracle, voxel_average
from .stats import SamplingStats, nn_distance, points_per_view_std, views_per_neighborhood

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "CameraView",
    "PatchGrid",
    "ViewedPointCloud",
    "unproject_depth",
    "flatten_grid",
    "lift_6d",
    "SampleSelection",
    "VoxelResult",
    "fps",
    "fps_oracle",
    "fps6d",
    "voxel_average",
    "FeatureSet",
    "NearestIndexMap",
    "nearest_neighbor_map",
    "fuse_tokens",
    "ObjectBox",
    "TokenSequence",
    "order_patch",
    "order_random",
    "order_default",
    "order_objects",
    "SamplingStats",
    "points_per_view_std",
    "views_per_neighborhood",
    "nn_distance",
    "ScoreTable",
    "normalized_score",
    "multi_seed_summary",
    "FarthestPointSampler",
    "ViewAwareSampler",
    "VoxelAverager",
    "NearestNeighborPooler",
]
