"""Analysis products computed from a config document."""

from .avatars import AggregatedSkeleton, Trajectory, aggregate_avatars, extract_trajectory, sample_skeleton_pose
from .simplify import simplify_trajectory
from .raycast import MeshBVH, RaycastHit, SceneHit, SceneIndex, raycast
from .heatmap import HeatmapLayer, accumulate_heatmap, merge_layers, layer_to_f32, layer_to_png
from .portals import PlaceIndex, PortalResolution, resolve_portal
from .layout import PathEventLayout, layout_path_events
from .metrics import ModalityChain, SequenceMetrics, modality_sequence_metrics

__all__ = [
    "AggregatedSkeleton",
    "Trajectory",
    "aggregate_avatars",
    "extract_trajectory",
    "sample_skeleton_pose",
    "simplify_trajectory",
    "MeshBVH",
    "RaycastHit",
    "SceneHit",
    "SceneIndex",
    "raycast",
    "HeatmapLayer",
    "accumulate_heatmap",
    "merge_layers",
    "layer_to_f32",
    "layer_to_png",
    "PlaceIndex",
    "PortalResolution",
    "resolve_portal",
    "PathEventLayout",
    "layout_path_events",
    "ModalityChain",
    "SequenceMetrics",
    "modality_sequence_metrics",
]
