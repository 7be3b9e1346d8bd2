"""Module 5: Synthetic experiments.

Public API for dataset-free scenes, sparse sampling, nearest fill,
guidance-driven affinities and attention schedules.
"""

from src.shared import deformable_offsets

from .affinity import default_sigma, edge_affinity
from .pipeline import SyntheticBundle, build_synthetic_bundle
from .scenes import Scene, SceneKind, SceneSpec, generate_scene
from .schedule import (
    AttentionSchedule,
    Curve,
    constant_schedule,
    far_decay_schedule,
    guidance_edge_map,
    schedule_attention,
)
from .sparsity import nearest_fill, sample_count, sparsify

__all__ = [
    "AttentionSchedule",
    "Curve",
    "Scene",
    "SceneKind",
    "SceneSpec",
    "SyntheticBundle",
    "build_synthetic_bundle",
    "constant_schedule",
    "default_sigma",
    "deformable_offsets",
    "edge_affinity",
    "far_decay_schedule",
    "generate_scene",
    "guidance_edge_map",
    "nearest_fill",
    "sample_count",
    "schedule_attention",
    "sparsify",
]
