"""Scene -> sparse samples -> nearest fill -> affinity -> attention, as one validated bundle."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.shared import (
    DepthGrid,
    PropagationConfig,
    ValidatedBundle,
    Variant,
    build_neighborhood,
    deformable_offsets,
    validate_bundle,
)

from .affinity import edge_affinity
from .scenes import Scene, SceneSpec, generate_scene
from .schedule import AttentionSchedule, far_decay_schedule, guidance_edge_map, schedule_attention
from .sparsity import nearest_fill, sparsify

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SyntheticBundle:
    scene: Scene
    sparse: DepthGrid
    bundle: ValidatedBundle

    @property
    def gt(self) -> DepthGrid:
        return self.scene.gt

    @property
    def guidance(self) -> np.ndarray:
        return self.scene.guidance


def build_synthetic_bundle(
    variant: Union[Variant, str] = Variant.RING_7X7,
    scene: Optional[SceneSpec] = None,
    rate: Optional[float] = 0.05,
    count: Optional[int] = None,
    schedule: Optional[AttentionSchedule] = None,
    sigma: Optional[float] = None,
    config: Optional[PropagationConfig] = None,
    edge_aware: bool = False,
) -> SyntheticBundle:
    """
    Everything needed to propagate on a synthetic scene.

    h_0 is the nearest fill of the sparse samples. Deformable offsets are
    seeded from the scene seed. The attention stack has config.steps steps,
    far-decay unless another schedule is given.

    Args:
        variant: neighbourhood layout.
        scene: scene to generate (defaults to a 64x64 step edge).
        rate: fraction of ground-truth pixels kept as samples.
        count: exact number of samples; overrides `rate`.
        schedule: attention curves; far-decay when omitted.
        sigma: affinity sigma; 0.1 of the guidance range when omitted.
        config: propagation settings, `steps` sizes the attention stack.
        edge_aware: scale the far rings down along guidance edges.

    Returns:
        SyntheticBundle holding the scene, the sparse map and the bundle.
    """
    scene_spec = scene or SceneSpec()
    config = config or PropagationConfig()
    variant = Variant(variant)
    if count is not None:
        rate = None

    generated = generate_scene(scene_spec)
    sparse = sparsify(generated.gt, rate=rate, seed=scene_spec.seed, count=count)
    initial = nearest_fill(sparse)

    offset_field = None
    if variant is Variant.DEFORMABLE:
        offset_field = deformable_offsets(scene_spec.height, scene_spec.width, seed=scene_spec.seed)
    spec = build_neighborhood(variant, scene_spec.height, scene_spec.width, offset_field)

    affinity = edge_affinity(generated.guidance, spec, sigma)
    schedule = schedule or far_decay_schedule()
    if edge_aware:
        schedule = schedule.with_edge_map(guidance_edge_map(generated.guidance))
    attention = schedule_attention(schedule, config.steps, spec)
    bundle = validate_bundle(initial, affinity, attention, spec, config)
    logger.debug(
        "synthetic %s bundle: %s scene %dx%d, %d samples, schedule %s",
        variant.value,
        scene_spec.kind.value,
        scene_spec.height,
        scene_spec.width,
        sparse.valid_count(),
        schedule.name,
    )
    return SyntheticBundle(scene=generated, sparse=sparse, bundle=bundle)
