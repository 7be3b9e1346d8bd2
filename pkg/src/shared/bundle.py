"""Cross-shape validation of a propagation bundle (depth, affinity, attention, geometry, config)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from .errors import ValidationError
from .sampling import SamplingPlan, sampling_plan
from .types import AffinityVolume, AttentionStack, DepthGrid, NeighborhoodSpec, PropagationConfig


@dataclass(frozen=True, eq=False)
class ValidatedBundle:
    """Immutable view of inputs whose shapes are known to agree."""

    depth: DepthGrid
    affinity: AffinityVolume
    attention: AttentionStack
    spec: NeighborhoodSpec
    config: PropagationConfig
    plan: SamplingPlan

    @property
    def height(self) -> int:
        return self.depth.height

    @property
    def width(self) -> int:
        return self.depth.width

    def with_attention(self, attention: AttentionStack) -> "ValidatedBundle":
        return validate_bundle(self.depth, self.affinity, attention, self.spec, self.config)

    def with_config(self, config: PropagationConfig) -> "ValidatedBundle":
        return validate_bundle(self.depth, self.affinity, self.attention, self.spec, config)


def _as_depth(depth: Union[DepthGrid, np.ndarray]) -> DepthGrid:
    return depth if isinstance(depth, DepthGrid) else DepthGrid(depth)


def _as_affinity(aff: Union[AffinityVolume, np.ndarray]) -> AffinityVolume:
    return aff if isinstance(aff, AffinityVolume) else AffinityVolume(aff)


def _as_attention(attn: Union[AttentionStack, np.ndarray]) -> AttentionStack:
    return attn if isinstance(attn, AttentionStack) else AttentionStack(attn)


def validate_bundle(
    depth: Union[DepthGrid, np.ndarray],
    aff: Union[AffinityVolume, np.ndarray],
    attn: Union[AttentionStack, np.ndarray],
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
) -> ValidatedBundle:
    """
    Check every cross-shape constraint and return a ValidatedBundle.

    Raw arrays are accepted and validated through the type constructors, so a
    value out of range surfaces here as a ValidationError too. All mismatches
    are collected and reported together.
    """
    cfg = cfg or PropagationConfig()
    depth = _as_depth(depth)
    aff = _as_affinity(aff)
    attn = _as_attention(attn)

    problems: List[str] = []
    grid = (spec.height, spec.width)
    if depth.shape != grid:
        problems.append(f"depth (height, width): expected {grid} from neighborhood, got {depth.shape}")
    if aff.neighbor_count != spec.neighbor_count:
        problems.append(
            f"affinity K: expected sum of ring sizes {spec.ring_sizes} = {spec.neighbor_count}, "
            f"got {aff.neighbor_count}"
        )
    if (aff.height, aff.width) != grid:
        problems.append(f"affinity (height, width): expected {grid}, got {(aff.height, aff.width)}")
    if attn.rings != spec.ring_count + 1:
        problems.append(
            f"attention rings: expected R+1={spec.ring_count + 1} for {spec.variant.value}, got {attn.rings}"
        )
    if (attn.height, attn.width) != grid:
        problems.append(f"attention (height, width): expected {grid}, got {(attn.height, attn.width)}")
    if attn.steps < cfg.steps:
        problems.append(f"attention steps T: need T >= steps={cfg.steps}, got {attn.steps}")
    if problems:
        raise ValidationError("; ".join(problems))

    return ValidatedBundle(
        depth=depth,
        affinity=aff,
        attention=attn,
        spec=spec,
        config=cfg,
        plan=sampling_plan(spec),
    )
