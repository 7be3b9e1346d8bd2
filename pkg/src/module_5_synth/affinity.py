"""Handcrafted affinities from guidance intensity differences."""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.shared import AffinityVolume, NeighborhoodSpec, ValidationError, sampling_plan

# Default sigma as a fraction of the guidance dynamic range.
SIGMA_FRACTION = 0.1


def default_sigma(guidance: np.ndarray) -> float:
    span = float(np.max(guidance) - np.min(guidance))
    return SIGMA_FRACTION * span if span > 0 else 1.0


def edge_affinity(
    guidance: np.ndarray,
    spec: NeighborhoodSpec,
    sigma: Optional[float] = None,
) -> AffinityVolume:
    """
    w = exp(-|I(p + o) - I(p)| / sigma) per neighbour slot.

    Neighbour intensities are read through the same SamplingPlan as the
    kernel, so deformable slots use bilinear guidance. Out-of-bounds slots
    get w = 0.
    """
    guidance = np.asarray(guidance, dtype=np.float64)
    if guidance.shape != (spec.height, spec.width):
        raise ValidationError(
            f"edge_affinity: guidance shape {guidance.shape} does not match spec {(spec.height, spec.width)}"
        )
    if sigma is None:
        sigma = default_sigma(guidance)
    if not sigma > 0:
        raise ValidationError(f"edge_affinity: sigma must be > 0, got {sigma}")

    plan = sampling_plan(spec)
    neighbours = plan.sample(guidance)
    weights = np.exp(-np.abs(neighbours - guidance[None]) / sigma)
    return AffinityVolume(np.where(plan.mask, weights, 0.0))
