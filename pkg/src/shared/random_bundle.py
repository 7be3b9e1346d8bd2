"""Seed-fixed random bundles for property tests, oracle checks, gradient checks and benchmarks."""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from .bundle import ValidatedBundle, validate_bundle
from .neighborhood import build_neighborhood, deformable_offsets
from .types import AffinityVolume, AttentionStack, DepthGrid, PropagationConfig, Variant


def random_bundle(
    variant: Union[Variant, str],
    height: int,
    width: int,
    seed: int = 0,
    config: Optional[PropagationConfig] = None,
    signed: bool = True,
    weight_margin: float = 1e-3,
    attention_margin: float = 0.0,
    depth_range: tuple[float, float] = (1.0, 10.0),
    integral_offsets: bool = False,
) -> ValidatedBundle:
    """
    Random but reproducible bundle.

    |w| is drawn from [weight_margin, 1] with a random sign when `signed`;
    attention from [attention_margin, 1 - attention_margin]. Deformable
    offsets are fractional unless `integral_offsets` (needed by the oracle).
    """
    config = config or PropagationConfig()
    variant = Variant(variant)
    rng = np.random.default_rng(seed)

    offset_field = None
    if variant is Variant.DEFORMABLE:
        offset_field = deformable_offsets(height, width, seed=seed, jitter=0.0 if integral_offsets else 0.5)
        if integral_offsets:
            offset_field = offset_field + rng.integers(-1, 2, size=offset_field.shape)
    spec = build_neighborhood(variant, height, width, offset_field)

    low, high = depth_range
    depth = rng.uniform(low, high, size=(height, width))
    magnitude = rng.uniform(weight_margin, 1.0, size=(spec.neighbor_count, height, width))
    sign = rng.choice((-1.0, 1.0), size=magnitude.shape) if signed else 1.0
    attention = rng.uniform(
        attention_margin, 1.0 - attention_margin, size=(config.steps, spec.ring_count + 1, height, width)
    )

    return validate_bundle(
        DepthGrid(depth.astype(config.dtype)),
        AffinityVolume((magnitude * sign).astype(config.dtype)),
        AttentionStack(attention.astype(config.dtype)),
        spec,
        config,
    )
