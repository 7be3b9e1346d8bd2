"""Neighbourhood decoupling: ring layouts for the 7×7, dilated and deformable variants."""

from __future__ import annotations

from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import ValidationError
from .types import NeighborhoodSpec, Offset, Ring, Variant

# Ring 1 of every variant that uses it: the 3×3 window minus its centre.
_UNIT_RING: Tuple[Offset, ...] = tuple(
    (dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)
)


def chebyshev_ring(k: int) -> Tuple[Offset, ...]:
    """Offsets at Chebyshev distance exactly k, row-major order (8k of them)."""
    return tuple(
        (dy, dx)
        for dy in range(-k, k + 1)
        for dx in range(-k, k + 1)
        if max(abs(dy), abs(dx)) == k
    )


def dilated_ring(k: int) -> Tuple[Offset, ...]:
    """3×3 pattern dilated by 2k-1, centre excluded."""
    d = 2 * k - 1
    return tuple((dy * d, dx * d) for dy, dx in _UNIT_RING)


def _coerce_variant(variant: Union[Variant, str]) -> Variant:
    try:
        return Variant(variant)
    except ValueError:
        choices = ", ".join(v.value for v in Variant)
        raise ValidationError(f"unknown variant {variant!r}; expected one of: {choices}") from None


def build_neighborhood(
    variant: Union[Variant, str],
    height: int,
    width: int,
    offset_field: Optional[np.ndarray] = None,
) -> NeighborhoodSpec:
    """
    Build the NeighborhoodSpec of one variant.

    Ring7x7 → rings of 8, 16, 24; Dilated → two rings of 8 (dilation 1 and 3);
    Deformable → fixed 3×3 ring plus two rings of 8 per-pixel offsets read
    from `offset_field` [2, 8, 2, H, W].
    """
    variant = _coerce_variant(variant)

    if variant is Variant.DEFORMABLE:
        if offset_field is None:
            raise ValidationError("deformable variant requires an offset_field of shape (2, 8, 2, height, width)")
        rings = (
            Ring(offsets=_UNIT_RING, size=8),
            Ring(offsets=(), size=8, deformable=True),
            Ring(offsets=(), size=8, deformable=True),
        )
        return NeighborhoodSpec(variant, height, width, rings, offset_field=np.asarray(offset_field))

    if offset_field is not None:
        raise ValidationError(f"offset_field is only accepted by the deformable variant, not {variant.value}")

    if variant is Variant.RING_7X7:
        rings = tuple(Ring(offsets=chebyshev_ring(k), size=8 * k) for k in (1, 2, 3))
    else:
        rings = tuple(Ring(offsets=dilated_ring(k), size=8) for k in (1, 2))
    return NeighborhoodSpec(variant, height, width, rings)


def deformable_offsets(
    height: int,
    width: int,
    seed: Optional[int] = 0,
    jitter: float = 0.5,
) -> np.ndarray:
    """
    Seeded fractional offset field [2, 8, 2, H, W] for the deformable rings.

    Ring k (k = 2, 3) starts from the 3×3 pattern dilated by 2k-1 and adds
    uniform jitter in [-jitter, jitter] per pixel. jitter=0 gives the
    dilated layout exactly.
    """
    rng = np.random.default_rng(seed)
    field_planes = np.zeros((2, 8, 2, height, width), dtype=np.float64)
    for ring_index, k in enumerate((2, 3)):
        d = 2 * k - 1
        for slot, (dy, dx) in enumerate(_UNIT_RING):
            field_planes[ring_index, slot, 0] = dy * d
            field_planes[ring_index, slot, 1] = dx * d
    if jitter > 0:
        field_planes += rng.uniform(-jitter, jitter, size=field_planes.shape)
    return field_planes


def describe_rings(spec: NeighborhoodSpec) -> List[str]:
    """One human-readable line per ring (used by the CLI)."""
    lines = []
    for k, ring in enumerate(spec.rings, start=1):
        kind = "deformable" if ring.deformable else "fixed"
        lines.append(f"ring {k}: {ring.size} {kind} neighbours")
    return lines
