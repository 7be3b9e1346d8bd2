"""Shared data model: DepthGrid, AffinityVolume, AttentionStack, NeighborhoodSpec, PropagationConfig.

Every other module builds on these. All types are frozen dataclasses holding
read-only numpy arrays, so they are safe to share across threads once built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

Offset = Tuple[int, int]


class Variant(str, Enum):
    # Strings match the CLI / config spelling.
    RING_7X7 = "ring7x7"
    DILATED = "dilated"
    DEFORMABLE = "deformable"


class Precision(str, Enum):
    F32 = "f32"
    F64 = "f64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32) if self is Precision.F32 else np.dtype(np.float64)


class BoundaryPolicy(str, Enum):
    # Out-of-bounds neighbours drop out of the numerator, S and S'.
    EXCLUDE_OUT_OF_BOUNDS = "exclude"


def _readonly(values: np.ndarray, dtype: Optional[np.dtype] = None) -> np.ndarray:
    """Copy into a float array (float32 kept, everything else float64) and freeze it."""
    source = np.asarray(values)
    if dtype is None:
        dtype = source.dtype if source.dtype in (np.float32, np.float64) else np.float64
    arr = np.array(source, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise ValidationError(f"{name}: {bad} non-finite value(s)")


# -----------------------------------------------------------------------------
# Grids and volumes
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DepthGrid:
    """
    H×W depth map in meters, row-major.

    value > 0 is a valid depth, value == 0 marks a missing pixel; negative
    values are rejected.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _readonly(self.values)
        if arr.ndim != 2:
            raise ValidationError(f"depth grid: expected 2 dims (height, width), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"depth grid: height and width must be >= 1, got {arr.shape}")
        _require_finite(arr, "depth grid")
        if np.any(arr < 0):
            raise ValidationError(
                f"depth grid: {int(np.count_nonzero(arr < 0))} negative value(s); use 0 for missing depth"
            )
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_refined(cls, values: np.ndarray) -> "DepthGrid":
        """Wrap kernel output; negatives (possible with signed affinities) become missing."""
        arr = np.asarray(values)
        negative = arr < 0
        if np.any(negative):
            logger.warning("clamping %d negative refined depth value(s) to 0", int(negative.sum()))
            arr = np.where(negative, 0.0, arr).astype(arr.dtype)
        return cls(arr)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def valid_mask(self) -> np.ndarray:
        return self.values > 0

    def valid_count(self) -> int:
        return int(np.count_nonzero(self.values > 0))


@dataclass(frozen=True, eq=False)
class AffinityVolume:
    """Raw per-neighbour weights w, layout [K, H, W]; may be negative, shared by all steps."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = _readonly(self.weights)
        if arr.ndim != 3:
            raise ValidationError(f"affinity: expected 3 dims (K, height, width), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValidationError(f"affinity: every dimension must be >= 1, got {arr.shape}")
        _require_finite(arr, "affinity")
        object.__setattr__(self, "weights", arr)

    @property
    def neighbor_count(self) -> int:
        return int(self.weights.shape[0])

    @property
    def height(self) -> int:
        return int(self.weights.shape[1])

    @property
    def width(self) -> int:
        return int(self.weights.shape[2])


@dataclass(frozen=True, eq=False)
class AttentionStack:
    """
    Post-activation attention, layout [T, R+1, H, W], values in [0, 1].

    Ring 0 is the self / suppression attention pi_0; rings 1..R gate the
    neighbour rings of the NeighborhoodSpec.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _readonly(self.values)
        if arr.ndim != 4:
            raise ValidationError(
                f"attention: expected 4 dims (steps, rings, height, width), got shape {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 2 or arr.shape[2] < 1 or arr.shape[3] < 1:
            raise ValidationError(f"attention: need steps >= 1 and rings >= 2 (self + 1), got shape {arr.shape}")
        _require_finite(arr, "attention")
        if np.any(arr < 0) or np.any(arr > 1):
            outside = int(np.count_nonzero((arr < 0) | (arr > 1)))
            raise ValidationError(
                f"attention: {outside} value(s) outside [0, 1] "
                f"(min={float(arr.min())}, max={float(arr.max())})"
            )
        object.__setattr__(self, "values", arr)

    @classmethod
    def filled(
        cls, steps: int, neighbor_rings: int, height: int, width: int, value: float = 1.0
    ) -> "AttentionStack":
        return cls(np.full((steps, neighbor_rings + 1, height, width), value, dtype=np.float64))

    @property
    def steps(self) -> int:
        return int(self.values.shape[0])

    @property
    def rings(self) -> int:
        """R+1: self ring plus neighbour rings."""
        return int(self.values.shape[1])

    @property
    def neighbor_rings(self) -> int:
        return self.rings - 1

    @property
    def height(self) -> int:
        return int(self.values.shape[2])

    @property
    def width(self) -> int:
        return int(self.values.shape[3])

    def at_step(self, t: int) -> np.ndarray:
        """Attention slice [R+1, H, W] for step t."""
        return self.values[t]


# -----------------------------------------------------------------------------
# Neighbourhoods
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Ring:
    """One decoupled neighbour ring. Deformable rings carry no fixed offsets."""

    offsets: Tuple[Offset, ...]
    size: int
    deformable: bool = False


@dataclass(frozen=True, eq=False)
class NeighborhoodSpec:
    """
    Neighbour geometry of one variant on an H×W grid.

    rings[k-1] is ring k. For the deformable variant, rings 2 and 3 read their
    per-pixel fractional offsets from `offset_field`, layout
    [2 rings, 8 slots, (dy, dx), H, W] in pixels. Geometry is the same at
    every propagation step.
    """

    variant: Variant
    height: int
    width: int
    rings: Tuple[Ring, ...]
    offset_field: Optional[np.ndarray] = None
    _slot_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.height < 1 or self.width < 1:
            raise ValidationError(f"neighborhood: height and width must be >= 1, got {self.height}x{self.width}")
        if not self.rings:
            raise ValidationError("neighborhood: at least one ring is required")
        for k, ring in enumerate(self.rings, start=1):
            if ring.deformable:
                continue
            if len(ring.offsets) != ring.size:
                raise ValidationError(f"ring {k}: size {ring.size} but {len(ring.offsets)} offsets")
            if len(set(ring.offsets)) != len(ring.offsets):
                raise ValidationError(f"ring {k}: duplicate offsets")
            if (0, 0) in ring.offsets:
                raise ValidationError(f"ring {k}: offset (0, 0) is the self slot, not a neighbour")

        deformable_rings = sum(1 for ring in self.rings if ring.deformable)
        if deformable_rings:
            if self.offset_field is None:
                raise ValidationError("neighborhood: deformable rings need an offset_field")
            field_arr = _readonly(self.offset_field, np.float64)
            expected = (deformable_rings, 8, 2, self.height, self.width)
            if field_arr.shape != expected:
                raise ValidationError(
                    f"offset_field: expected shape (ring, slot, 2, height, width) = {expected}, got {field_arr.shape}"
                )
            _require_finite(field_arr, "offset_field")
            object.__setattr__(self, "offset_field", field_arr)
        elif self.offset_field is not None:
            raise ValidationError(f"offset_field given but variant {self.variant.value} has no deformable rings")

        object.__setattr__(self, "_slot_offsets", self._build_slot_offsets())

    def _build_slot_offsets(self) -> np.ndarray:
        planes = np.zeros((self.neighbor_count, 2, self.height, self.width), dtype=np.float64)
        slot = 0
        deformable_index = 0
        for ring in self.rings:
            if ring.deformable:
                planes[slot : slot + ring.size] = self.offset_field[deformable_index]
                deformable_index += 1
            else:
                for index, (dy, dx) in enumerate(ring.offsets):
                    planes[slot + index, 0] = dy
                    planes[slot + index, 1] = dx
            slot += ring.size
        planes.setflags(write=False)
        return planes

    @property
    def ring_count(self) -> int:
        """R, the number of neighbour rings (self slot excluded)."""
        return len(self.rings)

    @property
    def ring_sizes(self) -> Tuple[int, ...]:
        return tuple(ring.size for ring in self.rings)

    @property
    def neighbor_count(self) -> int:
        """K, total neighbour slots across all rings."""
        return sum(self.ring_sizes)

    @property
    def slot_rings(self) -> np.ndarray:
        """Ring index (1-based) of each of the K slots."""
        return np.repeat(np.arange(1, self.ring_count + 1), self.ring_sizes)

    @property
    def slot_offsets(self) -> np.ndarray:
        """Per-slot, per-pixel offsets [K, 2, H, W] (dy, dx); fixed rings are broadcast."""
        return self._slot_offsets

    @property
    def is_integral(self) -> bool:
        """True when every sampled offset lands exactly on a pixel."""
        return bool(np.all(self._slot_offsets == np.round(self._slot_offsets)))


# -----------------------------------------------------------------------------
# Configuration
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PropagationConfig:
    """
    Kernel settings.

    `reference=True` is the exact epsilon-free mode used by property tests:
    the denominator is S' itself and S' == 0 yields h_0. `suppression=False`
    pins pi_0 to 1 (diffusion suppression off).
    """

    steps: int = 6
    epsilon: float = 1e-8
    boundary: BoundaryPolicy = BoundaryPolicy.EXCLUDE_OUT_OF_BOUNDS
    precision: Precision = Precision.F64
    reference: bool = False
    suppression: bool = True
    threads: int = 1

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")
        object.__setattr__(self, "boundary", BoundaryPolicy(self.boundary))
        object.__setattr__(self, "precision", Precision(self.precision))

    @property
    def dtype(self) -> np.dtype:
        return self.precision.dtype

    @property
    def denominator_guard(self) -> float:
        """Epsilon actually added to S' (0 in reference mode)."""
        return 0.0 if self.reference else float(self.epsilon)
