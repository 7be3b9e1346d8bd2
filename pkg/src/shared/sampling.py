"""SamplingPlan: where every neighbour slot of every pixel reads from.

Integer offsets read one pixel; fractional offsets read four bilinear
corners. A sample is out of bounds (mask 0) as soon as any corner with a
nonzero weight falls outside the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .types import NeighborhoodSpec


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """
    Gather/scatter tables, layout [K, C, H, W] with C = 1 (integer offsets) or
    C = 4 (bilinear corners). Masked slots point at index 0 with weight 0.
    """

    indices: np.ndarray
    weights: np.ndarray
    mask: np.ndarray
    height: int
    width: int

    @property
    def neighbor_count(self) -> int:
        return int(self.mask.shape[0])

    @property
    def corners(self) -> int:
        return int(self.indices.shape[1])

    def sample(self, plane: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
        """
        Read `plane` [H, W] at every slot of the pixels in `rows`.

        Returns [K, rows, W]; masked samples are 0. Corners are summed in a
        fixed order so the result does not depend on the row split.
        """
        flat = np.ascontiguousarray(plane).ravel()
        indices = self.indices[:, :, rows]
        weights = self.weights[:, :, rows].astype(flat.dtype, copy=False)
        values = flat[indices[:, 0]] * weights[:, 0]
        for corner in range(1, self.corners):
            values = values + flat[indices[:, corner]] * weights[:, corner]
        return values

    def scatter(self, contributions: np.ndarray) -> np.ndarray:
        """
        Transpose of `sample`: add contributions [K, H, W] back onto the source pixels.

        Accumulation runs sequentially over slots, corners and pixels in
        row-major order, so it is deterministic.
        """
        size = self.height * self.width
        total = np.zeros(size, dtype=np.float64)
        for corner in range(self.corners):
            total += np.bincount(
                self.indices[:, corner].ravel(),
                weights=(contributions * self.weights[:, corner]).ravel(),
                minlength=size,
            )
        return total.reshape(self.height, self.width).astype(contributions.dtype, copy=False)


def build_sampling_plan(spec: NeighborhoodSpec) -> SamplingPlan:
    """Resolve a neighbourhood's per-slot offsets into gather tables."""
    height, width = spec.height, spec.width
    offsets = spec.slot_offsets
    rows, cols = np.mgrid[0:height, 0:width]
    y = rows[None, :, :] + offsets[:, 0]
    x = cols[None, :, :] + offsets[:, 1]

    if spec.is_integral:
        y0 = np.round(y).astype(np.int64)
        x0 = np.round(x).astype(np.int64)
        mask = (y0 >= 0) & (y0 < height) & (x0 >= 0) & (x0 < width)
        indices = np.where(mask, y0 * width + x0, 0)[:, None]
        weights = mask.astype(np.float64)[:, None]
    else:
        y_floor = np.floor(y)
        x_floor = np.floor(x)
        fy = y - y_floor
        fx = x - x_floor
        y0 = y_floor.astype(np.int64)
        x0 = x_floor.astype(np.int64)
        # Zero-weight corners never count against the bounds check.
        y1 = np.where(fy > 0, y0 + 1, y0)
        x1 = np.where(fx > 0, x0 + 1, x0)
        mask = (y0 >= 0) & (y1 < height) & (x0 >= 0) & (x1 < width)
        corner_rows = (y0, y0, y1, y1)
        corner_cols = (x0, x1, x0, x1)
        corner_weights = (
            (1 - fy) * (1 - fx),
            (1 - fy) * fx,
            fy * (1 - fx),
            fy * fx,
        )
        indices = np.stack(
            [np.where(mask, r * width + c, 0) for r, c in zip(corner_rows, corner_cols)],
            axis=1,
        )
        weights = np.stack([np.where(mask, w, 0.0) for w in corner_weights], axis=1)

    for arr in (indices, weights, mask):
        arr.setflags(write=False)
    return SamplingPlan(indices=indices, weights=weights, mask=mask, height=height, width=width)


@lru_cache(maxsize=16)
def sampling_plan(spec: NeighborhoodSpec) -> SamplingPlan:
    """Cached per spec instance (specs hash by identity)."""
    return build_sampling_plan(spec)
