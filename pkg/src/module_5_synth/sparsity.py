"""Sparse sampling of dense ground truth and the nearest-valid fill that seeds propagation."""

from __future__ import annotations

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.ndimage import distance_transform_edt

from src.shared import DepthGrid, ValidationError

logger = logging.getLogger(__name__)

GridLike = Union[DepthGrid, np.ndarray]


def _as_grid(grid: GridLike) -> DepthGrid:
    return grid if isinstance(grid, DepthGrid) else DepthGrid(np.asarray(grid))


def sample_count(height: int, width: int, rate: float) -> int:
    """floor(rate * H * W), robust to rates like 0.05 that are not exact in binary."""
    if not 0 < rate <= 1:
        raise ValidationError(f"sparsify: rate must be in (0, 1], got {rate}")
    return int(math.floor(rate * height * width + 1e-9))


def sparsify(
    gt: GridLike,
    rate: Optional[float] = None,
    seed: Optional[int] = 0,
    count: Optional[int] = None,
) -> DepthGrid:
    """
    Keep a uniform random subset of the valid pixels of `gt`; the rest become 0.

    Give either `rate` (keeps floor(rate*H*W) pixels) or an exact `count`.
    Only pixels that are valid in `gt` are candidates.
    """
    grid = _as_grid(gt)
    if (rate is None) == (count is None):
        raise ValidationError("sparsify: give exactly one of rate or count")
    if count is None:
        count = sample_count(grid.height, grid.width, rate)
    candidates = np.flatnonzero(grid.valid_mask())
    if not 0 <= count <= candidates.size:
        raise ValidationError(f"sparsify: count must be in [0, {candidates.size}], got {count}")

    rng = np.random.default_rng(seed)
    keep = rng.choice(candidates, size=count, replace=False)
    sparse = np.zeros(grid.height * grid.width, dtype=np.float64)
    sparse[keep] = grid.values.ravel()[keep]
    logger.debug("sparsify: kept %d of %d pixels", count, grid.height * grid.width)
    return DepthGrid(sparse.reshape(grid.shape))


def nearest_fill(sparse: GridLike) -> DepthGrid:
    """Dense grid where every pixel takes the value of its nearest valid pixel (Euclidean)."""
    grid = _as_grid(sparse)
    valid = grid.valid_mask()
    if not np.any(valid):
        raise ValidationError("nearest_fill: sparse map has no valid pixels")
    # EDT measures distance to the nearest zero, so invalid pixels must be nonzero.
    _, (rows, cols) = distance_transform_edt(~valid, return_indices=True)
    return DepthGrid(grid.values[rows, cols])
