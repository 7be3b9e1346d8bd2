"""Attention schedules: per-step, per-ring curves expanded into a full AttentionStack.

Each curve is geometric in the step index, value(t) = clip(start * rate**t, 0, 1).
A schedule may also carry an edge map in [0, 1] that scales down the far
rings (k >= 2) where the guidance changes sharply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from scipy import ndimage

from src.shared import AttentionStack, NeighborhoodSpec, ValidationError


@dataclass(frozen=True)
class Curve:
    start: float = 1.0
    rate: float = 1.0

    def __post_init__(self) -> None:
        if self.start < 0 or self.rate < 0:
            raise ValidationError(f"curve: start and rate must be >= 0, got start={self.start}, rate={self.rate}")

    def value(self, t: int) -> float:
        return float(np.clip(self.start * self.rate**t, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class AttentionSchedule:
    """
    `self_curve` drives pi_0; `ring_curves[k-1]` drives ring k. A spec with
    more rings than curves reuses the last curve for the outer rings.
    """

    self_curve: Curve
    ring_curves: Tuple[Curve, ...]
    edge_map: Optional[np.ndarray] = None  # [H, W] in [0, 1]
    name: str = "custom"

    def __post_init__(self) -> None:
        if not self.ring_curves:
            raise ValidationError("schedule: need at least one ring curve")
        if self.edge_map is not None:
            edges = np.asarray(self.edge_map, dtype=np.float64)
            if edges.ndim != 2 or np.any(edges < 0) or np.any(edges > 1):
                raise ValidationError("schedule: edge_map must be a 2-D array with values in [0, 1]")
            object.__setattr__(self, "edge_map", edges)

    def curve_for(self, ring: int) -> Curve:
        """Curve of ring `ring` (0 = self)."""
        if ring == 0:
            return self.self_curve
        return self.ring_curves[min(ring, len(self.ring_curves)) - 1]

    def with_edge_map(self, edge_map: np.ndarray) -> "AttentionSchedule":
        return AttentionSchedule(self.self_curve, self.ring_curves, edge_map, f"{self.name}+edges")


def constant_schedule(value: float = 1.0) -> AttentionSchedule:
    """Every ring, every step at `value`; value 1 gives the CSPN emulation stack."""
    curve = Curve(start=value, rate=1.0)
    return AttentionSchedule(self_curve=curve, ring_curves=(curve,), name=f"constant({value:g})")


def far_decay_schedule() -> AttentionSchedule:
    """
    pi_0 grows towards 1 while every neighbour ring decays, the far rings fastest.

    Mirrors the learned behaviour of the trained model: the pixel's own term
    takes over as propagation converges.
    """
    return AttentionSchedule(
        self_curve=Curve(start=0.5, rate=1.25),
        ring_curves=(
            Curve(start=1.0, rate=0.4),
            Curve(start=0.8, rate=0.3),
            Curve(start=0.6, rate=0.2),
        ),
        name="far_decay",
    )


def guidance_edge_map(guidance: np.ndarray, smoothing: float = 1.0) -> np.ndarray:
    """
    Gradient magnitude of the guidance scaled to [0, 1].

    `smoothing` is the Gaussian sigma in pixels applied before differencing so
    that intensity noise does not read as structure; 0 uses plain central
    differences.
    """
    guidance = np.asarray(guidance, dtype=np.float64)
    if smoothing < 0:
        raise ValidationError(f"guidance_edge_map: smoothing must be >= 0, got {smoothing}")
    if smoothing > 0:
        magnitude = ndimage.gaussian_gradient_magnitude(guidance, sigma=smoothing)
    else:
        gy, gx = np.gradient(guidance)
        magnitude = np.hypot(gy, gx)
    peak = float(magnitude.max())
    return magnitude / peak if peak > 0 else np.zeros_like(magnitude)


def schedule_attention(schedule: AttentionSchedule, steps: int, spec: NeighborhoodSpec) -> AttentionStack:
    """Expand the curves into a [steps, R+1, H, W] stack, clamped to [0, 1]."""
    if steps < 1:
        raise ValidationError(f"schedule_attention: steps must be >= 1, got {steps}")
    rings = spec.ring_count + 1
    values = np.empty((steps, rings, spec.height, spec.width), dtype=np.float64)
    for t in range(steps):
        for k in range(rings):
            values[t, k] = schedule.curve_for(k).value(t)

    if schedule.edge_map is not None:
        if schedule.edge_map.shape != (spec.height, spec.width):
            raise ValidationError(
                f"schedule: edge_map shape {schedule.edge_map.shape} does not match spec {(spec.height, spec.width)}"
            )
        values[:, 2:] *= 1.0 - schedule.edge_map

    return AttentionStack(np.clip(values, 0.0, 1.0))
