"""Synthetic scenes: dense positive ground truth plus a guidance image whose edges match the depth edges."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.shared import DepthGrid, ValidationError


class SceneKind(str, Enum):
    STEP_EDGE = "step_edge"
    SLANTED_PLANES = "slanted_planes"
    SPHERE_ON_PLANE = "sphere_on_plane"


@dataclass(frozen=True)
class SceneSpec:
    """
    kind, size, depth range in meters, seed.

    `guidance_noise` is the std of the seeded intensity noise added to the
    piecewise-smooth guidance (0 gives a clean image).
    """

    kind: SceneKind = SceneKind.STEP_EDGE
    height: int = 64
    width: int = 64
    depth_range: Tuple[float, float] = (2.0, 5.0)
    seed: int = 0
    guidance_noise: float = 0.08

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SceneKind(self.kind))
        if self.height < 2 or self.width < 2:
            raise ValidationError(f"scene: height and width must be >= 2, got {self.height}x{self.width}")
        near, far = self.depth_range
        if not 0 < near < far:
            raise ValidationError(f"scene: depth range must satisfy 0 < near < far, got {self.depth_range}")
        if self.guidance_noise < 0:
            raise ValidationError(f"scene: guidance_noise must be >= 0, got {self.guidance_noise}")


@dataclass(frozen=True, eq=False)
class Scene:
    gt: DepthGrid
    guidance: np.ndarray  # [H, W] intensity in [0, 1]
    spec: SceneSpec


def _step_edge(spec: SceneSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Near plane left of column width//2, far plane right of it."""
    near, far = spec.depth_range
    split = spec.width // 2
    depth = np.full((spec.height, spec.width), far, dtype=np.float64)
    depth[:, :split] = near
    intensity = np.where(depth == near, 0.4, 0.6)
    return depth, intensity


def _slanted_planes(spec: SceneSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Two tilted planes meeting at a seeded diagonal; gradients constant per region."""
    near, far = spec.depth_range
    span = far - near
    rows, cols = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    slope = rng.uniform(-0.5, 0.5)
    boundary = spec.width / 2 + slope * (rows - spec.height / 2)
    upper = cols < boundary

    gy_a, gx_a, gy_b, gx_b = rng.uniform(-0.15, 0.15, size=4) * span
    plane_a = near + 0.25 * span + gy_a * rows / spec.height + gx_a * cols / spec.width
    plane_b = near + 0.75 * span + gy_b * rows / spec.height + gx_b * cols / spec.width
    depth = np.where(upper, plane_a, plane_b)
    intensity = np.where(upper, 0.35, 0.65) + 0.05 * cols / spec.width
    return depth, intensity


def _sphere_on_plane(spec: SceneSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Far background plane with a seeded sphere bulging towards the camera."""
    near, far = spec.depth_range
    rows, cols = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    radius = rng.uniform(0.2, 0.35) * min(spec.height, spec.width)
    cy = rng.uniform(radius, spec.height - radius)
    cx = rng.uniform(radius, spec.width - radius)
    dist2 = (rows - cy) ** 2 + (cols - cx) ** 2
    inside = dist2 < radius**2
    bulge = np.sqrt(np.clip(radius**2 - dist2, 0.0, None)) / radius  # 0 at rim, 1 at centre

    sphere_back = near + 0.6 * (far - near)
    depth = np.where(inside, sphere_back - bulge * 0.5 * (sphere_back - near), far)
    intensity = np.where(inside, 0.55 + 0.35 * bulge, 0.25)
    return depth, intensity


_GENERATORS = {
    SceneKind.STEP_EDGE: _step_edge,
    SceneKind.SLANTED_PLANES: _slanted_planes,
    SceneKind.SPHERE_ON_PLANE: _sphere_on_plane,
}


def generate_scene(spec: Optional[SceneSpec] = None) -> Scene:
    """Deterministic (gt, guidance) for a scene spec."""
    spec = spec or SceneSpec()
    rng = np.random.default_rng(spec.seed)
    depth, intensity = _GENERATORS[spec.kind](spec, rng)
    if spec.guidance_noise > 0:
        intensity = intensity + rng.normal(0.0, spec.guidance_noise, size=intensity.shape)
    guidance = np.clip(intensity, 0.0, 1.0)
    return Scene(gt=DepthGrid(depth), guidance=guidance, spec=spec)
