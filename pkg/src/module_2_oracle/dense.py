"""Dense-matrix form of the propagation on column-first vectorised grids.

V^{t+1} = G^t V^t + r^t ∘ V^0, where G^t carries the normalised adaptive
affinities pi*w/D off the diagonal and the self mass pi_0/D on it, and
r^t = 1 - S/D is the replacement coefficient of the initial map. This is the
kernel's update written as a matrix, for small grids only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from src.shared import (
    AffinityVolume,
    AttentionStack,
    DepthGrid,
    NeighborhoodSpec,
    PropagationConfig,
    ValidationError,
    validate_bundle,
)

logger = logging.getLogger(__name__)

# mn above this makes an mn×mn dense matrix impractical.
MAX_ORACLE_PIXELS = 4096


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """
    G^t for one step plus its companions, all on column-first vectors.

    `self_mass` is the diagonal of D̄^t under the kernel's normalisation
    (pi_0 / D); `attention` is K^t (zero diagonal) and `affinity` the raw A.
    """

    matrix: np.ndarray
    replacement: np.ndarray
    self_mass: np.ndarray
    attention: np.ndarray
    affinity: np.ndarray
    includes_suppression: bool
    shape: Tuple[int, int]

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    def apply(self, v: np.ndarray, v0: np.ndarray) -> np.ndarray:
        out = self.matrix @ v + self.replacement * v0
        if not self.includes_suppression:
            out = out + self.self_mass * v
        return out

    def diffusion_part(self) -> np.ndarray:
        """G^t with the self mass removed: the normalised K^t ∘ A."""
        if self.includes_suppression:
            return self.matrix - np.diag(self.self_mass)
        return self.matrix


def vectorize(grid: np.ndarray) -> np.ndarray:
    """Column-first flattening of an H×W grid."""
    return np.asarray(grid).reshape(-1, order="F")


def unvectorize(vector: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    return np.asarray(vector).reshape(shape, order="F")


def _check_tractable(spec: NeighborhoodSpec) -> None:
    pixels = spec.height * spec.width
    if pixels > MAX_ORACLE_PIXELS:
        raise ValidationError(
            f"oracle size limit: height*width = {pixels} exceeds {MAX_ORACLE_PIXELS}"
        )
    if not spec.is_integral:
        raise ValidationError("oracle requires integer offsets; fractional deformable offsets are rejected")


def _neighbour_sources(spec: NeighborhoodSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Column-first source index [K, H, W] of every slot, plus its in-bounds mask.

    Worked out from the slot offsets in (row, col) form, independent of the
    kernel's gather tables.
    """
    m, n = spec.height, spec.width
    rows, cols = np.mgrid[0:m, 0:n]
    offsets = np.rint(spec.slot_offsets).astype(np.int64)
    src_rows = rows[None] + offsets[:, 0]
    src_cols = cols[None] + offsets[:, 1]
    inside = (src_rows >= 0) & (src_rows < m) & (src_cols >= 0) & (src_cols < n)
    return np.where(inside, src_rows + src_cols * m, 0), inside


def build_G(
    shape: Tuple[int, int],
    aff: AffinityVolume,
    attn_t: np.ndarray,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
    suppression: bool = True,
) -> TransformMatrix:
    """
    Assemble G^t for one attention slice.

    The matrix is always built in float64; `cfg.precision` only affects the
    kernel it is compared against.

    Args:
        shape: (height, width) of the grid, must match `spec`.
        aff: affinity volume [K, H, W].
        attn_t: attention slice [R+1, H, W] for this step.
        spec: integer-offset neighbourhood, at most MAX_ORACLE_PIXELS pixels.
        cfg: supplies the denominator guard and the suppression switch.
        suppression: with True the self mass sits on the diagonal of the
            matrix; with False the matrix holds only the diffusion part and
            `apply` adds the self mass separately.

    Returns:
        TransformMatrix on column-first vectors.
    """
    cfg = cfg or PropagationConfig()
    _check_tractable(spec)
    m, n = shape
    if (m, n) != (spec.height, spec.width):
        raise ValidationError(f"grid shape {shape} does not match neighborhood {(spec.height, spec.width)}")

    weights = np.asarray(aff.weights, dtype=np.float64)
    attn_t = np.array(attn_t, dtype=np.float64, copy=True)
    if not cfg.suppression:
        attn_t[0] = 1.0
    source, inside = _neighbour_sources(spec)
    slot_rings = spec.slot_rings

    pi_0 = attn_t[0]
    gates = attn_t[slot_rings] * inside
    gated = gates * weights
    s = pi_0 + np.sum(gated, axis=0)
    s_prime = pi_0 + np.sum(gates * np.abs(weights), axis=0)
    denominator = s_prime + cfg.denominator_guard
    safe = denominator > 0

    def normalised(numerator: np.ndarray) -> np.ndarray:
        return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=safe)

    size = m * n
    rows_idx, cols_idx = np.mgrid[0:m, 0:n]
    target = rows_idx + cols_idx * m

    matrix = np.zeros((size, size))
    attention = np.zeros((size, size))
    affinity = np.zeros((size, size))
    for slot in range(spec.neighbor_count):
        live = inside[slot]
        p = target[live]
        q = source[slot][live]
        np.add.at(matrix, (p, q), normalised(gated[slot])[live])
        off_diagonal = p != q
        attention[p[off_diagonal], q[off_diagonal]] = attn_t[slot_rings[slot]][live][off_diagonal]
        affinity[p[off_diagonal], q[off_diagonal]] = weights[slot][live][off_diagonal]

    self_mass = vectorize(normalised(pi_0))
    if suppression:
        matrix[np.arange(size), np.arange(size)] += self_mass
    replacement = vectorize(1 - normalised(s))

    return TransformMatrix(
        matrix=matrix,
        replacement=replacement,
        self_mass=self_mass,
        attention=attention,
        affinity=affinity,
        includes_suppression=suppression,
        shape=(m, n),
    )


def oracle_trajectory(
    h_0: Union[DepthGrid, np.ndarray],
    aff: AffinityVolume,
    attn: AttentionStack,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
    steps: Optional[int] = None,
) -> np.ndarray:
    """States h^0..h^N [N+1, H, W] from the explicit matrix recursion, in float64."""
    cfg = cfg or PropagationConfig()
    steps = cfg.steps if steps is None else steps
    if steps < 0:
        raise ValidationError(f"steps must be >= 0, got {steps}")
    depth = h_0.values if isinstance(h_0, DepthGrid) else np.asarray(h_0)
    bundle = validate_bundle(depth, aff, attn, spec, cfg)
    if attn.steps < steps:
        raise ValidationError(f"attention steps T: need T >= steps={steps}, got {attn.steps}")
    _check_tractable(spec)

    shape = (spec.height, spec.width)
    v0 = vectorize(np.asarray(bundle.depth.values, dtype=np.float64))
    v = v0
    states = [unvectorize(v0, shape)]
    for t in range(steps):
        transform = build_G(shape, bundle.affinity, bundle.attention.at_step(t), spec, cfg)
        v = transform.apply(v, v0)
        states.append(unvectorize(v, shape))
    return np.stack(states)


def oracle_propagate(
    h_0: Union[DepthGrid, np.ndarray],
    aff: AffinityVolume,
    attn: AttentionStack,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
    steps: Optional[int] = None,
) -> DepthGrid:
    """Refined grid after N matrix steps (N = 0 returns h_0)."""
    return DepthGrid.from_refined(oracle_trajectory(h_0, aff, attn, spec, cfg, steps)[-1])


# -----------------------------------------------------------------------------
# Diffusion structure
# -----------------------------------------------------------------------------


def laplacian_of(transform: TransformMatrix) -> np.ndarray:
    """L^t = I - G^t, so that V^{t+1} - V^t = -L^t V^t + r^t ∘ V^0."""
    if not transform.includes_suppression:
        raise ValidationError("laplacian_of needs G built with suppression included")
    return np.eye(transform.size, dtype=transform.matrix.dtype) - transform.matrix


def folded_row_sums(transform: TransformMatrix) -> np.ndarray:
    """Row sums of L^t minus the replacement coefficient; identically 0."""
    return laplacian_of(transform).sum(axis=1) - transform.replacement


def gershgorin_radius(transform: TransformMatrix) -> float:
    """Max absolute row sum of G^t, an upper bound on its spectral radius."""
    return float(np.max(np.sum(np.abs(transform.matrix), axis=1)))


def spectrum(matrix: np.ndarray) -> np.ndarray:
    return linalg.eigvals(matrix)
