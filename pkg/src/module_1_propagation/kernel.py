"""Decoupled DySPN kernel: neighbour gather, one-step update, N-step driver, CSPN emulation.

One step, per pixel (i, j):

    S  = pi_0 + sum_k sum_{slots in ring k} mask * pi_k * w
    S' = pi_0 + sum_k sum_{slots in ring k} mask * pi_k * |w|
    h' = (sum mask*pi_k*w*h_nb + pi_0*h_t) / D + (1 - S / D) * h_0,   D = S' + eps

Every coefficient is divided by D before it multiplies a value, so the
suppression fixed point (pi_k = 0 for k >= 1 gives h' = h_t) holds bit-exactly
in reference mode.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Optional, Tuple, Union

import numpy as np

from src.shared import (
    AffinityVolume,
    AttentionStack,
    DepthGrid,
    NeighborhoodSpec,
    PropagationConfig,
    SamplingPlan,
    ValidatedBundle,
    ValidationError,
    sampling_plan,
    validate_bundle,
)

from .tape import PropagationTape, StepWorkspace

logger = logging.getLogger(__name__)

GridLike = Union[DepthGrid, np.ndarray]


def _values(grid: GridLike) -> np.ndarray:
    return grid.values if isinstance(grid, DepthGrid) else np.asarray(grid)


def effective_attention(attn_t: np.ndarray, cfg: PropagationConfig) -> np.ndarray:
    """Attention slice [R+1, H, W] as the kernel uses it; pi_0 is pinned to 1 when suppression is off."""
    if cfg.suppression:
        return attn_t
    pinned = np.array(attn_t, copy=True)
    pinned[0] = 1.0
    return pinned


def gather_neighbors(h_t: GridLike, spec: NeighborhoodSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Neighbour values [K, H, W] of every pixel plus the in-bounds mask [K, H, W].

    Fractional (deformable) offsets are read by bilinear interpolation;
    out-of-bounds samples are 0 with mask 0.
    """
    plan = sampling_plan(spec)
    return plan.sample(_values(h_t)), plan.mask.copy()


# -----------------------------------------------------------------------------
# Step
# -----------------------------------------------------------------------------


def _row_blocks(height: int, threads: int) -> List[slice]:
    bounds = np.linspace(0, height, min(threads, height) + 1).astype(int)
    return [slice(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _step_rows(
    plan: SamplingPlan,
    slot_rings: np.ndarray,
    h_t: np.ndarray,
    h_0: np.ndarray,
    weights: np.ndarray,
    attn_t: np.ndarray,
    guard: float,
    rows: slice,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Update the pixels in `rows`; reads h_t everywhere, writes nothing shared."""
    gathered = plan.sample(h_t, rows)
    mask = plan.mask[:, rows]
    w = weights[:, rows]
    pi_0 = attn_t[0, rows]

    gated = np.empty_like(gathered)
    s = pi_0.copy()
    s_prime = pi_0.copy()
    for slot in range(plan.neighbor_count):
        gate = attn_t[slot_rings[slot], rows] * mask[slot]
        gated[slot] = gate * w[slot]
        s = s + gated[slot]
        s_prime = s_prime + gate * np.abs(w[slot])

    denominator = s_prime + guard
    safe = denominator > 0
    zeros = np.zeros_like(denominator)

    def normalised(numerator: np.ndarray) -> np.ndarray:
        return np.divide(numerator, denominator, out=zeros.copy(), where=safe)

    out = normalised(pi_0) * h_t[rows]
    for slot in range(plan.neighbor_count):
        out = out + normalised(gated[slot]) * gathered[slot]
    out = out + (1 - normalised(s)) * h_0[rows]
    return out, gathered, s, s_prime, denominator


def _step_arrays(
    bundle: ValidatedBundle,
    h_t: np.ndarray,
    h_0: np.ndarray,
    attn_t: np.ndarray,
) -> Tuple[np.ndarray, StepWorkspace]:
    cfg = bundle.config
    dtype = cfg.dtype
    h_t = np.asarray(h_t, dtype=dtype)
    h_0 = np.asarray(h_0, dtype=dtype)
    weights = np.asarray(bundle.affinity.weights, dtype=dtype)
    attn_t = effective_attention(np.asarray(attn_t, dtype=dtype), cfg)
    slot_rings = bundle.spec.slot_rings
    guard = dtype.type(cfg.denominator_guard)

    blocks = _row_blocks(bundle.height, cfg.threads)
    args = (bundle.plan, slot_rings, h_t, h_0, weights, attn_t, guard)
    if len(blocks) == 1:
        parts = [_step_rows(*args, blocks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(lambda rows: _step_rows(*args, rows), blocks))

    out = np.concatenate([p[0] for p in parts], axis=0)
    workspace = StepWorkspace(
        gathered=np.concatenate([p[1] for p in parts], axis=1),
        attention=attn_t,
        s=np.concatenate([p[2] for p in parts], axis=0),
        s_prime=np.concatenate([p[3] for p in parts], axis=0),
        denominator=np.concatenate([p[4] for p in parts], axis=0),
    )
    return out, workspace


def step(
    h_t: GridLike,
    h_0: GridLike,
    aff: AffinityVolume,
    attn_t: np.ndarray,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
) -> DepthGrid:
    """One propagation step h_t -> h_{t+1} with attention slice attn_t [R+1, H, W]."""
    cfg = cfg or PropagationConfig()
    attn_t = np.asarray(attn_t)
    bundle = validate_bundle(_values(h_0), aff, AttentionStack(attn_t[None]), spec, replace(cfg, steps=1))
    current = _values(h_t)
    if current.shape != (spec.height, spec.width):
        raise ValidationError(
            f"h_t shape: expected (height, width) = {(spec.height, spec.width)}, got {current.shape}"
        )
    out, _ = _step_arrays(bundle, current, bundle.depth.values, attn_t)
    return DepthGrid.from_refined(out)


# -----------------------------------------------------------------------------
# Drivers
# -----------------------------------------------------------------------------


def propagate_bundle(bundle: ValidatedBundle) -> PropagationTape:
    """Run cfg.steps steps on a validated bundle, recording the tape."""
    cfg = bundle.config
    h_0 = np.asarray(bundle.depth.values, dtype=cfg.dtype)
    states = [h_0]
    workspaces = []
    for t in range(cfg.steps):
        h_next, workspace = _step_arrays(bundle, states[-1], h_0, bundle.attention.at_step(t))
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("step %d: mean |dh| = %.6g", t, float(np.mean(np.abs(h_next - states[-1]))))
        states.append(h_next)
        workspaces.append(workspace)

    stacked = np.stack(states)
    stacked.setflags(write=False)
    return PropagationTape(states=stacked, workspaces=tuple(workspaces), bundle=bundle)


def propagate(
    h_0: GridLike,
    aff: AffinityVolume,
    attn: AttentionStack,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
) -> Tuple[DepthGrid, PropagationTape]:
    """
    Apply `step` cfg.steps times; h_0 stays the replacement source throughout.

    Args:
        h_0: initial dense depth [H, W].
        aff: affinity volume [K, H, W], reused at every step.
        attn: attention stack [T, R+1, H, W] with T >= cfg.steps.
        spec: neighbourhood layout matching the grid.
        cfg: step count, precision, guard and thread settings.

    Returns:
        The refined grid h_N (negatives clamped to missing) and the tape
        h_0..h_N for the backward pass.
    """
    bundle = validate_bundle(_values(h_0), aff, attn, spec, cfg)
    tape = propagate_bundle(bundle)
    return DepthGrid.from_refined(tape.final), tape


def emulate_cspn(
    h_0: GridLike,
    aff: AffinityVolume,
    spec: NeighborhoodSpec,
    cfg: Optional[PropagationConfig] = None,
) -> DepthGrid:
    """Fixed-affinity baseline: propagate with every attention value set to 1."""
    cfg = cfg or PropagationConfig()
    depth = _values(h_0)
    ones = AttentionStack.filled(cfg.steps, spec.ring_count, depth.shape[0], depth.shape[1], 1.0)
    refined, _ = propagate(depth, aff, ones, spec, cfg)
    return refined
