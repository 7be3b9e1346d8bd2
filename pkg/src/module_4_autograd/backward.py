"""Reverse-mode gradients of the N-step propagation.

Per pixel, one step is h' = Q / D + h_0 with Q = num - S*h_0 and
D = S' + eps, so for an upstream cotangent g:

    dh'/dh_nb   = pi*w / D
    dh'/dh_t    = pi_0 / D
    dh'/dh_0    = 1 - S / D
    dh'/dw      = pi*(h_nb - h_0) / D - Q/D^2 * pi*sign(w)
    dh'/dpi_k   = sum over ring k of  w*(h_nb - h_0) / D - Q/D^2 * |w|
    dh'/dpi_0   = (h_t - h_0) / D - Q/D^2

with sign(0) = 0. Everything comes from the tape; no forward step is rerun.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.module_1_propagation import PropagationTape
from src.shared import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StepCotangents:
    """Cotangents of one step's inputs."""

    d_h_t: np.ndarray   # [H, W]
    d_h0: np.ndarray    # [H, W], replacement term only
    d_aff: np.ndarray   # [K, H, W]
    d_attn: np.ndarray  # [R+1, H, W]


@dataclass(frozen=True, eq=False)
class GradientBundle:
    """Cotangents of the forward inputs; shapes mirror them."""

    d_h0: np.ndarray    # [H, W]
    d_aff: np.ndarray   # [K, H, W]
    d_attn: np.ndarray  # [T, R+1, H, W]

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(arr)) for arr in (self.d_h0, self.d_aff, self.d_attn))


def _check_differentiable(tape: PropagationTape) -> None:
    if tape.bundle.config.reference:
        raise ValidationError("reference mode (eps = 0) is not differentiable at S' = 0; use a config with eps > 0")


def backward_step(tape: PropagationTape, t: int, upstream: np.ndarray) -> StepCotangents:
    """Pull `upstream` (cotangent of h^{t+1}) back through step t."""
    _check_differentiable(tape)
    if not 0 <= t < tape.steps:
        raise ValidationError(f"tape has no step {t} (recorded steps: {tape.steps})")

    bundle = tape.bundle
    plan = bundle.plan
    spec = bundle.spec
    workspace = tape.workspaces[t]

    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != (bundle.height, bundle.width):
        raise ValidationError(f"upstream cotangent shape {g.shape} does not match grid {(bundle.height, bundle.width)}")

    h_t = tape.states[t].astype(np.float64)
    h_0 = tape.initial.astype(np.float64)
    weights = bundle.affinity.weights.astype(np.float64)
    attention = workspace.attention.astype(np.float64)
    gathered = workspace.gathered.astype(np.float64)
    s = workspace.s.astype(np.float64)
    denominator = workspace.denominator.astype(np.float64)

    pi_0 = attention[0]
    live = plan.mask.astype(np.float64)
    gates = attention[spec.slot_rings] * live
    gated = gates * weights
    numerator = pi_0 * h_t + np.sum(gated * gathered, axis=0)
    q = numerator - s * h_0

    g_over_d = g / denominator
    g_q_over_d2 = g * q / denominator**2
    lift = gathered - h_0

    # Each output pixel owns its per-slot terms; sources are merged afterwards.
    d_gathered = g_over_d * gated
    d_h_t = g_over_d * pi_0 + plan.scatter(d_gathered)
    d_h0 = g * (1.0 - s / denominator)
    d_aff = gates * (g_over_d * lift - g_q_over_d2 * np.sign(weights))

    per_slot = live * (g_over_d * weights * lift - g_q_over_d2 * np.abs(weights))
    d_attn = np.zeros_like(attention)
    start = 0
    for k, size in enumerate(spec.ring_sizes, start=1):
        d_attn[k] = np.sum(per_slot[start : start + size], axis=0)
        start += size
    if bundle.config.suppression:
        d_attn[0] = g_over_d * (h_t - h_0) - g_q_over_d2

    return StepCotangents(d_h_t=d_h_t, d_h0=d_h0, d_aff=d_aff, d_attn=d_attn)


def backward(tape: PropagationTape, upstream: np.ndarray) -> GradientBundle:
    """
    Reverse-accumulate from step N-1 down to 0.

    h_0 collects every step's replacement term plus the cotangent that
    reaches h^0 itself. Attention steps beyond N get zero cotangent.
    """
    _check_differentiable(tape)
    bundle = tape.bundle
    d_state = np.asarray(upstream, dtype=np.float64)
    d_h0 = np.zeros((bundle.height, bundle.width), dtype=np.float64)
    d_aff = np.zeros(bundle.affinity.weights.shape, dtype=np.float64)
    d_attn = np.zeros(bundle.attention.values.shape, dtype=np.float64)

    for t in reversed(range(tape.steps)):
        cotangents = backward_step(tape, t, d_state)
        d_attn[t] = cotangents.d_attn
        d_aff += cotangents.d_aff
        d_h0 += cotangents.d_h0
        d_state = cotangents.d_h_t
    d_h0 += d_state

    grads = GradientBundle(d_h0=d_h0, d_aff=d_aff, d_attn=d_attn)
    if not grads.is_finite():
        logger.warning("non-finite gradient produced by backward pass")
    return grads
