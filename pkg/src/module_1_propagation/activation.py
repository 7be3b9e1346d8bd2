"""Attention activations (sigmoid per value, softmax across rings) and their vector-Jacobian products.

The kernel consumes post-activation attention; these helpers turn raw logits
[T, R+1, H, W] into an AttentionStack and carry cotangents back to the logits.
"""

from __future__ import annotations

from enum import Enum
from typing import Union

import numpy as np
from scipy.special import expit, logit, softmax

from src.shared import AttentionStack, ValidationError

# Ring axis of a [T, R+1, H, W] stack.
RING_AXIS = 1


class Activation(str, Enum):
    IDENTITY = "identity"
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"


def _coerce(kind: Union[Activation, str]) -> Activation:
    try:
        return Activation(kind)
    except ValueError:
        raise ValidationError(f"unknown activation {kind!r}") from None


def activate(logits: np.ndarray, kind: Union[Activation, str] = Activation.SIGMOID) -> AttentionStack:
    """Activate logits [T, R+1, H, W] into attention in [0, 1]."""
    kind = _coerce(kind)
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 4:
        raise ValidationError(f"attention logits: expected 4 dims (steps, rings, height, width), got {logits.shape}")
    if kind is Activation.SIGMOID:
        return AttentionStack(expit(logits))
    if kind is Activation.SOFTMAX:
        return AttentionStack(softmax(logits, axis=RING_AXIS))
    return AttentionStack(np.clip(logits, 0.0, 1.0))


def activation_vjp(
    activated: np.ndarray,
    upstream: np.ndarray,
    kind: Union[Activation, str] = Activation.SIGMOID,
) -> np.ndarray:
    """Pull a cotangent on the activated attention back to the logits."""
    kind = _coerce(kind)
    if kind is Activation.SIGMOID:
        return sigmoid_vjp(activated, upstream)
    if kind is Activation.SOFTMAX:
        return softmax_vjp(activated, upstream)
    return np.asarray(upstream, dtype=np.float64)


def sigmoid_vjp(activated: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    return upstream * activated * (1.0 - activated)


def softmax_vjp(activated: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    inner = np.sum(upstream * activated, axis=RING_AXIS, keepdims=True)
    return activated * (upstream - inner)


def attention_logits(attention: np.ndarray, margin: float = 1e-6) -> np.ndarray:
    """Inverse sigmoid of attention values, clipped away from 0 and 1."""
    return logit(np.clip(np.asarray(attention, dtype=np.float64), margin, 1.0 - margin))
