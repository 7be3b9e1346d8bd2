"""Module 1: Decoupled DySPN propagation.

Public API for the fast stencil kernel: neighbour gather, one-step update,
N-step driver with tape, CSPN emulation, and attention activation helpers.
"""

from .activation import (
    Activation,
    activate,
    activation_vjp,
    attention_logits,
    sigmoid_vjp,
    softmax_vjp,
)
from .kernel import (
    effective_attention,
    emulate_cspn,
    gather_neighbors,
    propagate,
    propagate_bundle,
    step,
)
from .tape import PropagationTape, StepWorkspace

__all__ = [
    "Activation",
    "PropagationTape",
    "StepWorkspace",
    "activate",
    "activation_vjp",
    "attention_logits",
    "effective_attention",
    "emulate_cspn",
    "gather_neighbors",
    "propagate",
    "propagate_bundle",
    "sigmoid_vjp",
    "softmax_vjp",
    "step",
]
