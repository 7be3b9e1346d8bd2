"""Module 4: Reverse-mode gradients.

Public API for backward passes through the recorded propagation tape, the
masked L1+L2 loss gradient, and finite-difference certification.
"""

from .backward import GradientBundle, StepCotangents, backward, backward_step
from .gradcheck import (
    DEFAULT_TOLERANCE,
    INPUT_CLASSES,
    GradcheckReport,
    check_bundle,
    gradcheck,
    numerical_gradient,
    relative_error,
)
from .loss import LossResult, loss_and_grad

__all__ = [
    "DEFAULT_TOLERANCE",
    "INPUT_CLASSES",
    "GradcheckReport",
    "GradientBundle",
    "LossResult",
    "StepCotangents",
    "backward",
    "backward_step",
    "check_bundle",
    "gradcheck",
    "loss_and_grad",
    "numerical_gradient",
    "relative_error",
]
