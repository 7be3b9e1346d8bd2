"""Masked L1 + L2 training loss and its gradient with respect to h_N."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.module_3_metrics import completion_loss
from src.shared import DepthGrid, ValidationError

GridLike = Union[DepthGrid, np.ndarray]


@dataclass(frozen=True, eq=False)
class LossResult:
    loss: float
    d_hN: np.ndarray
    valid_count: int


def _array(grid: GridLike) -> np.ndarray:
    return np.asarray(grid.values if isinstance(grid, DepthGrid) else grid, dtype=np.float64)


def _power_grad(residual: np.ndarray, rho: float) -> np.ndarray:
    """d|r|^rho / dr with the subgradient 0 at r = 0."""
    magnitude = np.abs(residual)
    safe = np.where(magnitude > 0, magnitude, 1.0)
    return np.where(magnitude > 0, rho * safe ** (rho - 1) * np.sign(residual), 0.0)


def loss_and_grad(
    h_N: GridLike,
    h_gt: GridLike,
    alpha: float = 1.0,
    beta: float = 1.0,
    rhos: Tuple[float, float] = (1.0, 2.0),
) -> LossResult:
    """
    Loss = alpha*L_rho1 + beta*L_rho2 over pixels with h_gt > 0, each term
    averaged by the valid count. L2 here is the mean square, not its root.
    The gradient is zero at invalid pixels.
    """
    pred = _array(h_N)
    gt = _array(h_gt)
    if pred.shape != gt.shape:
        raise ValidationError(f"h_N shape {pred.shape} does not match h_gt shape {gt.shape}")
    valid = gt > 0
    count = int(np.count_nonzero(valid))
    if count == 0:
        raise ValidationError("no valid pixels: ground truth has no value > 0")

    loss = completion_loss(pred, gt, alpha, beta, rhos)
    residual = np.where(valid, pred - gt, 0.0)
    grad = (alpha * _power_grad(residual, rhos[0]) + beta * _power_grad(residual, rhos[1])) / count
    grad = np.where(valid, grad, 0.0)
    return LossResult(loss=loss, d_hN=grad, valid_count=count)
