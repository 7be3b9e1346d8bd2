"""Depth-completion metrics over valid ground-truth pixels (gt > 0).

RMSE/MAE are reported in millimeters, iRMSE/iMAE in 1/km, REL unitless and
delta_tau as a percentage of evaluated pixels.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.shared import DepthGrid, ValidationError

if TYPE_CHECKING:
    from src.module_1_propagation import PropagationTape

logger = logging.getLogger(__name__)

GridLike = Union[DepthGrid, np.ndarray]

MM_PER_M = 1000.0
# 1/h in 1/m times 1000 gives 1/km.
INVERSE_KM_PER_M = 1000.0
DELTA_THRESHOLDS: Tuple[float, float, float] = (1.25, 1.25**2, 1.25**3)

COLUMNS = (
    "RMSE (mm)",
    "MAE (mm)",
    "iRMSE (1/km)",
    "iMAE (1/km)",
    "REL",
    "delta<1.25 (%)",
    "delta<1.25^2 (%)",
    "delta<1.25^3 (%)",
    "valid",
)


@dataclass(frozen=True)
class MetricsReport:
    rmse_mm: float
    mae_mm: float
    irmse: float
    imae: float
    rel: float
    delta: Tuple[float, float, float]
    valid_count: int

    def as_row(self) -> Dict[str, float]:
        values = (self.rmse_mm, self.mae_mm, self.irmse, self.imae, self.rel, *self.delta, self.valid_count)
        return dict(zip(COLUMNS, values))

    def to_frame(self, label: str = "pred") -> pd.DataFrame:
        return pd.DataFrame([self.as_row()], index=[label])

    def format_text(self, label: str = "pred") -> str:
        """Aligned table, one metric per column."""
        return self.to_frame(label).to_string(float_format=lambda x: f"{x:.4f}")

    def to_csv(self, path: Optional[Union[str, Path]] = None, label: str = "pred") -> str:
        text = self.to_frame(label).to_csv(index_label="run", float_format="%.6f", lineterminator="\n")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def _array(grid: GridLike) -> np.ndarray:
    return np.asarray(grid.values if isinstance(grid, DepthGrid) else grid, dtype=np.float64)


def valid_pairs(pred: GridLike, gt: GridLike) -> Tuple[np.ndarray, np.ndarray]:
    """Prediction and ground truth at gt > 0, as flat float64 arrays."""
    pred_arr = _array(pred)
    gt_arr = _array(gt)
    if pred_arr.shape != gt_arr.shape:
        raise ValidationError(f"pred shape {pred_arr.shape} does not match gt shape {gt_arr.shape}")
    valid = gt_arr > 0
    if not np.any(valid):
        raise ValidationError("no valid pixels: ground truth has no value > 0")
    return pred_arr[valid], gt_arr[valid]


def evaluate(pred: GridLike, gt: GridLike) -> MetricsReport:
    """
    All metrics of `pred` against `gt` over the pixels where gt > 0.

    Args:
        pred: predicted depth in meters, same shape as `gt`.
        gt: ground truth in meters; 0 marks a missing pixel.

    Returns:
        MetricsReport with RMSE/MAE in mm, iRMSE/iMAE in 1/km, REL and the
        three delta percentages.

    Raises:
        ValidationError: when the shapes differ or no pixel is valid, and
            when a valid pixel has a nonpositive prediction.
    """
    p, g = valid_pairs(pred, gt)
    nonpositive = int(np.count_nonzero(p <= 0))
    if nonpositive:
        raise ValidationError(
            f"nonpositive prediction at {nonpositive} of {p.size} evaluated pixel(s); inverse metrics undefined"
        )

    error_mm = (p - g) * MM_PER_M
    inverse_error = INVERSE_KM_PER_M / p - INVERSE_KM_PER_M / g
    ratio = np.maximum(p / g, g / p)

    return MetricsReport(
        rmse_mm=float(np.sqrt(np.mean(error_mm**2))),
        mae_mm=float(np.mean(np.abs(error_mm))),
        irmse=float(np.sqrt(np.mean(inverse_error**2))),
        imae=float(np.mean(np.abs(inverse_error))),
        rel=float(np.mean(np.abs(p - g) / g)),
        delta=tuple(float(100.0 * np.mean(ratio < tau)) for tau in DELTA_THRESHOLDS),
        valid_count=int(p.size),
    )


def rmse_mm(pred: GridLike, gt: GridLike) -> float:
    """RMSE alone; unlike `evaluate` it accepts nonpositive predictions."""
    p, g = valid_pairs(pred, gt)
    return float(np.sqrt(np.mean(((p - g) * MM_PER_M) ** 2)))


def rmse_curve(tape: Union["PropagationTape", np.ndarray], gt: GridLike) -> List[float]:
    """RMSE (mm) of every recorded state h^0..h^N: N+1 values."""
    states = tape.states if hasattr(tape, "states") else np.asarray(tape)
    curve = [rmse_mm(state, gt) for state in states]
    logger.debug("rmse curve: %s", ", ".join(f"{v:.2f}" for v in curve))
    return curve


def completion_loss(
    pred: GridLike,
    gt: GridLike,
    alpha: float = 1.0,
    beta: float = 1.0,
    rhos: Tuple[float, float] = (1.0, 2.0),
) -> float:
    """alpha*L_rho1 + beta*L_rho2, each the mean of |pred - gt|^rho over valid pixels."""
    p, g = valid_pairs(pred, gt)
    residual = np.abs(p - g)
    return float(alpha * np.mean(residual ** rhos[0]) + beta * np.mean(residual ** rhos[1]))
