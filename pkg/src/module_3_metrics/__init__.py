"""Module 3: Depth-completion metrics.

Public API: RMSE, MAE, iRMSE, iMAE, REL and delta thresholds over valid
ground-truth pixels, per-iteration RMSE curves and the masked L1+L2 loss value.
"""

from .evaluation import (
    COLUMNS,
    DELTA_THRESHOLDS,
    MetricsReport,
    completion_loss,
    evaluate,
    rmse_curve,
    rmse_mm,
    valid_pairs,
)

__all__ = [
    "COLUMNS",
    "DELTA_THRESHOLDS",
    "MetricsReport",
    "completion_loss",
    "evaluate",
    "rmse_curve",
    "rmse_mm",
    "valid_pairs",
]
