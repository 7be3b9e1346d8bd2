"""Finite-difference certification of the analytic gradients.

The objective is the linear functional <c, h_N> for a fixed random cotangent
c, so the analytic side is simply backward(tape, c).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from src.module_1_propagation import propagate_bundle
from src.shared import (
    AffinityVolume,
    AttentionStack,
    DepthGrid,
    Precision,
    PropagationConfig,
    ValidatedBundle,
    Variant,
    random_bundle,
)

from .backward import GradientBundle, backward

logger = logging.getLogger(__name__)

INPUT_CLASSES = ("h0", "aff", "attn")
DEFAULT_TOLERANCE = 1e-5
# Keeps |w| and attention away from the sign(0) kink and the [0, 1] edges.
KINK_MARGIN = 1e-3


def numerical_gradient(
    func: Callable[[np.ndarray], float],
    x: np.ndarray,
    step_scale: float = 1e-6,
) -> np.ndarray:
    """Central differences, step = step_scale * max(1, |x_i|) per entry."""
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    for i in range(x.size):
        original = x.flat[i]
        h = step_scale * max(1.0, abs(original))
        x.flat[i] = original + h
        f_plus = func(x)
        x.flat[i] = original - h
        f_minus = func(x)
        x.flat[i] = original
        grad.flat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Norm-wise relative error: max|a - n| / max|n|."""
    scale = max(float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


def _objective(bundle: ValidatedBundle, cotangent: np.ndarray) -> float:
    return float(np.sum(cotangent * propagate_bundle(bundle).final))


def check_bundle(bundle: ValidatedBundle, cotangent: np.ndarray) -> Dict[str, float]:
    """Per-input-class relative error of backward() against central differences."""
    grads: GradientBundle = backward(propagate_bundle(bundle), cotangent)
    steps = bundle.config.steps

    def with_depth(x: np.ndarray) -> float:
        return _objective(replace(bundle, depth=DepthGrid(x)), cotangent)

    def with_affinity(x: np.ndarray) -> float:
        return _objective(replace(bundle, affinity=AffinityVolume(x)), cotangent)

    def with_attention(x: np.ndarray) -> float:
        full = np.array(bundle.attention.values, dtype=np.float64, copy=True)
        full[:steps] = x
        return _objective(replace(bundle, attention=AttentionStack(full)), cotangent)

    return {
        "h0": relative_error(grads.d_h0, numerical_gradient(with_depth, bundle.depth.values)),
        "aff": relative_error(grads.d_aff, numerical_gradient(with_affinity, bundle.affinity.weights)),
        "attn": relative_error(
            grads.d_attn[:steps], numerical_gradient(with_attention, bundle.attention.values[:steps])
        ),
    }


@dataclass(frozen=True)
class GradcheckReport:
    variant: Variant
    steps: int
    seeds: int
    errors: Dict[str, float] = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return all(err <= self.tolerance for err in self.errors.values())

    def summary(self) -> str:
        parts = ", ".join(f"{name}={self.errors[name]:.2e}" for name in INPUT_CLASSES if name in self.errors)
        status = "PASS" if self.passed else "FAIL"
        return f"{self.variant.value} N={self.steps} seeds={self.seeds}: {parts} (tol {self.tolerance:.0e}) -> {status}"


def gradcheck(
    variant: Variant,
    height: int = 5,
    width: int = 5,
    steps: int = 1,
    seeds: Iterable[int] = (0,),
    tolerance: float = DEFAULT_TOLERANCE,
    config: Optional[PropagationConfig] = None,
) -> GradcheckReport:
    """Worst per-class error over random bundles; always runs in f64."""
    variant = Variant(variant)
    config = replace(config or PropagationConfig(), steps=steps, precision=Precision.F64, reference=False)
    worst = {name: 0.0 for name in INPUT_CLASSES}
    count = 0
    for seed in seeds:
        bundle = random_bundle(
            variant,
            height,
            width,
            seed=seed,
            config=config,
            weight_margin=KINK_MARGIN,
            attention_margin=KINK_MARGIN,
        )
        cotangent = np.random.default_rng(seed + 10_000).normal(size=(height, width))
        for name, err in check_bundle(bundle, cotangent).items():
            worst[name] = max(worst[name], err)
        count += 1
    report = GradcheckReport(variant, steps, count, worst, tolerance)
    logger.info(report.summary())
    return report
