"""Kernel-vs-oracle sweep over seed-fixed random bundles."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from src.module_1_propagation import propagate_bundle
from src.shared import Precision, PropagationConfig, Variant, random_bundle

from .dense import oracle_trajectory

logger = logging.getLogger(__name__)

# Absolute tolerance in f64, relative tolerance in f32.
F64_TOLERANCE = 1e-10
F32_TOLERANCE = 1e-4


@dataclass(frozen=True)
class EquivalenceReport:
    variant: Variant
    trials: int
    max_abs_diff: float
    max_rel_diff: float
    tolerance: float
    precision: Precision

    @property
    def passed(self) -> bool:
        measured = self.max_abs_diff if self.precision is Precision.F64 else self.max_rel_diff
        return measured <= self.tolerance

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.variant.value}: {self.trials} bundle(s), max-abs-diff={self.max_abs_diff:.3e}, "
            f"max-rel-diff={self.max_rel_diff:.3e}, tolerance={self.tolerance:.0e} -> {status}"
        )


def compare_once(
    variant: Variant,
    height: int,
    width: int,
    steps: int,
    seed: int,
    config: Optional[PropagationConfig] = None,
) -> tuple[float, float]:
    """(max abs diff, max rel diff) between kernel and oracle on one random bundle."""
    config = replace(config or PropagationConfig(), steps=steps)
    bundle = random_bundle(variant, height, width, seed=seed, config=config, integral_offsets=True)
    kernel_states = propagate_bundle(bundle).states
    oracle_states = oracle_trajectory(bundle.depth, bundle.affinity, bundle.attention, bundle.spec, config)
    diff = np.abs(kernel_states.astype(np.float64) - oracle_states.astype(np.float64))
    scale = np.maximum(np.abs(oracle_states.astype(np.float64)), 1.0)
    return float(diff.max()), float((diff / scale).max())


def equivalence_report(
    variant: Variant,
    sizes: Sequence[tuple[int, int]] = ((8, 8),),
    steps: Iterable[int] = (6,),
    seeds: Iterable[int] = (0,),
    config: Optional[PropagationConfig] = None,
) -> EquivalenceReport:
    """Sweep sizes × steps × seeds and keep the worst difference."""
    config = config or PropagationConfig()
    variant = Variant(variant)
    worst_abs = 0.0
    worst_rel = 0.0
    trials = 0
    for height, width in sizes:
        for n_steps in steps:
            for seed in seeds:
                abs_diff, rel_diff = compare_once(variant, height, width, n_steps, seed, config)
                worst_abs = max(worst_abs, abs_diff)
                worst_rel = max(worst_rel, rel_diff)
                trials += 1
    tolerance = F64_TOLERANCE if config.precision is Precision.F64 else F32_TOLERANCE
    report = EquivalenceReport(variant, trials, worst_abs, worst_rel, tolerance, config.precision)
    logger.info(report.summary())
    return report
