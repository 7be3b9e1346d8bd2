# Integration tests: Module 1 + 3 + 5
"""Integration tests: Module 1 (Propagation) + Module 3 (Metrics) + Module 5 (Synthetic scenes)."""

import numpy as np
import pytest

from src.module_1_propagation import propagate_bundle
from src.module_3_metrics import evaluate, rmse_curve
from src.module_5_synth import SceneKind, SceneSpec, build_synthetic_bundle, constant_schedule
from src.shared import DepthGrid, PropagationConfig, Variant


@pytest.mark.parametrize("kind", list(SceneKind))
def test_propagation_keeps_depth_within_scene_range(kind):
    """Nonnegative handcrafted weights keep refined depth inside the ground-truth range."""
    synthetic = build_synthetic_bundle(Variant.RING_7X7, SceneSpec(kind, 32, 32, seed=4), rate=0.1)
    refined = propagate_bundle(synthetic.bundle).final
    gt = synthetic.gt.values
    assert refined.min() >= gt.min() - 1e-9
    assert refined.max() <= gt.max() + 1e-9


def test_rmse_curve_starts_at_nearest_fill_error():
    """Point 0 of the curve is the RMSE of h_0."""
    synthetic = build_synthetic_bundle(Variant.DILATED, SceneSpec(height=32, width=32, seed=1), rate=0.1)
    tape = propagate_bundle(synthetic.bundle)
    curve = rmse_curve(tape, synthetic.gt)
    assert len(curve) == synthetic.bundle.config.steps + 1
    assert curve[0] == pytest.approx(evaluate(synthetic.bundle.depth, synthetic.gt).rmse_mm)


def test_propagation_improves_on_nearest_fill():
    """Edge-aware propagation lowers RMSE below the nearest-fill input on a step edge."""
    synthetic = build_synthetic_bundle(Variant.RING_7X7, SceneSpec(height=64, width=64, seed=7), rate=0.05)
    refined = DepthGrid.from_refined(propagate_bundle(synthetic.bundle).final)
    assert evaluate(refined, synthetic.gt).rmse_mm < evaluate(synthetic.bundle.depth, synthetic.gt).rmse_mm


def test_zero_attention_leaves_metrics_unchanged():
    """pi = 0 everywhere gives h_N = h_0, so the metrics match the input exactly."""
    config = PropagationConfig(steps=3)
    synthetic = build_synthetic_bundle(
        Variant.RING_7X7, SceneSpec(height=16, width=16), rate=0.1, schedule=constant_schedule(0.0), config=config
    )
    refined = propagate_bundle(synthetic.bundle).final
    np.testing.assert_array_equal(refined, synthetic.bundle.depth.values)
    assert evaluate(refined, synthetic.gt) == evaluate(synthetic.bundle.depth, synthetic.gt)
