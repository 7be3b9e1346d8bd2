"""Throughput benchmark and the synthetic ablation study behind `bench` and `ablation`."""

from __future__ import annotations

import logging
import time
from dataclasses import replace
from typing import Dict, List, Optional

import pandas as pd

from src.module_1_propagation import Activation, activate, attention_logits, emulate_cspn, propagate_bundle
from src.module_3_metrics import evaluate
from src.module_5_synth import (
    SceneKind,
    SceneSpec,
    build_synthetic_bundle,
    far_decay_schedule,
    guidance_edge_map,
    schedule_attention,
)
from src.shared import DepthGrid, PropagationConfig, Variant, random_bundle, sampling_plan

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Benchmark
# -----------------------------------------------------------------------------


def run_bench(
    height: int = 128,
    width: int = 128,
    steps: int = 6,
    repeats: int = 3,
    threads: int = 1,
    seed: int = 0,
) -> pd.DataFrame:
    """Steps per second for each variant on the same grid size, fastest first."""
    config = PropagationConfig(steps=steps, threads=threads)
    rows: List[Dict[str, object]] = []
    for variant in Variant:
        bundle = random_bundle(variant, height, width, seed=seed, config=config)
        plan = sampling_plan(bundle.spec)
        propagate_bundle(bundle)  # warm-up
        start = time.perf_counter()
        for _ in range(repeats):
            propagate_bundle(bundle)
        elapsed = time.perf_counter() - start
        rows.append(
            {
                "variant": variant.value,
                "neighbours": bundle.spec.neighbor_count,
                "reads/pixel": plan.neighbor_count * plan.corners,
                "ms/step": 1000.0 * elapsed / (steps * repeats),
                "steps/sec": steps * repeats / elapsed,
            }
        )
        logger.debug("bench %s: %.3f s for %d x %d steps", variant.value, elapsed, repeats, steps)
    return pd.DataFrame(rows).sort_values("steps/sec", ascending=False).reset_index(drop=True)


# -----------------------------------------------------------------------------
# Ablation
# -----------------------------------------------------------------------------


def _row(label: str, refined: DepthGrid, gt: DepthGrid) -> Dict[str, object]:
    report = evaluate(refined, gt)
    return {"run": label, "RMSE (mm)": report.rmse_mm, "MAE (mm)": report.mae_mm}


def run_ablation(
    variant: Variant = Variant.RING_7X7,
    scene: Optional[SceneSpec] = None,
    rate: float = 0.05,
    sigma: Optional[float] = None,
) -> pd.DataFrame:
    """
    CSPN against DySPN on one synthetic scene, all rows sharing h_0 and affinity.

    Rows: the nearest-fill input, CSPN at 6 and 12 steps, DySPN (far-decay
    attention through a sigmoid) at 6 and 12 steps, the same attention
    through a softmax across rings, DySPN with the far rings dimmed along
    guidance edges, and DySPN without diffusion suppression.

    Args:
        variant: neighbourhood layout shared by every row.
        scene: synthetic scene, a 128x128 step edge by default.
        rate: sparse sample fraction.
        sigma: affinity sigma, default 0.1 of the guidance range.

    Returns:
        DataFrame indexed by run label with RMSE and MAE in millimetres.
    """
    scene = scene or SceneSpec(kind=SceneKind.STEP_EDGE, height=128, width=128)
    long_run = build_synthetic_bundle(variant, scene, rate=rate, sigma=sigma, config=PropagationConfig(steps=12))
    gt = long_run.gt
    bundle12 = long_run.bundle
    bundle6 = bundle12.with_config(replace(bundle12.config, steps=6))
    logits = attention_logits(bundle12.attention.values)

    rows = [_row("initial (nearest fill)", bundle12.depth, gt)]
    for steps in (6, 12):
        cspn = emulate_cspn(bundle12.depth, bundle12.affinity, bundle12.spec, replace(bundle12.config, steps=steps))
        rows.append(_row(f"CSPN N={steps}", cspn, gt))
    for steps, bundle in ((6, bundle6), (12, bundle12)):
        sigmoid = bundle.with_attention(activate(logits, Activation.SIGMOID))
        rows.append(_row(f"DySPN sigmoid N={steps}", DepthGrid.from_refined(propagate_bundle(sigmoid).final), gt))

    softmax = bundle6.with_attention(activate(logits, Activation.SOFTMAX))
    rows.append(_row("DySPN softmax N=6", DepthGrid.from_refined(propagate_bundle(softmax).final), gt))

    edge_schedule = far_decay_schedule().with_edge_map(guidance_edge_map(long_run.guidance))
    edge_aware = bundle6.with_attention(schedule_attention(edge_schedule, 6, bundle6.spec))
    rows.append(_row("DySPN N=6 edge-aware", DepthGrid.from_refined(propagate_bundle(edge_aware).final), gt))

    no_ds = bundle6.with_config(replace(bundle6.config, suppression=False))
    rows.append(_row("DySPN sigmoid N=6 without DS", DepthGrid.from_refined(propagate_bundle(no_ds).final), gt))
    return pd.DataFrame(rows).set_index("run")
