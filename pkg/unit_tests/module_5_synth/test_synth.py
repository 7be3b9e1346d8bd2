"""Unit tests for Module 5: synthetic scenes, sparsification, handcrafted affinity and attention schedules."""

import math

import numpy as np
import pytest

from src.module_5_synth import (
    AttentionSchedule,
    Curve,
    SceneKind,
    SceneSpec,
    build_synthetic_bundle,
    constant_schedule,
    default_sigma,
    edge_affinity,
    far_decay_schedule,
    generate_scene,
    guidance_edge_map,
    nearest_fill,
    sample_count,
    schedule_attention,
    sparsify,
)
from src.shared import DepthGrid, PropagationConfig, ValidationError, Variant, build_neighborhood


# -----------------------------------------------------------------------------
# Scenes
# -----------------------------------------------------------------------------


def test_step_edge_splits_at_half_width():
    """8x8 StepEdge (2, 5): columns 0-3 at 2.0, columns 4-7 at 5.0."""
    scene = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 8, 8, (2.0, 5.0), seed=0))
    depth = scene.gt.values
    np.testing.assert_array_equal(depth[:, :4], 2.0)
    np.testing.assert_array_equal(depth[:, 4:], 5.0)


def test_scenes_are_deterministic():
    """Same spec, same arrays."""
    for kind in SceneKind:
        spec = SceneSpec(kind, 16, 20, seed=3)
        a, b = generate_scene(spec), generate_scene(spec)
        np.testing.assert_array_equal(a.gt.values, b.gt.values)
        np.testing.assert_array_equal(a.guidance, b.guidance)


def test_scene_depth_is_positive_and_guidance_in_unit_range():
    """Every generator yields dense positive depth and guidance in [0, 1]."""
    for kind in SceneKind:
        scene = generate_scene(SceneSpec(kind, 24, 24, seed=1))
        assert scene.gt.valid_count() == 24 * 24
        assert scene.guidance.min() >= 0.0 and scene.guidance.max() <= 1.0


def test_slanted_planes_have_constant_gradients_per_region():
    """Inside each region the horizontal second difference vanishes."""
    scene = generate_scene(SceneSpec(SceneKind.SLANTED_PLANES, 32, 32, seed=5, guidance_noise=0.0))
    depth = scene.gt.values
    region = scene.guidance < 0.5
    same = (region[:, :-2] == region[:, 1:-1]) & (region[:, 1:-1] == region[:, 2:])
    second = depth[:, 2:] - 2 * depth[:, 1:-1] + depth[:, :-2]
    np.testing.assert_allclose(second[same], 0.0, atol=1e-12)


def test_step_edge_guidance_edge_matches_depth_edge():
    """Without noise the guidance steps exactly where the depth does."""
    scene = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 6, 10, guidance_noise=0.0))
    np.testing.assert_array_equal(scene.guidance[:, :5], 0.4)
    np.testing.assert_array_equal(scene.guidance[:, 5:], 0.6)


def test_scene_spec_rejects_bad_depth_range():
    """near must be below far and positive."""
    with pytest.raises(ValidationError, match="depth range"):
        SceneSpec(depth_range=(5.0, 2.0))


def test_scene_kind_accepts_strings():
    """Kinds coerce from their string values."""
    assert SceneSpec(kind="sphere_on_plane").kind is SceneKind.SPHERE_ON_PLANE


# -----------------------------------------------------------------------------
# Sparsification and fill
# -----------------------------------------------------------------------------


def test_sparsify_rate_one_is_identity():
    """rate = 1 keeps every valid pixel."""
    gt = generate_scene(SceneSpec(SceneKind.SPHERE_ON_PLANE, 12, 12)).gt
    np.testing.assert_array_equal(sparsify(gt, rate=1.0).values, gt.values)


def test_sparsify_exact_count_on_nyu_sized_grid():
    """count = 500 on 304x228 keeps exactly 500 samples."""
    gt = DepthGrid(np.full((228, 304), 3.0))
    sparse = sparsify(gt, count=500, seed=1)
    assert sparse.valid_count() == 500
    assert set(np.unique(sparse.values)) == {0.0, 3.0}


def test_sample_count_floors():
    """5% of 128x128 is 819 samples."""
    assert sample_count(128, 128, 0.05) == math.floor(0.05 * 128 * 128)
    assert sample_count(10, 10, 0.05) == 5


@pytest.mark.parametrize("rate", [0.0, -0.1, 1.5])
def test_sparsify_rejects_bad_rate(rate):
    """rate must lie in (0, 1]."""
    with pytest.raises(ValidationError, match="rate"):
        sparsify(np.ones((4, 4)), rate=rate)


def test_sparsify_needs_exactly_one_of_rate_or_count():
    """Giving both or neither is an error."""
    with pytest.raises(ValidationError, match="exactly one"):
        sparsify(np.ones((4, 4)), rate=None, count=None)
    with pytest.raises(ValidationError, match="exactly one"):
        sparsify(np.ones((4, 4)), rate=0.5, count=3)


def test_sparsify_only_samples_valid_pixels():
    """Count above the valid pixel count is refused."""
    gt = np.zeros((4, 4))
    gt[0, :2] = 1.0
    with pytest.raises(ValidationError, match="count"):
        sparsify(gt, count=3)


def test_sparsify_is_seeded():
    """Same seed, same samples; a different seed differs."""
    gt = np.full((16, 16), 2.0)
    a = sparsify(gt, rate=0.1, seed=4).values
    np.testing.assert_array_equal(a, sparsify(gt, rate=0.1, seed=4).values)
    assert not np.array_equal(a, sparsify(gt, rate=0.1, seed=5).values)


def test_nearest_fill_copies_closest_sample():
    """Each pixel takes its nearest valid neighbour's value."""
    sparse = np.zeros((1, 5))
    sparse[0, 0] = 1.0
    sparse[0, 4] = 9.0
    np.testing.assert_array_equal(nearest_fill(sparse).values[0, [0, 1, 3, 4]], [1.0, 1.0, 9.0, 9.0])


def test_nearest_fill_keeps_valid_pixels():
    """Samples survive the fill unchanged and nothing stays missing."""
    gt = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 16, 16)).gt
    sparse = sparsify(gt, rate=0.1, seed=2)
    filled = nearest_fill(sparse)
    mask = sparse.valid_mask()
    np.testing.assert_array_equal(filled.values[mask], sparse.values[mask])
    assert filled.valid_count() == 16 * 16


def test_nearest_fill_without_samples_is_an_error():
    """An all-missing map cannot be filled."""
    with pytest.raises(ValidationError, match="no valid pixels"):
        nearest_fill(np.zeros((3, 3)))


# -----------------------------------------------------------------------------
# Handcrafted affinity
# -----------------------------------------------------------------------------


def test_constant_guidance_gives_unit_affinity():
    """No intensity change: w = 1 on every in-bounds slot, 0 elsewhere."""
    spec = build_neighborhood(Variant.RING_7X7, 5, 5)
    weights = edge_affinity(np.full((5, 5), 0.3), spec, sigma=0.1).weights
    assert weights[:8, 2, 2].tolist() == [1.0] * 8
    assert np.count_nonzero(weights[:8, 0, 0]) == 3


def test_affinity_at_one_sigma_is_inverse_e():
    """|dI| = sigma gives exp(-1)."""
    guidance = np.array([[0.0, 0.2]])
    spec = build_neighborhood(Variant.DILATED, 1, 2)
    weights = edge_affinity(guidance, spec, sigma=0.2).weights
    live = weights[:8, 0, 0][weights[:8, 0, 0] > 0]
    assert live.tolist() == pytest.approx([math.exp(-1.0)])


def test_large_sigma_flattens_affinity():
    """sigma >> dI drives every live weight towards 1."""
    spec = build_neighborhood(Variant.RING_7X7, 6, 6)
    guidance = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 6, 6)).guidance
    weights = edge_affinity(guidance, spec, sigma=1e6).weights
    live = weights[weights > 0]
    np.testing.assert_allclose(live, 1.0, atol=1e-5)


def test_affinity_rejects_nonpositive_sigma():
    """sigma must be > 0."""
    spec = build_neighborhood(Variant.DILATED, 3, 3)
    with pytest.raises(ValidationError, match="sigma"):
        edge_affinity(np.ones((3, 3)), spec, sigma=0.0)


def test_default_sigma_is_fraction_of_range():
    """Default sigma is 10% of the guidance dynamic range; flat guidance falls back to 1."""
    assert default_sigma(np.array([[0.2, 0.7]])) == pytest.approx(0.05)
    assert default_sigma(np.full((2, 2), 0.5)) == 1.0


# -----------------------------------------------------------------------------
# Attention schedules
# -----------------------------------------------------------------------------


def test_constant_schedule_is_all_ones():
    """constant_schedule() reproduces the CSPN stack."""
    spec = build_neighborhood(Variant.RING_7X7, 4, 4)
    values = schedule_attention(constant_schedule(), 6, spec).values
    assert values.shape == (6, 4, 4, 4)
    np.testing.assert_array_equal(values, 1.0)


def test_far_decay_far_ring_below_near_ring_at_last_step():
    """At t = T-1 ring 3 attention is below ring 1."""
    spec = build_neighborhood(Variant.RING_7X7, 3, 3)
    values = schedule_attention(far_decay_schedule(), 6, spec).values
    assert values[-1, 3, 0, 0] < values[-1, 1, 0, 0]


def test_far_decay_self_attention_non_decreasing():
    """pi_0 never shrinks from step to step."""
    spec = build_neighborhood(Variant.DILATED, 3, 3)
    pi_0 = schedule_attention(far_decay_schedule(), 12, spec).values[:, 0, 0, 0]
    assert np.all(np.diff(pi_0) >= 0)
    assert pi_0.max() <= 1.0


def test_outer_rings_reuse_last_curve():
    """A single-curve schedule drives every ring."""
    schedule = AttentionSchedule(Curve(1.0, 1.0), (Curve(0.5, 0.5),))
    assert schedule.curve_for(3) == Curve(0.5, 0.5)
    assert schedule.curve_for(0) == Curve(1.0, 1.0)


def test_curve_values_are_clamped():
    """Growth beyond 1 is clipped."""
    assert Curve(0.5, 3.0).value(2) == 1.0
    assert Curve(0.8, 0.5).value(1) == pytest.approx(0.4)


def test_edge_map_suppresses_far_rings_only():
    """Ring 1 ignores the edge map; rings 2+ are scaled by 1 - edge."""
    spec = build_neighborhood(Variant.RING_7X7, 3, 3)
    edges = np.zeros((3, 3))
    edges[1, 1] = 1.0
    values = schedule_attention(constant_schedule().with_edge_map(edges), 2, spec).values
    assert values[0, 1, 1, 1] == 1.0
    assert values[0, 2, 1, 1] == 0.0
    assert values[0, 2, 0, 0] == 1.0


def test_guidance_edge_map_peaks_at_edge():
    """The step-edge gradient is largest at the split."""
    guidance = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 4, 8, guidance_noise=0.0)).guidance
    edges = guidance_edge_map(guidance, smoothing=0.0)
    assert edges.max() == 1.0
    assert edges[0, 3] == 1.0 and edges[0, 0] == 0.0


def test_smoothed_edge_map_finds_the_split_through_noise():
    """With noisy guidance the smoothed map is several times stronger on the split than inside the planes."""
    guidance = generate_scene(SceneSpec(SceneKind.STEP_EDGE, 32, 32, guidance_noise=0.08)).guidance
    edges = guidance_edge_map(guidance)
    assert 0.0 <= edges.min() and edges.max() == pytest.approx(1.0)
    assert edges[:, 15:17].mean() > 2.0 * edges[:, 2:10].mean()


def test_edge_map_rejects_negative_smoothing():
    """Smoothing is a Gaussian sigma."""
    with pytest.raises(ValidationError, match="smoothing"):
        guidance_edge_map(np.zeros((3, 3)), smoothing=-1.0)


def test_with_edge_map_marks_the_schedule_name():
    """Edge-modulated schedules say so in their name."""
    assert far_decay_schedule().with_edge_map(np.zeros((2, 2))).name == "far_decay+edges"


def test_schedule_rejects_zero_steps():
    """At least one step is required."""
    with pytest.raises(ValidationError, match="steps"):
        schedule_attention(constant_schedule(), 0, build_neighborhood(Variant.DILATED, 2, 2))


# -----------------------------------------------------------------------------
# Pipeline
# -----------------------------------------------------------------------------


@pytest.mark.parametrize("variant", [Variant.RING_7X7, Variant.DILATED, Variant.DEFORMABLE])
def test_synthetic_bundle_is_consistent(variant):
    """The pipeline yields a validated bundle with a dense initial depth."""
    synthetic = build_synthetic_bundle(variant, SceneSpec(height=16, width=16, seed=2), config=PropagationConfig(steps=4))
    bundle = synthetic.bundle
    assert bundle.attention.steps == 4
    assert bundle.depth.valid_count() == 16 * 16
    assert synthetic.sparse.valid_count() == sample_count(16, 16, 0.05)


def test_synthetic_bundle_count_overrides_rate():
    """An explicit count wins over the default rate."""
    synthetic = build_synthetic_bundle(Variant.DILATED, SceneSpec(height=16, width=16), count=7)
    assert synthetic.sparse.valid_count() == 7
