"""Unit tests for Module 1: neighbour gather, one-step update, N-step driver, activations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.module_1_propagation import (
    Activation,
    activate,
    activation_vjp,
    attention_logits,
    effective_attention,
    emulate_cspn,
    gather_neighbors,
    propagate,
    propagate_bundle,
    step,
)
from src.shared import (
    AffinityVolume,
    AttentionStack,
    DepthGrid,
    PropagationConfig,
    ValidationError,
    Variant,
    build_neighborhood,
    random_bundle,
)

REFERENCE = PropagationConfig(steps=1, reference=True)
VARIANTS = list(Variant)


def _single_neighbor_case(weight: float, h_0_left: float):
    """1x2 grid: pixel (0, 0) sees only (0, 1) through ring 1 of the 7x7 layout."""
    spec = build_neighborhood(Variant.RING_7X7, 1, 2)
    aff = AffinityVolume(np.full((48, 1, 2), weight))
    attn_t = np.ones((4, 1, 2))
    h_t = np.array([[1.0, 2.0]])
    h_0 = np.array([[h_0_left, 2.0]])
    return h_t, h_0, aff, attn_t, spec


# -----------------------------------------------------------------------------
# Gather
# -----------------------------------------------------------------------------


def test_gather_centre_of_3x3_reads_all_ring1_neighbours():
    """Centre pixel sees its 8 surrounding values, all in bounds."""
    grid = np.arange(9, dtype=float).reshape(3, 3)
    values, mask = gather_neighbors(grid, build_neighborhood(Variant.RING_7X7, 3, 3))
    assert sorted(values[:8, 1, 1]) == [0.0, 1.0, 2.0, 3.0, 5.0, 6.0, 7.0, 8.0]
    assert mask[:8, 1, 1].all()


def test_gather_corner_masks_out_of_bounds():
    """Corner pixel: 3 in-bounds ring-1 samples, 5 masked to 0."""
    grid = np.ones((3, 3))
    values, mask = gather_neighbors(grid, build_neighborhood(Variant.RING_7X7, 3, 3))
    assert int(mask[:8, 0, 0].sum()) == 3
    assert float(values[:8, 0, 0].sum()) == 3.0


# -----------------------------------------------------------------------------
# One step
# -----------------------------------------------------------------------------


def test_step_single_positive_neighbour():
    """h_t=1, nb=2, w=0.5, pi=1, h_0=1 gives (0.5*2 + 1) / 1.5 = 4/3."""
    h_t, h_0, aff, attn_t, spec = _single_neighbor_case(0.5, 1.0)
    out = step(h_t, h_0, aff, attn_t, spec, REFERENCE)
    assert out.values[0, 0] == pytest.approx(4.0 / 3.0, abs=1e-14)


def test_step_single_negative_neighbour():
    """w=-0.5, h_0=3: S=0.5, S'=1.5, result (-1+1)/1.5 + (1 - 1/3)*3 = 2."""
    h_t, h_0, aff, attn_t, spec = _single_neighbor_case(-0.5, 3.0)
    out = step(h_t, h_0, aff, attn_t, spec, REFERENCE)
    assert out.values[0, 0] == pytest.approx(2.0, abs=1e-14)


def test_step_suppression_fixed_point_is_exact():
    """pi_k = 0 for k >= 1 keeps h_t bit-exactly in reference mode."""
    bundle = random_bundle(Variant.RING_7X7, 5, 5, seed=4, config=REFERENCE)
    attn_t = np.array(bundle.attention.at_step(0), copy=True)
    attn_t[1:] = 0.0
    attn_t[0] = np.random.default_rng(1).uniform(0.1, 1.0, size=(5, 5))
    h_t = np.random.default_rng(2).uniform(1.0, 9.0, size=(5, 5))
    out = step(h_t, bundle.depth, bundle.affinity, attn_t, bundle.spec, REFERENCE)
    np.testing.assert_array_equal(out.values, h_t)


def test_step_suppression_fixed_point_with_epsilon_is_close():
    """With eps > 0 the fixed point holds up to an eps-sized perturbation."""
    bundle = random_bundle(Variant.DILATED, 4, 4, seed=5, config=PropagationConfig(steps=1))
    attn_t = np.zeros((3, 4, 4))
    attn_t[0] = 1.0
    h_t = np.full((4, 4), 3.0)
    out = step(h_t, bundle.depth, bundle.affinity, attn_t, bundle.spec, PropagationConfig(steps=1))
    np.testing.assert_allclose(out.values, h_t, atol=1e-7)


def test_step_with_zero_attention_returns_initial():
    """S' = 0 in reference mode yields h_0."""
    bundle = random_bundle(Variant.RING_7X7, 4, 4, seed=6, config=REFERENCE)
    h_t = np.full((4, 4), 7.0)
    out = step(h_t, bundle.depth, bundle.affinity, np.zeros((4, 4, 4)), bundle.spec, REFERENCE)
    np.testing.assert_array_equal(out.values, bundle.depth.values)


def test_step_rejects_mismatched_current_state():
    """An h_t of the wrong shape names both shapes."""
    bundle = random_bundle(Variant.RING_7X7, 4, 4, seed=7)
    with pytest.raises(ValidationError, match=r"h_t shape.*\(4, 4\).*\(4, 5\)"):
        step(np.ones((4, 5)), bundle.depth, bundle.affinity, bundle.attention.at_step(0), bundle.spec)


# -----------------------------------------------------------------------------
# Algebraic properties
# -----------------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    variant=st.sampled_from(VARIANTS),
    level=st.floats(min_value=0.5, max_value=50.0),
)
def test_coefficients_sum_to_one(seed, variant, level):
    """A constant field is preserved exactly up to rounding, even with negative weights."""
    bundle = random_bundle(variant, 5, 6, seed=seed, config=PropagationConfig(steps=1, reference=True))
    constant = np.full((5, 6), level)
    out = step(constant, constant, bundle.affinity, bundle.attention.at_step(0), bundle.spec, bundle.config)
    np.testing.assert_allclose(out.values, constant, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), variant=st.sampled_from(VARIANTS))
def test_nonnegative_weights_give_per_pixel_convex_bound(seed, variant):
    """With w >= 0, h_{t+1}(i,j) lies between the min and max of its sampled h_t values, h_t(i,j) and h_0(i,j)."""
    bundle = random_bundle(variant, 6, 6, seed=seed, signed=False, config=PropagationConfig(steps=1))
    h_t = np.random.default_rng(seed + 1).uniform(0.5, 20.0, size=(6, 6))
    h_0 = bundle.depth.values
    out = step(h_t, h_0, bundle.affinity, bundle.attention.at_step(0), bundle.spec, bundle.config).values

    gathered, mask = gather_neighbors(h_t, bundle.spec)
    low = np.minimum(np.min(np.where(mask, gathered, np.inf), axis=0), np.minimum(h_t, h_0))
    high = np.maximum(np.max(np.where(mask, gathered, -np.inf), axis=0), np.maximum(h_t, h_0))
    assert np.all(out >= low - 1e-11)
    assert np.all(out <= high + 1e-11)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), variant=st.sampled_from(VARIANTS))
def test_nonnegative_weights_stay_within_input_range(seed, variant):
    """With w >= 0 every state stays inside [min h_0, max h_0]."""
    bundle = random_bundle(variant, 6, 6, seed=seed, signed=False, config=PropagationConfig(steps=4))
    states = propagate_bundle(bundle).states
    low, high = bundle.depth.values.min(), bundle.depth.values.max()
    assert states.min() >= low - 1e-12
    assert states.max() <= high + 1e-12


def test_zero_neighbour_attention_everywhere_keeps_initial():
    """pi_k = 0 (k >= 1) at every step leaves h_N == h_0 for any N."""
    bundle = random_bundle(Variant.RING_7X7, 5, 5, seed=8, config=PropagationConfig(steps=6, reference=True))
    attention = np.array(bundle.attention.values, copy=True)
    attention[:, 1:] = 0.0
    refined, tape = propagate(bundle.depth, bundle.affinity, AttentionStack(attention), bundle.spec, bundle.config)
    np.testing.assert_array_equal(refined.values, bundle.depth.values)
    assert tape.states.shape == (7, 5, 5)


def test_all_zero_attention_keeps_initial():
    """pi = 0 everywhere, reference mode: h_N == h_0 exactly."""
    bundle = random_bundle(Variant.DILATED, 4, 5, seed=9, config=PropagationConfig(steps=3, reference=True))
    zeros = AttentionStack(np.zeros_like(bundle.attention.values))
    refined, _ = propagate(bundle.depth, bundle.affinity, zeros, bundle.spec, bundle.config)
    np.testing.assert_array_equal(refined.values, bundle.depth.values)


# -----------------------------------------------------------------------------
# Driver
# -----------------------------------------------------------------------------


def test_propagate_one_step_equals_step():
    """N=1 reduces to a single step."""
    config = PropagationConfig(steps=1)
    bundle = random_bundle(Variant.RING_7X7, 4, 4, seed=10, signed=False, config=config)
    refined, _ = propagate(bundle.depth, bundle.affinity, bundle.attention, bundle.spec, config)
    single = step(bundle.depth, bundle.depth, bundle.affinity, bundle.attention.at_step(0), bundle.spec, config)
    np.testing.assert_array_equal(refined.values, single.values)


def test_tape_records_every_state():
    """The tape holds h_0..h_N and one workspace per step."""
    bundle = random_bundle(Variant.DEFORMABLE, 4, 4, seed=12, config=PropagationConfig(steps=3))
    tape = propagate_bundle(bundle)
    assert tape.steps == 3
    assert tape.states.shape == (4, 4, 4)
    np.testing.assert_array_equal(tape.initial, bundle.depth.values)


def test_tape_keeps_s_below_s_prime():
    """S <= S' holds at every step."""
    bundle = random_bundle(Variant.RING_7X7, 5, 5, seed=13, config=PropagationConfig(steps=2))
    for workspace in propagate_bundle(bundle).workspaces:
        assert np.all(workspace.s <= workspace.s_prime + 1e-15)


@pytest.mark.parametrize("variant", VARIANTS)
def test_thread_count_does_not_change_results(variant):
    """1 and 8 worker threads give bit-identical trajectories."""
    config = PropagationConfig(steps=3)
    single = random_bundle(variant, 17, 9, seed=14, config=config)
    many = single.with_config(PropagationConfig(steps=3, threads=8))
    np.testing.assert_array_equal(propagate_bundle(single).states, propagate_bundle(many).states)


def test_f32_precision_runs_in_float32():
    """f32 configs produce float32 states."""
    config = PropagationConfig(steps=2, precision="f32")
    bundle = random_bundle(Variant.DILATED, 4, 4, seed=15, config=config)
    assert propagate_bundle(bundle).states.dtype == np.float32


def test_suppression_off_pins_self_attention():
    """With suppression off pi_0 is treated as 1."""
    attn_t = np.full((3, 2, 2), 0.25)
    pinned = effective_attention(attn_t, PropagationConfig(suppression=False))
    np.testing.assert_array_equal(pinned[0], 1.0)
    np.testing.assert_array_equal(pinned[1:], 0.25)
    assert effective_attention(attn_t, PropagationConfig()) is attn_t


# -----------------------------------------------------------------------------
# CSPN emulation
# -----------------------------------------------------------------------------


def test_emulate_cspn_equals_all_ones_attention():
    """CSPN is DySPN with every attention value at 1."""
    config = PropagationConfig(steps=3)
    bundle = random_bundle(Variant.DILATED, 5, 5, seed=16, signed=False, config=config)
    ones = AttentionStack.filled(3, bundle.spec.ring_count, 5, 5, 1.0)
    expected, _ = propagate(bundle.depth, bundle.affinity, ones, bundle.spec, config)
    np.testing.assert_array_equal(emulate_cspn(bundle.depth, bundle.affinity, bundle.spec, config).values, expected.values)


def test_emulate_cspn_with_zero_affinity_keeps_initial():
    """All w = 0 leaves h_0 unchanged."""
    spec = build_neighborhood(Variant.RING_7X7, 4, 4)
    depth = DepthGrid(np.random.default_rng(0).uniform(1, 5, size=(4, 4)))
    out = emulate_cspn(depth, AffinityVolume(np.zeros((48, 4, 4))), spec, PropagationConfig(steps=6, reference=True))
    np.testing.assert_array_equal(out.values, depth.values)


# -----------------------------------------------------------------------------
# Activations
# -----------------------------------------------------------------------------


def test_sigmoid_activation_inverts_logits():
    """sigmoid(logit(a)) recovers interior attention."""
    values = np.random.default_rng(3).uniform(0.05, 0.95, size=(2, 4, 3, 3))
    np.testing.assert_allclose(activate(attention_logits(values), Activation.SIGMOID).values, values, rtol=1e-12)


def test_softmax_activation_sums_to_one_across_rings():
    """Softmax normalises over the ring axis per pixel and step."""
    logits = np.random.default_rng(4).normal(size=(2, 4, 3, 3))
    stack = activate(logits, Activation.SOFTMAX)
    np.testing.assert_allclose(stack.values.sum(axis=1), 1.0, rtol=1e-12)


@pytest.mark.parametrize("kind", [Activation.SIGMOID, Activation.SOFTMAX])
def test_activation_vjp_matches_finite_differences(kind):
    """The vector-Jacobian product agrees with central differences."""
    rng = np.random.default_rng(5)
    logits = rng.normal(size=(1, 3, 2, 2))
    upstream = rng.normal(size=logits.shape)
    analytic = activation_vjp(activate(logits, kind).values, upstream, kind)
    numeric = np.zeros_like(logits)
    h = 1e-6
    for i in range(logits.size):
        plus = logits.copy()
        minus = logits.copy()
        plus.flat[i] += h
        minus.flat[i] -= h
        diff = activate(plus, kind).values - activate(minus, kind).values
        numeric.flat[i] = float(np.sum(upstream * diff)) / (2 * h)
    np.testing.assert_allclose(analytic, numeric, atol=1e-8)


def test_unknown_activation_is_rejected():
    """Only identity, sigmoid and softmax exist."""
    with pytest.raises(ValidationError):
        activate(np.zeros((1, 2, 1, 1)), "relu")
