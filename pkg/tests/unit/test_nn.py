"""Comprehensive tests for gridcover.nn — dense nets, policy head, Adam, finite differences."""

from __future__ import annotations

import numpy as np
import pytest

from gridcover.core.config import OptimizerConfig
from gridcover.core.constants import GRADCHECK_TOLERANCE
from gridcover.core.exceptions import DivergenceError, ShapeError
from gridcover.core.models import Activation
from gridcover.nn.dense import Gradients, backward, forward, init_dense, mlp
from gridcover.nn.functional import entropy, log_softmax, sample_categorical, softmax
from gridcover.nn.gradcheck import max_relative_error, numerical_gradients, relative_error
from gridcover.nn.optim import AdamState, adam_step

# ── Dense networks ───────────────────────────────────────────────────────────


class TestDense:
    def test_init_shapes(self, rng):
        net = mlp(5, [4, 3], 2, rng)
        assert net.architecture() == [(5, 4, "tanh"), (4, 3, "tanh"), (3, 2, "identity")]
        assert net.input_dim == 5
        assert net.output_dim == 2
        assert all(not layer.bias.any() for layer in net.layers)

    def test_activation_count_checked(self, rng):
        with pytest.raises(ShapeError):
            init_dense([3, 4, 2], [Activation.TANH], rng)

    def test_forward_vector_and_batch_agree(self, rng):
        net = mlp(4, [6], 3, rng)
        x = rng.normal(size=(5, 4)).astype(np.float32)
        batch, _ = forward(net, x)
        single, _ = forward(net, x[2])
        assert single.shape == (3,)
        np.testing.assert_allclose(batch[2], single, rtol=1e-5)

    def test_forward_rejects_wrong_width(self, rng):
        net = mlp(4, [6], 3, rng)
        with pytest.raises(ShapeError):
            forward(net, np.zeros(5))

    def test_backward_rejects_wrong_shape(self, rng):
        net = mlp(4, [6], 3, rng)
        _, tape = forward(net, np.zeros((2, 4)))
        with pytest.raises(ShapeError):
            backward(net, tape, np.zeros((2, 4)))

    def test_relu(self, rng):
        net = init_dense([2, 2], [Activation.RELU], rng)
        net.layers[0].weight[...] = np.eye(2)
        y, _ = forward(net, np.array([-1.0, 2.0]))
        assert y.tolist() == [0.0, 2.0]

    def test_copy_is_independent(self, rng):
        net = mlp(3, [4], 2, rng)
        clone = net.copy()
        clone.layers[0].weight += 1.0
        assert not np.allclose(clone.layers[0].weight, net.layers[0].weight)

    def test_load_parameters(self, rng):
        net = mlp(3, [4], 2, rng)
        other = mlp(3, [4], 2, np.random.default_rng(99))
        net.load_parameters(other.parameters())
        for a, b in zip(net.parameters(), other.parameters(), strict=True):
            assert (a == b).all()

    def test_load_parameters_shape_checked(self, rng):
        net = mlp(3, [4], 2, rng)
        with pytest.raises(ShapeError):
            net.load_parameters(mlp(3, [5], 2, rng).parameters())

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        net = mlp(3, [4], 2, rng, dtype=np.float64)
        x = rng.normal(size=(3, 3))
        w = rng.normal(size=(3, 2))

        def loss() -> float:
            y, _ = forward(net, x)
            return float(np.sum(w * y))

        _, tape = forward(net, x)
        grads = backward(net, tape, w)
        error = max_relative_error(loss, [*net.parameters(), x], [*grads.parameters(), grads.input])
        assert error < 1e-4


class TestGradients:
    def test_clip(self, rng):
        grads = Gradients.zeros_like(mlp(2, [2], 1, rng))
        grads.weights[0][...] = 3.0
        grads.biases[0][...] = 4.0
        norm = grads.clip(1.0)
        assert norm == pytest.approx(np.sqrt(4 * 9 + 2 * 16))
        assert grads.global_norm() == pytest.approx(1.0, rel=1e-6)

    def test_clip_leaves_small_gradients(self, rng):
        grads = Gradients.zeros_like(mlp(2, [2], 1, rng))
        grads.biases[1][...] = 0.5
        grads.clip(5.0)
        assert grads.biases[1][0] == 0.5

    def test_accumulate_and_scale(self, rng):
        net = mlp(2, [2], 1, rng)
        a = Gradients.zeros_like(net)
        b = Gradients.zeros_like(net)
        b.biases[0][...] = 1.0
        a.accumulate(b).accumulate(b).scale(0.5)
        assert a.biases[0].tolist() == [1.0, 1.0]

    def test_non_finite_detected(self, rng):
        grads = Gradients.zeros_like(mlp(2, [2], 1, rng))
        grads.weights[1][0, 0] = np.nan
        assert not grads.is_finite()


# ── Policy head ──────────────────────────────────────────────────────────────


class TestFunctional:
    def test_softmax_sums_to_one(self, rng):
        probs = softmax(rng.normal(size=(4, 9)))
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0)

    def test_softmax_stable_for_large_logits(self):
        probs = softmax(np.array([1000.0, 0.0]))
        assert np.isfinite(probs).all()
        assert probs[0] == pytest.approx(1.0)

    def test_log_softmax_consistent(self, rng):
        logits = rng.normal(size=9)
        np.testing.assert_allclose(np.exp(log_softmax(logits)), softmax(logits), rtol=1e-10)

    def test_entropy(self):
        assert entropy(np.full(4, 0.25)) == pytest.approx(np.log(4))
        assert entropy(np.array([1.0, 0.0])) == 0.0

    def test_sample_deterministic_for_fixed_state(self):
        probs = softmax(np.linspace(0, 1, 9))
        a = [sample_categorical(probs, np.random.default_rng(5)) for _ in range(3)]
        assert len(set(a)) == 1

    def test_sample_frequencies(self):
        rng = np.random.default_rng(0)
        probs = np.array([[0.2, 0.8]] * 4000)
        draws = sample_categorical(probs, rng)
        assert 0.77 < draws.mean() < 0.83

    def test_sample_never_picks_zero_probability(self):
        rng = np.random.default_rng(0)
        probs = np.array([[0.0, 1.0, 0.0]] * 100)
        assert (sample_categorical(probs, rng) == 1).all()


# ── Adam ─────────────────────────────────────────────────────────────────────


class TestAdam:
    def test_first_step_moves_by_lr(self, rng):
        net = mlp(2, [], 1, rng)
        before = net.layers[0].weight.copy()
        grads = Gradients.zeros_like(net)
        grads.weights[0][...] = 1.0
        adam_step(net, grads, AdamState.for_net(net, OptimizerConfig(lr=0.1)))
        np.testing.assert_allclose(before - net.layers[0].weight, 0.1, rtol=1e-4)

    def test_minimises_quadratic(self):
        rng = np.random.default_rng(0)
        net = init_dense([1, 1], [Activation.IDENTITY], rng, dtype=np.float64)
        state = AdamState.for_net(net, OptimizerConfig(lr=0.05))
        x = np.array([[1.0], [2.0], [3.0]])
        target = 2.0 * x + 1.0
        for _ in range(2000):
            y, tape = forward(net, x)
            adam_step(net, backward(net, tape, 2 * (y - target) / 3), state)
        assert net.layers[0].weight[0, 0] == pytest.approx(2.0, abs=0.05)
        assert net.layers[0].bias[0] == pytest.approx(1.0, abs=0.05)

    def test_step_counter(self, rng):
        net = mlp(2, [], 1, rng)
        state = AdamState.for_net(net)
        adam_step(net, Gradients.zeros_like(net), state)
        adam_step(net, Gradients.zeros_like(net), state)
        assert state.step == 2

    def test_nan_gradient_raises_without_update(self, rng):
        net = mlp(2, [], 1, rng)
        before = net.layers[0].weight.copy()
        grads = Gradients.zeros_like(net)
        grads.biases[0][0] = np.inf
        state = AdamState.for_net(net)
        with pytest.raises(DivergenceError):
            adam_step(net, grads, state)
        assert (net.layers[0].weight == before).all()
        assert state.step == 0


# ── Finite differences ───────────────────────────────────────────────────────


class TestFiniteDifferences:
    def test_quadratic(self):
        x = np.array([1.0, -2.0, 0.5])
        numeric = numerical_gradients(lambda: float(np.sum(x**2)), [x])[0]
        np.testing.assert_allclose(numeric, 2 * x, rtol=1e-6)

    def test_parameters_restored(self):
        x = np.array([1.0, 2.0])
        numerical_gradients(lambda: float(np.sum(x**3)), [x])
        assert x.tolist() == [1.0, 2.0]

    def test_relative_error_floor(self):
        assert relative_error(np.array([0.0]), np.array([1e-9])) == pytest.approx(1e-3)

    def test_small_gradient_mismatch_detected(self):
        error = relative_error(np.array([1e-3]), np.array([1.001e-3]))
        assert error > GRADCHECK_TOLERANCE
        assert error == pytest.approx(1e-6 / 2.001e-3)

    def test_near_zero_gradient_resolved(self):
        x = np.array([1e-3, 2.0])
        numeric = numerical_gradients(lambda: float(np.sum(x**3)), [x])[0]
        assert relative_error(3 * x**2, numeric) < 1e-5

    def test_wrong_gradient_detected(self):
        x = np.array([1.0, 2.0])
        error = max_relative_error(lambda: float(np.sum(x**2)), [x], [np.array([2.0, 6.0])])
        assert error > 0.1
