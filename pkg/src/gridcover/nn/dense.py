"""Fully connected networks with a cached-activation tape for analytic backprop."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gridcover.core.exceptions import ShapeError
from gridcover.core.models import Activation


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: Activation


@dataclass
class DenseNet:
    layers: list[DenseLayer]

    @property
    def input_dim(self) -> int:
        return int(self.layers[0].weight.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.layers[-1].weight.shape[0])

    @property
    def dtype(self) -> np.dtype:
        return self.layers[0].weight.dtype

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in declaration order: W0, b0, W1, b1, ..."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.extend((layer.weight, layer.bias))
        return params

    def architecture(self) -> list[tuple[int, int, str]]:
        return [
            (int(layer.weight.shape[1]), int(layer.weight.shape[0]), layer.activation.value)
            for layer in self.layers
        ]

    def copy(self) -> DenseNet:
        return self.astype(self.dtype)

    def astype(self, dtype: type | np.dtype) -> DenseNet:
        return DenseNet(
            [
                DenseLayer(layer.weight.astype(dtype), layer.bias.astype(dtype), layer.activation)
                for layer in self.layers
            ]
        )

    def load_parameters(self, params: Sequence[np.ndarray]) -> None:
        """Overwrite parameters in place from arrays in declaration order."""
        own = self.parameters()
        if len(params) != len(own):
            raise ShapeError(f"Expected {len(own)} parameter arrays, got {len(params)}")
        for dst, src in zip(own, params, strict=True):
            if dst.shape != src.shape:
                raise ShapeError(f"Parameter shape {src.shape} does not match {dst.shape}")
            dst[...] = src

    def is_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.parameters())


@dataclass
class Tape:
    """Per-layer inputs and post-activation outputs from one forward pass."""

    inputs: list[np.ndarray]
    outputs: list[np.ndarray]
    batched: bool


@dataclass
class Gradients:
    """Gradient arrays congruent with a DenseNet, plus dL/dx."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray | None = None

    @classmethod
    def zeros_like(cls, net: DenseNet) -> Gradients:
        return cls(
            [np.zeros_like(layer.weight) for layer in net.layers],
            [np.zeros_like(layer.bias) for layer in net.layers],
        )

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            params.extend((w, b))
        return params

    def accumulate(self, other: Gradients) -> Gradients:
        for dst, src in zip(self.parameters(), other.parameters(), strict=True):
            dst += src
        return self

    def scale(self, factor: float) -> Gradients:
        for arr in self.parameters():
            arr *= factor
        return self

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(np.square(g))) for g in self.parameters())))

    def clip(self, max_norm: float) -> float:
        """Rescale in place to at most ``max_norm``; returns the pre-clip norm."""
        norm = self.global_norm()
        if norm > max_norm > 0.0:
            self.scale(max_norm / (norm + 1e-12))
        return norm

    def is_finite(self) -> bool:
        return all(np.isfinite(g).all() for g in self.parameters())


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.TANH:
        return np.tanh(z)
    return z


def _activation_grad(out: np.ndarray, activation: Activation) -> np.ndarray | float:
    if activation is Activation.RELU:
        return (out > 0.0).astype(out.dtype)
    if activation is Activation.TANH:
        return 1.0 - out * out
    return 1.0


def init_dense(
    sizes: Sequence[int],
    activations: Sequence[Activation],
    rng: np.random.Generator,
    *,
    output_scale: float = 1.0,
    dtype: type = np.float32,
) -> DenseNet:
    """Uniform He-style init scaled by fan-in; zero biases.

    ``sizes`` lists every width including input and output; ``activations``
    has one entry per layer.
    """
    if len(activations) != len(sizes) - 1:
        raise ShapeError(f"{len(sizes) - 1} layers need {len(sizes) - 1} activations")
    layers: list[DenseLayer] = []
    for idx, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:], strict=True)):
        activation = Activation(activations[idx])
        gain = np.sqrt(2.0) if activation is Activation.RELU else 1.0
        limit = gain * np.sqrt(3.0 / fan_in)
        if idx == len(sizes) - 2:
            limit *= output_scale
        weight = rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(dtype)
        layers.append(DenseLayer(weight, np.zeros(fan_out, dtype=dtype), activation))
    return DenseNet(layers)


def mlp(
    in_dim: int,
    hidden: Sequence[int],
    out_dim: int,
    rng: np.random.Generator,
    *,
    hidden_activation: Activation = Activation.TANH,
    output_activation: Activation = Activation.IDENTITY,
    output_scale: float = 1.0,
    dtype: type = np.float32,
) -> DenseNet:
    sizes = [in_dim, *hidden, out_dim]
    activations = [hidden_activation] * len(hidden) + [output_activation]
    return init_dense(sizes, activations, rng, output_scale=output_scale, dtype=dtype)


def forward(net: DenseNet, x: np.ndarray) -> tuple[np.ndarray, Tape]:
    """Affine + activation composition over a vector or a (batch, in) matrix.

    Raises:
        ShapeError: input width differs from the first layer's input dim.
    """
    batched = np.ndim(x) == 2
    h = np.atleast_2d(np.asarray(x, dtype=net.dtype))
    if h.shape[1] != net.input_dim:
        raise ShapeError(f"Network expects input dim {net.input_dim}, got {h.shape[1]}")
    inputs: list[np.ndarray] = []
    outputs: list[np.ndarray] = []
    for layer in net.layers:
        inputs.append(h)
        h = _activate(h @ layer.weight.T + layer.bias, layer.activation)
        outputs.append(h)
    y = h if batched else h[0]
    return y, Tape(inputs, outputs, batched)


def backward(net: DenseNet, tape: Tape, dy: np.ndarray) -> Gradients:
    """dL/dθ for every parameter and dL/dx, given dL/dy (summed over the batch).

    Raises:
        ShapeError: ``dy`` is not shaped like the taped output.
    """
    grad = np.atleast_2d(np.asarray(dy, dtype=net.dtype))
    if grad.shape != tape.outputs[-1].shape:
        raise ShapeError(f"dL/dy shape {grad.shape} does not match output {tape.outputs[-1].shape}")
    weights: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    biases: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    for idx in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[idx]
        dz = grad * _activation_grad(tape.outputs[idx], layer.activation)
        weights[idx] = dz.T @ tape.inputs[idx]
        biases[idx] = dz.sum(axis=0)
        grad = dz @ layer.weight
    return Gradients(weights, biases, grad if tape.batched else grad[0])
