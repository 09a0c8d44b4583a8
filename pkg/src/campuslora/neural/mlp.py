"""Dense feed-forward classifier: ReLU hidden layers, softmax output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimMismatch
from .losses import relu, softmax


@dataclass
class MlpNet:
    weights: list[np.ndarray]  # each (out, in)
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            raise DimMismatch("weights and biases must be nonempty and paired")
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimMismatch(f"layer shapes {w.shape} / {b.shape} do not pair")
        for below, above in zip(self.weights, self.weights[1:]):
            if above.shape[1] != below.shape[0]:
                raise DimMismatch(
                    f"layer dims do not chain: {below.shape[0]} -> {above.shape[1]}"
                )

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1], *(w.shape[0] for w in self.weights))


def init_mlp(dims: list[int] | tuple[int, ...], rng: np.random.Generator) -> MlpNet:
    """Uniform(+-1/sqrt(fan_in)) weights, zero biases."""
    if len(dims) < 2:
        raise DimMismatch("need at least input and output dims")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNet(weights, biases)


def mlp_logits_batch(net: MlpNet, x: np.ndarray):
    """Forward pass for a (B, F) batch; returns (logits, activation caches)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.dims[0]:
        raise DimMismatch(f"batch shape {x.shape}, expected (B, {net.dims[0]})")
    activations = [x]
    a = x
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if l == last else relu(z)
        activations.append(a)
    return activations[-1], activations


def mlp_forward(x: np.ndarray, net: MlpNet) -> np.ndarray:
    """Class probabilities for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.dims[0],):
        raise DimMismatch(f"input shape {x.shape}, net expects ({net.dims[0]},)")
    logits, _ = mlp_logits_batch(net, x[None, :])
    return softmax(logits)[0]


def mlp_parameters(net: MlpNet) -> list[np.ndarray]:
    params: list[np.ndarray] = []
    for w, b in zip(net.weights, net.biases):
        params.extend((w, b))
    return params


def mlp_backward_batch(net: MlpNet, activations, dlogits: np.ndarray) -> list[np.ndarray]:
    """Gradients aligned with mlp_parameters, given d(loss)/d(logits)."""
    grads: list[np.ndarray | None] = [None] * (2 * len(net.weights))
    delta = dlogits
    for l in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[l]
        grads[2 * l] = delta.T @ a_prev
        grads[2 * l + 1] = delta.sum(axis=0)
        if l > 0:
            # hidden activations are ReLU outputs; a > 0 marks active units
            delta = (delta @ net.weights[l]) * (activations[l] > 0)
    return grads  # type: ignore[return-value]
