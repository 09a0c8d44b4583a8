"""LSTM layers with exact backpropagation through time.

Each layer keeps one stacked weight matrix of shape (4*hidden, input+hidden)
producing the pre-activations of the learn (i), forget (f), use (o) and
candidate-memory (g) gates in that row order, plus one stacked bias vector.
The step computes

    (i, f, o) = sigmoid, g = tanh  of  W @ [x_t; h_prev] + b
    c_t = f * c_prev + i * g
    h_t = o * tanh(c_t)

All arithmetic is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimMismatch, EmptySequence
from .losses import sigmoid


@dataclass
class LstmLayer:
    w: np.ndarray  # (4H, I+H)
    b: np.ndarray  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.w.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.w.shape[1] - self.hidden_size

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.w.ndim != 2 or self.w.shape[0] % 4 != 0:
            raise DimMismatch(f"weight shape {self.w.shape} is not (4H, I+H)")
        if self.b.shape != (self.w.shape[0],):
            raise DimMismatch(f"bias shape {self.b.shape} does not match {self.w.shape}")
        if self.w.shape[1] <= self.hidden_size:
            raise DimMismatch("input size must be positive")


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass
class LstmStack:
    """Stacked LSTM layers with a linear readout on the final hidden state."""

    layers: list[LstmLayer]
    w_out: np.ndarray  # (O, H_top)
    b_out: np.ndarray  # (O,)

    def __post_init__(self) -> None:
        self.w_out = np.asarray(self.w_out, dtype=np.float64)
        self.b_out = np.asarray(self.b_out, dtype=np.float64)
        if not self.layers:
            raise DimMismatch("stack needs at least one layer")
        for below, above in zip(self.layers, self.layers[1:]):
            if above.input_size != below.hidden_size:
                raise DimMismatch(
                    f"layer dims do not chain: {below.hidden_size} -> {above.input_size}"
                )
        if self.w_out.shape[1] != self.layers[-1].hidden_size:
            raise DimMismatch("readout width does not match the top layer")

    @property
    def input_size(self) -> int:
        return self.layers[0].input_size

    @property
    def output_size(self) -> int:
        return self.w_out.shape[0]


def zero_state(layer: LstmLayer, batch: int | None = None) -> LstmState:
    shape = (layer.hidden_size,) if batch is None else (batch, layer.hidden_size)
    return LstmState(np.zeros(shape), np.zeros(shape))


def init_lstm_layer(input_size: int, hidden_size: int, rng: np.random.Generator) -> LstmLayer:
    """Uniform(+-1/sqrt(fan_in)) weights; forget-gate bias starts at 1.0."""
    fan_in = input_size + hidden_size
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(4 * hidden_size, fan_in))
    b = np.zeros(4 * hidden_size)
    b[hidden_size : 2 * hidden_size] = 1.0
    return LstmLayer(w, b)


def init_lstm_stack(
    input_size: int,
    hidden_dims: list[int] | tuple[int, ...],
    output_size: int,
    rng: np.random.Generator,
) -> LstmStack:
    layers = []
    size = input_size
    for hidden in hidden_dims:
        layers.append(init_lstm_layer(size, hidden, rng))
        size = hidden
    bound = 1.0 / np.sqrt(size)
    w_out = rng.uniform(-bound, bound, size=(output_size, size))
    b_out = np.zeros(output_size)
    return LstmStack(layers, w_out, b_out)


def _gates(layer: LstmLayer, xh: np.ndarray):
    h = layer.hidden_size
    z = xh @ layer.w.T + layer.b
    i = sigmoid(z[..., :h])
    f = sigmoid(z[..., h : 2 * h])
    o = sigmoid(z[..., 2 * h : 3 * h])
    g = np.tanh(z[..., 3 * h :])
    return i, f, o, g


def lstm_step(x: np.ndarray, state: LstmState, layer: LstmLayer) -> LstmState:
    """Advance one layer by one timestep for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.input_size,):
        raise DimMismatch(f"input shape {x.shape}, layer expects ({layer.input_size},)")
    if state.h.shape != (layer.hidden_size,) or state.c.shape != (layer.hidden_size,):
        raise DimMismatch(f"state shape {state.h.shape}, layer has hidden {layer.hidden_size}")
    i, f, o, g = _gates(layer, np.concatenate([x, state.h]))
    c = f * state.c + i * g
    h = o * np.tanh(c)
    return LstmState(h, c)


def lstm_forward(sequence, stack: LstmStack) -> np.ndarray:
    """Run the full stack over a sequence and read out the final hidden state.

    Layer l's hidden sequence is layer l+1's input sequence; all states start
    at zero.
    """
    seq = np.asarray(sequence, dtype=np.float64)
    if seq.ndim == 1:
        seq = seq[:, None]
    if seq.shape[0] == 0:
        raise EmptySequence("sequence must have at least one step")
    if seq.shape[1] != stack.input_size:
        raise DimMismatch(f"sequence width {seq.shape[1]}, stack expects {stack.input_size}")
    inputs = seq
    last_h = None
    for layer in stack.layers:
        state = zero_state(layer)
        outputs = np.empty((inputs.shape[0], layer.hidden_size))
        for t in range(inputs.shape[0]):
            state = lstm_step(inputs[t], state, layer)
            outputs[t] = state.h
        inputs = outputs
        last_h = state.h
    return stack.w_out @ last_h + stack.b_out


def lstm_parameters(stack: LstmStack) -> list[np.ndarray]:
    params: list[np.ndarray] = []
    for layer in stack.layers:
        params.extend((layer.w, layer.b))
    params.extend((stack.w_out, stack.b_out))
    return params


def lstm_forward_batch(stack: LstmStack, x: np.ndarray):
    """Batched forward pass with caches for backprop.

    x has shape (B, T, I); returns (predictions (B, O), caches).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != stack.input_size:
        raise DimMismatch(f"batch shape {x.shape}, expected (B, T, {stack.input_size})")
    if x.shape[1] == 0:
        raise EmptySequence("sequence must have at least one step")
    b, t_len, _ = x.shape
    layer_caches = []
    inputs = np.swapaxes(x, 0, 1)  # (T, B, I)
    for layer in stack.layers:
        hsz = layer.hidden_size
        h = np.zeros((b, hsz))
        c = np.zeros((b, hsz))
        steps = []
        outputs = np.empty((t_len, b, hsz))
        for t in range(t_len):
            xh = np.concatenate([inputs[t], h], axis=1)
            i, f, o, g = _gates(layer, xh)
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            outputs[t] = h
            steps.append((xh, i, f, o, g, c_prev, tc))
        layer_caches.append(steps)
        inputs = outputs
    h_final = inputs[-1]  # (B, H_top)
    pred = h_final @ stack.w_out.T + stack.b_out
    return pred, (layer_caches, h_final)


def lstm_backward_batch(stack: LstmStack, caches, dpred: np.ndarray) -> list[np.ndarray]:
    """Exact gradients of a scalar loss w.r.t. every stack parameter.

    dpred is d(loss)/d(predictions), shape (B, O). Returns gradients aligned
    with lstm_parameters(stack).
    """
    layer_caches, h_final = caches
    t_len = len(layer_caches[0])
    b = dpred.shape[0]

    dw_out = dpred.T @ h_final
    db_out = dpred.sum(axis=0)

    # incoming d(loss)/d(h_t) per layer; the top layer is driven only by the
    # readout at the final step, lower layers by the layer above at every step
    top = len(stack.layers) - 1
    dh_seq = [None] * len(stack.layers)
    dh_seq[top] = [np.zeros((b, stack.layers[top].hidden_size)) for _ in range(t_len)]
    dh_seq[top][t_len - 1] = dpred @ stack.w_out

    grads: list[np.ndarray | None] = [None] * (2 * len(stack.layers))
    for l in range(top, -1, -1):
        layer = stack.layers[l]
        hsz = layer.hidden_size
        isz = layer.input_size
        dw = np.zeros_like(layer.w)
        db = np.zeros_like(layer.b)
        dh_rec = np.zeros((b, hsz))
        dc_rec = np.zeros((b, hsz))
        dx_seq = [None] * t_len
        for t in range(t_len - 1, -1, -1):
            xh, i, f, o, g, c_prev, tc = layer_caches[l][t]
            dh = dh_seq[l][t] + dh_rec
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_rec
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            dc_rec = dc * f
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    do * o * (1.0 - o),
                    dg * (1.0 - g * g),
                ],
                axis=1,
            )
            dw += dz.T @ xh
            db += dz.sum(axis=0)
            dxh = dz @ layer.w
            dx_seq[t] = dxh[:, :isz]
            dh_rec = dxh[:, isz:]
        grads[2 * l] = dw
        grads[2 * l + 1] = db
        if l > 0:
            dh_seq[l - 1] = dx_seq
    return [*grads, dw_out, db_out]  # type: ignore[list-item]
