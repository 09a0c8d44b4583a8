"""Self-contained neural kernel: LSTM, MLP, losses, backprop, optimizers.

No external ML dependency; everything runs on float64 numpy.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..errors import DimMismatch
from .checkpoint import load_checkpoint, model_from_dict, model_to_dict, render_checkpoint, save_checkpoint
from .losses import (
    Loss,
    cross_entropy_value_and_grad,
    log_softmax,
    mse_value_and_grad,
    relu,
    sigmoid,
    softmax,
)
from .lstm import (
    LstmLayer,
    LstmStack,
    LstmState,
    init_lstm_layer,
    init_lstm_stack,
    lstm_backward_batch,
    lstm_forward,
    lstm_forward_batch,
    lstm_parameters,
    lstm_step,
    zero_state,
)
from .mlp import MlpNet, init_mlp, mlp_backward_batch, mlp_forward, mlp_logits_batch, mlp_parameters
from .optim import Adam, OptState, RmsProp, make_optimizer, optimizer_step

Model = Union[LstmStack, MlpNet]


def parameters(model: Model) -> list[np.ndarray]:
    """Every trainable array of the model, in a fixed order."""
    if isinstance(model, LstmStack):
        return lstm_parameters(model)
    if isinstance(model, MlpNet):
        return mlp_parameters(model)
    raise TypeError(f"not a model: {type(model)!r}")


def loss_and_gradients(
    model: Model, batch: tuple[np.ndarray, np.ndarray], loss: Loss
) -> tuple[float, list[np.ndarray]]:
    """Mean batch loss and its exact gradient for every parameter.

    LSTM stacks pair with MSE on (sequences (B,T,I), targets (B,O)); MLPs pair
    with cross-entropy on (features (B,F), integer labels (B,)).
    """
    x, y = batch
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, LstmStack):
        if loss is not Loss.MSE:
            raise DimMismatch("the regression readout pairs with the MSE loss")
        y = np.asarray(y, dtype=np.float64)
        pred, caches = lstm_forward_batch(model, x)
        if y.ndim == 1:
            y = y[:, None]
        value, dpred = mse_value_and_grad(pred, y)
        return value, lstm_backward_batch(model, caches, dpred)
    if isinstance(model, MlpNet):
        if loss is not Loss.CROSS_ENTROPY:
            raise DimMismatch("the softmax head pairs with the cross-entropy loss")
        labels = np.asarray(y, dtype=np.int64)
        logits, activations = mlp_logits_batch(model, x)
        value, dlogits = cross_entropy_value_and_grad(logits, labels)
        return value, mlp_backward_batch(model, activations, dlogits)
    raise TypeError(f"not a model: {type(model)!r}")


__all__ = [
    "Adam",
    "Loss",
    "LstmLayer",
    "LstmStack",
    "LstmState",
    "MlpNet",
    "Model",
    "OptState",
    "RmsProp",
    "cross_entropy_value_and_grad",
    "init_lstm_layer",
    "init_lstm_stack",
    "init_mlp",
    "load_checkpoint",
    "log_softmax",
    "loss_and_gradients",
    "lstm_backward_batch",
    "lstm_forward",
    "lstm_forward_batch",
    "lstm_parameters",
    "lstm_step",
    "make_optimizer",
    "mlp_backward_batch",
    "mlp_forward",
    "mlp_logits_batch",
    "mlp_parameters",
    "model_from_dict",
    "model_to_dict",
    "mse_value_and_grad",
    "optimizer_step",
    "parameters",
    "relu",
    "render_checkpoint",
    "save_checkpoint",
    "sigmoid",
    "softmax",
    "zero_state",
]
