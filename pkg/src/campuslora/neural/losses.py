"""Activations and loss functions with their exact gradients."""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..errors import DimMismatch, NonFiniteLoss


class Loss(Enum):
    MSE = "mse"
    CROSS_ENTROPY = "cross_entropy"


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis (max subtraction)."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def mse_value_and_grad(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over every element, with d(loss)/d(pred)."""
    if pred.shape != target.shape:
        raise DimMismatch(f"prediction {pred.shape} vs target {target.shape}")
    if pred.size == 0:
        raise DimMismatch("empty batch")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    if not np.isfinite(loss):
        raise NonFiniteLoss("mse evaluated to a non-finite value")
    return loss, 2.0 * diff / diff.size


def cross_entropy_value_and_grad(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy from logits (log-sum-exp form) and d(loss)/d(logits)."""
    if logits.ndim != 2 or labels.ndim != 1 or logits.shape[0] != labels.shape[0]:
        raise DimMismatch(f"logits {logits.shape} vs labels {labels.shape}")
    if logits.shape[0] == 0:
        raise DimMismatch("empty batch")
    b = logits.shape[0]
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(b), labels].mean())
    if not np.isfinite(loss):
        raise NonFiniteLoss("cross-entropy evaluated to a non-finite value")
    grad = softmax(logits)
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b
