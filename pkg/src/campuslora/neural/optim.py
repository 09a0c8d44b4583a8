"""RMSprop and Adam parameter updates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import ShapeMismatch


@dataclass
class RmsProp:
    """s <- rho*s + (1-rho)*g^2;  p <- p - lr * g / sqrt(s + eps)."""

    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8
    sq: Optional[list[np.ndarray]] = None
    step_count: int = 0

    def update(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        if self.sq is None:
            self.sq = [np.zeros_like(p) for p in params]
        self.step_count += 1
        for p, g, s in zip(params, grads, self.sq):
            s *= self.rho
            s += (1.0 - self.rho) * g * g
            p -= self.lr * g / np.sqrt(s + self.eps)


@dataclass
class Adam:
    """Bias-corrected first/second moment updates."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: Optional[list[np.ndarray]] = None
    v: Optional[list[np.ndarray]] = None
    step_count: int = 0

    def update(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


OptState = Union[RmsProp, Adam]


def make_optimizer(kind: str, lr: float = 1e-3) -> OptState:
    if kind == "rmsprop":
        return RmsProp(lr=lr)
    if kind == "adam":
        return Adam(lr=lr)
    raise ValueError(f"unknown optimizer {kind!r}")


def optimizer_step(
    params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: OptState
) -> tuple[Sequence[np.ndarray], OptState]:
    """Apply one update in place; parameters and state are returned for chaining."""
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} params vs {len(grads)} grads")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeMismatch(f"param {p.shape} vs grad {g.shape}")
    acc = state.sq if isinstance(state, RmsProp) else state.m
    if acc is not None:
        if len(acc) != len(params) or any(a.shape != p.shape for a, p in zip(acc, params)):
            raise ShapeMismatch("optimizer state does not mirror the parameters")
    state.update(params, grads)
    return params, state
