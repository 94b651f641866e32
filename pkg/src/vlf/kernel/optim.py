"""Bias-corrected adaptive optimizer with decoupled weight decay."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, IntegrityError
from .tensor import ParamSet, Tensor


class OptimState:
    """Per-parameter first/second moments plus the shared step counter."""

    def __init__(
        self,
        params: ParamSet,
        lr: float = 4e-5,
        weight_decay: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {lr}")
        if weight_decay < 0:
            raise ConfigError(f"weight decay must be non-negative, got {weight_decay}")
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m: dict[str, Tensor] = {n: np.zeros_like(v) for n, v in params.items()}
        self.v: dict[str, Tensor] = {n: np.zeros_like(v) for n, v in params.items()}


def adam_step(params: ParamSet, state: OptimState) -> ParamSet:
    """One in-place update from accumulated gradients; zeroes them after.

    Weight decay is decoupled: it is added to the adaptive update rather
    than folded into the gradient moments.
    """
    for name in params.names():
        if name not in state.m:
            raise IntegrityError(f"optimizer state missing parameter {name}")
    state.step += 1
    t = state.step
    for name, value in params.items():
        g = params.grad(name)
        if g.shape != value.shape:
            raise IntegrityError(f"gradient shape mismatch for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        update = m_hat / (np.sqrt(v_hat) + state.eps)
        if state.weight_decay:
            update = update + state.weight_decay * value
        value -= state.lr * update
    params.zero_grads()
    return params
