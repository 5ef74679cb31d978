"""AdamW with decoupled weight decay and a stepwise learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .mlp import MlpModel

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


def effective_lr(lr: float, iteration: int, lr_decay: float = 0.85, decay_every: int = 1000) -> float:
    return lr * lr_decay ** (iteration // decay_every)


@dataclass
class AdamState:
    """First/second moment buffers, one pair per parameter array (weights then biases)."""

    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, model: MlpModel) -> "AdamState":
        params = [*model.weights, *model.biases]
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adamw_step(model: MlpModel, grads, config, iteration: int, state: AdamState) -> MlpModel:
    """One in-place update; ``grads`` is a list of ``(dW, db)`` pairs. Returns ``model``.

    Weight decay shrinks weight matrices only (biases are not decayed) and is applied
    separately from the adaptive step.
    """
    lr = effective_lr(config.lr, iteration, config.lr_decay, config.decay_every)
    t = iteration + 1
    c1 = 1.0 - BETA1**t
    c2 = 1.0 - BETA2**t
    L = len(model.weights)
    params = [*model.weights, *model.biases]
    flat = [g for g, _ in grads] + [g for _, g in grads]
    for i, (p, g) in enumerate(zip(params, flat)):
        if i < L and config.weight_decay > 0:
            p -= lr * config.weight_decay * p
        m, v = state.m[i], state.v[i]
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + EPS)
    return model
