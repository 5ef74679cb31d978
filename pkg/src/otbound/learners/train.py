"""Mini-batch training loop with optional adversarial perturbation and early stopping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .mlp import MlpModel, loss_and_grad, mlp_grad
from .optim import AdamState, adamw_step
from .tasks import BATCH_STREAM, INIT_STREAM, Dataset


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.05
    lr_decay: float = 0.85
    decay_every: int = 1000
    iterations: int = 20000
    batch: int = 8
    weight_decay: float = 0.0
    adv_eps: float = 0.0
    seed: int = 0
    hidden: Tuple[int, ...] = (64, 64, 64)

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if self.iterations < 1 or self.batch < 1:
            raise ValueError("iterations and batch must be positive")
        if self.weight_decay < 0 or self.adv_eps < 0:
            raise ValueError("weight decay and adversarial eps must be nonnegative")


def adversarial_example(model: MlpModel, loss, x, y, eps: float, domain=None) -> np.ndarray:
    """Move inputs along the raw loss gradient by ``eps`` and clip back into ``domain``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    x = np.asarray(x, dtype=float)
    if eps == 0:
        return x.copy()
    _, gx = mlp_grad(model, loss, x, y)
    x_adv = x + eps * gx.reshape(x.shape)
    if domain is not None:
        x_adv = np.clip(x_adv, np.asarray(domain.lower), np.asarray(domain.upper))
    return x_adv


def _batches(rng: np.random.Generator, n: int, batch: int):
    """Endless stream of index batches; each epoch is a fresh permutation, tail dropped."""
    per_epoch = n // batch
    while True:
        perm = rng.permutation(n)
        for k in range(per_epoch):
            yield perm[k * batch:(k + 1) * batch]


def train(task: Dataset, config: TrainConfig, loss, early_stop_at: Optional[int] = None) -> Tuple[MlpModel, List[float]]:
    """Train from a seeded initialisation; returns the model and the per-iteration batch loss."""
    n = len(task)
    if config.batch > n:
        raise ValueError(f"batch size {config.batch} exceeds dataset size {n}")
    model = MlpModel.init(task.x.shape[1], config.hidden, np.random.default_rng([config.seed, INIT_STREAM]))
    state = AdamState.zeros_like(model)
    batches = _batches(np.random.default_rng([config.seed, BATCH_STREAM]), n, config.batch)
    stop = config.iterations if early_stop_at is None else min(config.iterations, int(early_stop_at))
    history: List[float] = []
    for it in range(stop):
        idx = next(batches)
        xb, yb = task.x[idx], task.y[idx]
        if config.adv_eps > 0:
            xb = adversarial_example(model, loss, xb, yb, config.adv_eps, task.domain)
        value, grads, _ = loss_and_grad(model, loss, xb, yb)
        history.append(value)
        adamw_step(model, grads, config, it, state)
    return model, history

