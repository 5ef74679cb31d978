"""Losses used for training and bound assembly.

Every loss exposes ``value``, ``d_pred`` (derivative in the prediction), ``d_target``
(derivative in the target, for continuous labels) plus the constants the bounds need:
``lipschitz`` (w.r.t. the prediction) and ``sup`` (``None`` when it depends on the range).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np


def _check_signs(target: np.ndarray) -> None:
    bad = np.flatnonzero((target != 1.0) & (target != -1.0))
    if bad.size:
        raise ValueError(f"labels must be -1 or +1; got {target[bad[0]]!r} at index {bad[0]}")


@dataclass(frozen=True)
class Huber:
    """``r**2`` for ``|r| < 1`` and ``|r|`` otherwise, with ``r = prediction - target``.

    The derivative reaches 2 just inside the quadratic branch, so the Lipschitz
    constant in the residual is 2 (not 1).
    """

    lipschitz: ClassVar[float] = 2.0
    sup: ClassVar[Optional[float]] = None
    discrete_labels: ClassVar[bool] = False
    name: ClassVar[str] = "huber"

    def value(self, prediction, target) -> np.ndarray:
        r = np.asarray(prediction, dtype=float) - np.asarray(target, dtype=float)
        a = np.abs(r)
        return np.where(a < 1.0, r * r, a)

    def d_pred(self, prediction, target) -> np.ndarray:
        r = np.asarray(prediction, dtype=float) - np.asarray(target, dtype=float)
        return np.where(np.abs(r) < 1.0, 2.0 * r, np.sign(r))

    def d_target(self, prediction, target) -> np.ndarray:
        return -self.d_pred(prediction, target)

    def sup_over(self, pred_range, target_range) -> float:
        """Largest loss value when predictions and targets stay in the given intervals."""
        worst = max(abs(pred_range[1] - target_range[0]), abs(target_range[1] - pred_range[0]))
        return float(worst * worst if worst < 1.0 else worst)


@dataclass(frozen=True)
class Ramp:
    """``min{1, (1 - f*y/gamma)_+}`` for labels in {-1, +1}; 1/gamma-Lipschitz, bounded by 1."""

    gamma: float = 1.0
    sup: ClassVar[float] = 1.0
    discrete_labels: ClassVar[bool] = True
    name: ClassVar[str] = "ramp"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("ramp margin gamma must be positive")

    @property
    def lipschitz(self) -> float:
        return 1.0 / self.gamma

    def value(self, prediction, target) -> np.ndarray:
        y = np.asarray(target, dtype=float)
        _check_signs(np.atleast_1d(y))
        m = np.asarray(prediction, dtype=float) * y
        return np.clip(1.0 - m / self.gamma, 0.0, 1.0)

    def d_pred(self, prediction, target) -> np.ndarray:
        y = np.asarray(target, dtype=float)
        _check_signs(np.atleast_1d(y))
        m = np.asarray(prediction, dtype=float) * y
        active = (m > 0.0) & (m < self.gamma)
        return np.where(active, -y / self.gamma, 0.0)

    def d_target(self, prediction, target) -> np.ndarray:
        raise TypeError("ramp loss is defined on discrete labels only")


@dataclass(frozen=True)
class CrossEntropy:
    """Logistic negative log-likelihood ``log(1 + exp(-f*y))`` for labels in {-1, +1}."""

    lipschitz: ClassVar[float] = 1.0
    sup: ClassVar[Optional[float]] = None
    discrete_labels: ClassVar[bool] = True
    name: ClassVar[str] = "cross_entropy"

    def value(self, prediction, target) -> np.ndarray:
        y = np.asarray(target, dtype=float)
        _check_signs(np.atleast_1d(y))
        return np.logaddexp(0.0, -np.asarray(prediction, dtype=float) * y)

    def d_pred(self, prediction, target) -> np.ndarray:
        y = np.asarray(target, dtype=float)
        _check_signs(np.atleast_1d(y))
        m = np.asarray(prediction, dtype=float) * y
        # d/df log(1+exp(-m)) = -y * sigmoid(-m)
        return -y * 0.5 * (1.0 - np.tanh(0.5 * m))

    def d_target(self, prediction, target) -> np.ndarray:
        raise TypeError("cross-entropy is defined on discrete labels only")


LossKind = (Huber, Ramp, CrossEntropy)


def loss_eval(kind, prediction, target):
    """Evaluate a loss; returns a float for scalar inputs and an array otherwise."""
    out = kind.value(prediction, target)
    return float(out) if np.ndim(out) == 0 else out


def zero_one(prediction, target) -> np.ndarray:
    """Misclassification indicator ``1{f*y <= 0}``."""
    return (np.asarray(prediction, dtype=float) * np.asarray(target, dtype=float) <= 0).astype(float)


def loss_from_name(name: str, gamma: float = 1.0):
    name = name.lower().replace("-", "_")
    if name == "huber":
        return Huber()
    if name == "ramp":
        return Ramp(gamma)
    if name in ("cross_entropy", "ce", "logistic"):
        return CrossEntropy()
    raise ValueError(f"unknown loss {name!r}")
