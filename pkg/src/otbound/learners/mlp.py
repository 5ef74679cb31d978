"""Fully-connected leaky-ReLU network with hand-written reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

NEGATIVE_SLOPE = 0.1


@dataclass
class MlpModel:
    """Weights are stored as ``(fan_in, fan_out)`` so a layer is ``h @ W + b``."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    negative_slope: float = NEGATIVE_SLOPE

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for j, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ValueError(f"layer {j}: weight {W.shape} and bias {b.shape} do not match")
            if j and W.shape[0] != self.weights[j - 1].shape[1]:
                raise ValueError(f"layer {j} does not compose with layer {j - 1}")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("the output layer must have width 1")

    @classmethod
    def init(cls, input_dim: int, hidden: Sequence[int] = (64, 64, 64), rng: Optional[np.random.Generator] = None):
        """He-style uniform initialisation (bound ``sqrt(6 / fan_in)``), zero biases."""
        rng = np.random.default_rng() if rng is None else rng
        widths = [int(input_dim), *map(int, hidden), 1]
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, widths: Sequence[int]) -> "MlpModel":
        w = list(widths)
        return cls([np.zeros((a, b)) for a, b in zip(w[:-1], w[1:])], [np.zeros(b) for b in w[1:]])

    @property
    def widths(self) -> List[int]:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_params(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpModel":
        return MlpModel([W.copy() for W in self.weights], [b.copy() for b in self.biases], self.negative_slope)

    def squared_weight_norm(self) -> float:
        return float(sum(np.sum(W * W) for W in self.weights))

    def save(self, path) -> None:
        """Text format: a ``widths`` header line, then one line per flattened array."""
        with Path(path).open("w") as fh:
            fh.write("widths " + " ".join(map(str, self.widths)) + "\n")
            fh.write(f"negative_slope {self.negative_slope!r}\n")
            for W, b in zip(self.weights, self.biases):
                fh.write(" ".join(repr(float(v)) for v in W.ravel()) + "\n")
                fh.write(" ".join(repr(float(v)) for v in b) + "\n")

    @classmethod
    def load(cls, path) -> "MlpModel":
        lines = Path(path).read_text().splitlines()
        widths = [int(v) for v in lines[0].split()[1:]]
        slope = float(lines[1].split()[1])
        weights, biases = [], []
        for j, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
            weights.append(np.array(lines[2 + 2 * j].split(), dtype=float).reshape(a, b))
            biases.append(np.array(lines[3 + 2 * j].split(), dtype=float).reshape(b))
        return cls(weights, biases, slope)


def _as_batch(model: MlpModel, x) -> Tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1 and model.input_dim > 1 or X.ndim == 0
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[None, :] if single else X[:, None]
    if X.shape[1] != model.input_dim:
        raise ValueError(f"input has dimension {X.shape[1]}, model expects {model.input_dim}")
    return X, single


def _forward_tape(model: MlpModel, X: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
    acts, pres = [X], []
    h = X
    last = len(model.weights) - 1
    for j, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ W + b
        if j == last:
            return z[:, 0], acts, pres
        pres.append(z)
        h = np.where(z >= 0, z, model.negative_slope * z)
        acts.append(h)
    raise AssertionError("unreachable")


def _backward(model: MlpModel, acts, pres, upstream: np.ndarray, want_params: bool = True):
    """Backpropagate ``upstream`` (d out per sample). Returns (param grads summed, input grads)."""
    g = upstream[:, None]
    gW: List[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    gb: List[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    for j in range(len(model.weights) - 1, -1, -1):
        if want_params:
            gW[j] = acts[j].T @ g
            gb[j] = g.sum(axis=0)
        g = g @ model.weights[j].T
        if j > 0:
            # subgradient at 0 uses the negative-side slope
            g = g * np.where(pres[j - 1] > 0, 1.0, model.negative_slope)
    return list(zip(gW, gb)), g


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    X, single = _as_batch(model, x)
    out = _forward_tape(model, X)[0]
    return out[0] if single else out


def input_gradient(model: MlpModel, x) -> np.ndarray:
    """Per-point gradient of the network output with respect to its input, shape (n, d)."""
    X, single = _as_batch(model, x)
    _, acts, pres = _forward_tape(model, X)
    _, g = _backward(model, acts, pres, np.ones(len(X)), want_params=False)
    return g[0] if single else g


def loss_and_grad(model: MlpModel, loss, X: np.ndarray, Y: np.ndarray):
    """Mean batch loss, mean-loss parameter gradients and per-sample input gradients."""
    pred, acts, pres = _forward_tape(model, X)
    grads, gx = _backward(model, acts, pres, loss.d_pred(pred, Y))
    n = len(X)
    return float(np.mean(loss.value(pred, Y))), [(dW / n, db / n) for dW, db in grads], gx


def mlp_grad(model: MlpModel, loss, x, y):
    """Gradients of the mean loss over the batch w.r.t. every parameter, and per-sample
    loss gradients w.r.t. the inputs.

    Returns ``(param_grads, input_grad)`` where ``param_grads`` is a list of ``(dW, db)``.
    """
    X, single = _as_batch(model, x)
    _, grads, gx = loss_and_grad(model, loss, X, np.atleast_1d(np.asarray(y, dtype=float)))
    return grads, (gx[0] if single else gx)


def spectral_lipschitz_upper(model: MlpModel) -> float:
    """Product of layer operator norms; an upper bound on the global Lipschitz constant."""
    return float(np.prod([np.linalg.norm(W, 2) for W in model.weights]))
