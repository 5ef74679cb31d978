"""The two synthetic learning problems: 1-D noisy logistic regression and 2-D binary
classification with a small negative disk near (2, 2)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit

from ..partitioning import Box

REGRESSION_DOMAIN = Box((-5.0,), (5.0,))
REGRESSION_LABELS = Box((-1.0,), (2.0,))
REGRESSION_NOISE = 0.1
CLASSIFICATION_DOMAIN = Box((-5.0, -5.0), (5.0, 5.0))

# independent child streams of one seed
DATA_STREAM, INIT_STREAM, BATCH_STREAM, TEST_STREAM = 0, 1, 2, 3


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # (N, d)
    y: np.ndarray  # (N,)
    domain: Box
    task: str
    label_box: Optional[Box] = None  # set for continuous labels

    def __post_init__(self):
        if len(self.x) == 0 or len(self.x) != len(self.y):
            raise ValueError("dataset must be nonempty with one label per input")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def discrete(self) -> bool:
        return self.label_box is None

    @property
    def joint(self) -> np.ndarray:
        """Samples as points of the product space, label in the last column."""
        return np.column_stack([self.x, self.y])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(self.x.shape[1])] + ["y"])
            for xi, yi in zip(self.x, self.y):
                w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


def regression_target(x) -> np.ndarray:
    """Noise-free regression function; equals 1/2 at x = -2."""
    return expit(-5.0 * (np.asarray(x, dtype=float) + 2.0))


def logit_field(x) -> np.ndarray:
    """Class log-odds on the plane; strongly positive except in a small disk around (2, 2)."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return 10.0 * np.hypot(x1 - 2.0, x2 - 2.0) - 0.25 * np.sin(2.0 * x1) + 1.5 * np.cos(x2)


def sample_regression(rng: np.random.Generator, n: int):
    x = rng.uniform(-5.0, 5.0, size=(n, 1))
    y = regression_target(x[:, 0]) + REGRESSION_NOISE * rng.standard_normal(n)
    return x, np.clip(y, -1.0, 2.0)


def sample_labels(rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
    """+1 with probability sigmoid(logit_field(x)), else -1."""
    p = expit(logit_field(x))
    return np.where(rng.uniform(size=p.shape) < p, 1.0, -1.0)


def sample_classification(rng: np.random.Generator, n: int):
    x = rng.uniform(-5.0, 5.0, size=(n, 2))
    return x, sample_labels(rng, x)


def _check_n(n: int) -> int:
    if int(n) < 1:
        raise ValueError("need at least one sample")
    return int(n)


def synth_regression(n: int, seed: int) -> Dataset:
    x, y = sample_regression(np.random.default_rng([seed, DATA_STREAM]), _check_n(n))
    return Dataset(x, y, REGRESSION_DOMAIN, "regression", REGRESSION_LABELS)


def synth_classification(n: int, seed: int) -> Dataset:
    x, y = sample_classification(np.random.default_rng([seed, DATA_STREAM]), _check_n(n))
    return Dataset(x, y, CLASSIFICATION_DOMAIN, "classification")


def make_dataset(task: str, n: int, seed: int) -> Dataset:
    if task == "regression":
        return synth_regression(n, seed)
    if task == "classification":
        return synth_classification(n, seed)
    raise ValueError(f"unknown task {task!r}")


def test_sample(task: str, n: int, seed: int):
    """Fresh draws for test-risk estimation, on a stream disjoint from the training data."""
    rng = np.random.default_rng([seed, TEST_STREAM])
    return (sample_regression if task == "regression" else sample_classification)(rng, n)
