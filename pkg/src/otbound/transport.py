"""Exact optimal-transport distances between finite empirical measures.

``w_alpha`` solves the transportation LP for the snowflaked ground cost ``|x - y|**alpha``
with a network-simplex solver (POT's ``emd``). ``alpha = 1`` is the ordinary W1.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

# POT probes every installed array backend on import; only numpy is needed here.
for _backend in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_backend}", "1")
import ot  # noqa: E402

ZERO_TOL = 1e-12
MAX_SIMPLEX_ITER = 10**8


@dataclass(frozen=True)
class EmpiricalMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape[0] == 0:
            raise ValueError("empty measure")
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights differ in length")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum():.17g}, expected 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        n = pts.shape[0]
        if n == 0:
            raise ValueError("empty measure")
        return cls(pts, np.full(n, 1.0 / n))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def merged(self) -> "EmpiricalMeasure":
        """Merge duplicate atoms, summing their weights."""
        uniq, inv = np.unique(self.points, axis=0, return_inverse=True)
        if len(uniq) == len(self):
            return self
        w = np.bincount(inv.ravel(), weights=self.weights, minlength=len(uniq))
        return EmpiricalMeasure(uniq, w / w.sum())

    @classmethod
    def from_csv(cls, path) -> "EmpiricalMeasure":
        """One point per row; a column headed ``weight`` (if present) holds the weights."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty file")
        header, body = rows[0], rows[1:]
        try:
            [float(v) for v in header]
            header, body = None, rows
        except ValueError:
            pass
        data = np.array([[float(v) for v in r] for r in body if r], dtype=float)
        if data.size == 0:
            raise ValueError(f"{path}: no points")
        if header is not None and "weight" in [h.strip().lower() for h in header]:
            k = [h.strip().lower() for h in header].index("weight")
            w = data[:, k]
            pts = np.delete(data, k, axis=1)
            return cls(pts, w / w.sum())
        return cls.uniform(data)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([f"x{i}" for i in range(self.dim)] + ["weight"])
            for p, w in zip(self.points, self.weights):
                wr.writerow([repr(float(v)) for v in p] + [repr(float(w))])


@dataclass(frozen=True)
class TransportPlan:
    flows: sparse.coo_matrix
    cost: float
    source: EmpiricalMeasure
    target: EmpiricalMeasure


def _check_pair(a: EmpiricalMeasure, b: EmpiricalMeasure, alpha: float) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def transport_plan(a: EmpiricalMeasure, b: EmpiricalMeasure, alpha: float = 1.0) -> TransportPlan:
    """Optimal coupling for the cost ``|x - y|**alpha`` (duplicates merged first)."""
    _check_pair(a, b, alpha)
    a, b = a.merged(), b.merged()
    cost = cdist(a.points, b.points)
    if alpha != 1:
        cost = cost**alpha
    if len(a) == 1 or len(b) == 1:
        plan = np.outer(a.weights, b.weights)
    else:
        plan = ot.emd(a.weights, b.weights, cost, numItermax=MAX_SIMPLEX_ITER)
    value = float(np.sum(plan * cost))
    if value < ZERO_TOL:
        value = 0.0
    return TransportPlan(sparse.coo_matrix(plan), value, a, b)


def w_alpha(a: EmpiricalMeasure, b: EmpiricalMeasure, alpha: float = 1.0) -> float:
    return transport_plan(a, b, alpha).cost


def w1_1d(a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    """W1 on the line; sorted matching for equal-size uniform measures, LP otherwise."""
    if a.dim != 1 or b.dim != 1:
        raise ValueError("w1_1d needs one-dimensional measures")
    n = len(a)
    uniform = (
        n == len(b)
        and np.allclose(a.weights, 1.0 / n, rtol=0, atol=1e-15)
        and np.allclose(b.weights, 1.0 / n, rtol=0, atol=1e-15)
    )
    if not uniform:
        return w_alpha(a, b, 1.0)
    value = float(np.mean(np.abs(np.sort(a.points[:, 0]) - np.sort(b.points[:, 0]))))
    return 0.0 if value < ZERO_TOL else value


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _trial(sampler: Sampler, n: int, alpha: float, seed: int, trial: int, reference_factor: int) -> float:
    rng = np.random.default_rng([seed, trial])
    sample = np.asarray(sampler(rng, n), dtype=float)
    reference = np.asarray(sampler(rng, reference_factor * n), dtype=float)
    sample = sample.reshape(n, -1)
    reference = reference.reshape(reference_factor * n, -1)
    if sample.shape[1] != reference.shape[1]:
        raise ValueError("sampler returned inconsistent dimensions")
    return w_alpha(EmpiricalMeasure.uniform(sample), EmpiricalMeasure.uniform(reference), alpha)


def mc_wasserstein_mean(
    sampler: Sampler,
    n: int,
    trials: int,
    alpha: float = 1.0,
    seed: int = 0,
    reference_factor: int = 50,
    n_jobs: int = 1,
) -> Tuple[float, float]:
    """Monte-Carlo estimate of ``E[W_alpha(mu, mu^n)]`` with its standard error.

    ``mu`` is proxied by a fresh reference sample of ``reference_factor * n`` atoms in each
    trial. Trial ``t`` draws from ``default_rng([seed, t])`` so results do not depend on
    ``n_jobs``.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    if reference_factor < 50:
        raise ValueError("reference_factor must be at least 50")
    if n_jobs == 1:
        values = [_trial(sampler, n, alpha, seed, t, reference_factor) for t in range(trials)]
    else:
        from joblib import Parallel, delayed

        values = Parallel(n_jobs=n_jobs)(
            delayed(_trial)(sampler, n, alpha, seed, t, reference_factor) for t in range(trials)
        )
    v = np.asarray(values)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(trials))


def uniform_box_sampler(lower, upper) -> Sampler:
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))

    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(lo, hi, size=(n, lo.size))

    return sample


def point_mass_sampler(point) -> Sampler:
    p = np.atleast_1d(np.asarray(point, dtype=float))

    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        return np.broadcast_to(p, (n, p.size)).copy()

    return sample

