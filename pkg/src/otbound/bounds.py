"""Assembly of generalization certificates from partition statistics.

Every bound is a sum of nonnegative terms:

* ``cost_transport`` -- per-cell transport cost, ``sum_P (N_P/N) * rate(N_P) * diam(P) * K_P``
  scaled by the rate constant, where ``K_P`` is the cell's regularity factor;
* ``err_transport`` -- concentration of the transport cost around its mean;
* ``cost_partition`` -- concentration of the multinomial cell counts;
* ``shift_term`` -- optional penalty for evaluating under a shifted distribution;
* ``empirical_term`` -- optional training error (classification certificates bound the
  error itself, not just the gap).

Rates are always routed through :mod:`otbound.rates`, so the regime (below, at, or above
the critical dimension) is selected from the dimension of the space being transported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .partitioning import Partition, prop10_strip_count
from .rates import RegularityClass, holder_constant, holder_rate

CSV_COLUMNS = (
    "theorem", "N", "delta", "k", "cost_transport", "err_transport", "cost_partition",
    "shift_term", "total", "vacuous", "mesh_per_dim", "seed",
)


class Theorem(Enum):
    PARTITION = "partition"
    GLOBAL = "global"
    CLASSIFICATION = "classification"
    MANIFOLD = "manifold"
    SHIFT = "shift"
    RADEMACHER = "rademacher"
    CONSTRUCTION_LOCAL = "construction_local"
    CONSTRUCTION_GLOBAL = "construction_global"


def _finite_nonneg(name: str, v: Optional[float], positive: bool = False) -> None:
    if v is None:
        return
    if not math.isfinite(v) or v < 0 or (positive and v == 0):
        raise ValueError(f"{name} must be {'positive' if positive else 'nonnegative'} and finite, got {v!r}")


@dataclass(frozen=True)
class BoundInputs:
    N: int
    delta: float
    loss_lip: float
    predictor_lip: float
    loss_sup: float
    input_dim: int
    gamma: Optional[float] = None
    intrinsic_dim: Optional[int] = None
    manifold_constant: Optional[float] = None
    shift_w1: Optional[float] = None
    shift_w1_empirical: bool = False
    composed_lip: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if int(self.input_dim) != self.input_dim or self.input_dim < 1:
            raise ValueError("input_dim must be a positive integer")
        _finite_nonneg("loss_lip", self.loss_lip, positive=True)
        _finite_nonneg("predictor_lip", self.predictor_lip)
        _finite_nonneg("loss_sup", self.loss_sup, positive=True)
        _finite_nonneg("gamma", self.gamma, positive=True)
        _finite_nonneg("manifold_constant", self.manifold_constant, positive=True)
        _finite_nonneg("shift_w1", self.shift_w1)
        _finite_nonneg("composed_lip", self.composed_lip)
        if self.intrinsic_dim is not None and (int(self.intrinsic_dim) != self.intrinsic_dim or self.intrinsic_dim < 1):
            raise ValueError("intrinsic_dim must be a positive integer")

    def err_factor(self, tightened: bool) -> float:
        """Global Lipschitz factor of the loss-composed predictor used by the deviation term.

        The split ``L_loss * max{1, L_f}`` always applies; with ``tightened`` and a measured
        ``composed_lip`` the smaller ``max{L_loss, Lip(loss o f)}`` is used instead.
        """
        split = self.loss_lip * max(1.0, self.predictor_lip)
        if tightened and self.composed_lip is not None:
            return min(split, max(self.loss_lip, self.composed_lip))
        return split

    @property
    def log_term(self) -> float:
        """``ln(4/delta)``: the confidence is split evenly between two events."""
        return math.log(4.0 / self.delta)


@dataclass(frozen=True)
class BoundReport:
    theorem: Theorem
    N: int
    delta: float
    k: int
    cost_transport: float
    err_transport: float
    cost_partition: float
    shift_term: float = 0.0
    empirical_term: float = 0.0
    loss_sup: float = math.inf
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("cost_transport", "err_transport", "cost_partition", "shift_term", "empirical_term"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be nonnegative, got {v!r}")

    @property
    def total(self) -> float:
        return math.fsum((self.empirical_term, self.cost_transport, self.err_transport,
                          self.cost_partition, self.shift_term))

    @property
    def vacuous(self) -> bool:
        """True when the certificate exceeds the largest possible loss value."""
        return self.total > self.loss_sup

    def to_row(self, seed: Optional[int] = None) -> dict:
        mesh = self.provenance.get("mesh_per_dim")
        return {
            "theorem": self.theorem.value,
            "N": self.N,
            "delta": repr(float(self.delta)),
            "k": self.k,
            "cost_transport": repr(float(self.cost_transport)),
            "err_transport": repr(float(self.err_transport)),
            "cost_partition": repr(float(self.cost_partition)),
            "shift_term": repr(float(self.shift_term)),
            "total": repr(float(self.total)),
            "vacuous": int(self.vacuous),
            "mesh_per_dim": "" if mesh is None else "x".join(str(int(m)) for m in mesh),
            "seed": "" if seed is None else int(seed),
        }


# --------------------------------------------------------------------------- helpers

def _holder1(dim: int) -> RegularityClass:
    return RegularityClass.holder(1, dim)


def _weighted_rate_sum(counts, diams, factors, N: int, rate) -> float:
    """``sum_P (N_P/N) * rate(N_P) * diam(P) * K_P``; empty cells contribute nothing."""
    terms = [
        (n / N) * rate(int(n)) * float(dm) * float(kf)
        for n, dm, kf in zip(counts, diams, factors)
        if n > 0
    ]
    return math.fsum(terms)


def _cost_partition(inputs: BoundInputs, k: int) -> float:
    if k == 1:
        return 0.0
    N = inputs.N
    return inputs.loss_sup * max(math.sqrt(2.0 * inputs.log_term / N), math.sqrt(k / N))


def _err_transport(inputs: BoundInputs, max_diam: float, tightened: bool) -> float:
    return math.sqrt(inputs.log_term / inputs.N) * inputs.err_factor(tightened) * max_diam


def _check_partition(inputs: BoundInputs, partition: Partition):
    counts = partition.counts
    if int(counts.sum()) != inputs.N:
        raise ValueError(f"cell counts sum to {int(counts.sum())}, expected N = {inputs.N}")
    lips = partition.local_lips
    missing = np.flatnonzero((counts > 0) & np.isnan(lips))
    if missing.size:
        raise ValueError(f"cell {int(missing[0])} holds samples but has no local Lipschitz estimate")
    return counts, partition.diameters, np.nan_to_num(lips, nan=0.0)


def _regularity_factors(inputs: BoundInputs, lips: np.ndarray, tightened: bool) -> np.ndarray:
    """Tightened: ``max{L_loss, Lip(loss o f | P)}``; strict: ``L_loss * max{1, Lip(f | P)}``."""
    if tightened:
        return np.maximum(inputs.loss_lip, lips)
    return inputs.loss_lip * np.maximum(1.0, lips)


# --------------------------------------------------------------------------- bounds

def theorem5_bound(inputs: BoundInputs, partition: Partition, tightened: bool = True,
                   mesh_per_dim=None) -> BoundReport:
    """Local transport bound on the generalization gap for a partition of inputs x labels.

    ``local_lip`` must hold ``Lip(loss o f | P)`` when ``tightened`` and ``Lip(f | P_X)``
    otherwise.
    """
    counts, diams, lips = _check_partition(inputs, partition)
    dz = inputs.input_dim + 1
    reg = _holder1(dz)
    C = holder_constant(reg)
    factors = _regularity_factors(inputs, lips, tightened)
    cost = C * _weighted_rate_sum(counts, diams, factors, inputs.N, lambda n: holder_rate(reg, n))
    k = len(partition)
    return BoundReport(
        Theorem.PARTITION, inputs.N, inputs.delta, k, cost,
        _err_transport(inputs, float(diams.max()), tightened), _cost_partition(inputs, k),
        loss_sup=inputs.loss_sup,
        provenance={"partition_size": k, "transport_dim": dz, "regime": reg.regime.name,
                    "rate_constant": C, "tightened": tightened, "mesh_per_dim": mesh_per_dim},
    )


def global_bound(inputs: BoundInputs, global_lip_composed: float, domain_diam: float,
                 tightened: bool = True, empirical_term: float = 0.0, mesh_per_dim=None) -> BoundReport:
    """Single-cell version of :func:`theorem5_bound` (no partition cost).

    ``global_lip_composed`` is ``Lip(loss o f)`` when ``tightened`` else ``Lip(f)``.
    """
    if not domain_diam > 0:
        raise ValueError("domain diameter must be positive")
    _finite_nonneg("global Lipschitz constant", global_lip_composed)
    dz = inputs.input_dim + 1
    reg = _holder1(dz)
    C = holder_constant(reg)
    factor = _regularity_factors(inputs, np.array([global_lip_composed]), tightened)[0]
    cost = C * _weighted_rate_sum([inputs.N], [domain_diam], [factor], inputs.N, lambda n: holder_rate(reg, n))
    return BoundReport(
        Theorem.GLOBAL, inputs.N, inputs.delta, 1, cost, _err_transport(inputs, domain_diam, tightened), 0.0,
        empirical_term=float(empirical_term), loss_sup=inputs.loss_sup,
        provenance={"partition_size": 1, "transport_dim": dz, "regime": reg.regime.name,
                    "rate_constant": C, "tightened": tightened, "mesh_per_dim": mesh_per_dim},
    )


def classification_bound(inputs: BoundInputs, paired_partition: Partition, ramp_train_error: float,
                         tightened: bool = True, mesh_per_dim=None) -> BoundReport:
    """Bound on the misclassification probability through the margin ramp loss.

    Labels are discrete, so only the inputs are transported (dimension ``d``), separately on
    each label slice; a Jensen step merges the two slices of an input cell at the price of
    ``2^(1/d)``. With ``tightened`` the paired cells carry ``Lip(ramp o f | P)`` and the
    larger of the two slices is used; otherwise they carry ``Lip(f | P)`` divided by gamma.
    """
    if inputs.gamma is None:
        raise ValueError("the classification bound needs the ramp margin gamma")
    if not paired_partition.paired:
        raise ValueError("the classification bound needs a label-paired partition")
    _finite_nonneg("ramp training error", ramp_train_error)
    counts, diams, lips = _check_partition(inputs, paired_partition)
    k = len(paired_partition) // 2
    n_in = counts[:k] + counts[k:]
    diam_in = diams[:k]
    if tightened:
        factors = np.maximum(lips[:k], lips[k:])
    else:
        factors = np.maximum(lips[:k], lips[k:]) / inputs.gamma
    d = inputs.input_dim
    reg = _holder1(d)
    C = holder_constant(reg)
    cost = 2.0 ** (1.0 / d) * C * _weighted_rate_sum(n_in, diam_in, factors, inputs.N, lambda n: holder_rate(reg, n))
    lip_err = inputs.predictor_lip / inputs.gamma
    if tightened and inputs.composed_lip is not None:
        lip_err = min(lip_err, inputs.composed_lip)
    err = math.sqrt(inputs.log_term / inputs.N) * lip_err * float(diam_in.max())
    part = math.sqrt(2.0 / inputs.N) * max(math.sqrt(inputs.log_term), math.sqrt(k))
    return BoundReport(
        Theorem.CLASSIFICATION, inputs.N, inputs.delta, k, cost, err, part,
        empirical_term=float(ramp_train_error), loss_sup=1.0,
        provenance={"partition_size": k, "paired_cells": 2 * k, "transport_dim": d,
                    "regime": reg.regime.name, "rate_constant": C, "tightened": tightened,
                    "gamma": inputs.gamma, "partition_count_term": "sqrt(k)",
                    "mesh_per_dim": mesh_per_dim},
    )


def manifold_bound(inputs: BoundInputs, partition: Partition, tightened: bool = True,
                   mesh_per_dim=None) -> BoundReport:
    """Variant for data concentrated near a ``intrinsic_dim``-dimensional set.

    The per-cell transport term is ``C * N_P^(1 - 1/intrinsic_dim) / N``; the constant is
    user supplied because only its existence is known.
    """
    if inputs.intrinsic_dim is None or inputs.manifold_constant is None:
        raise ValueError("the manifold bound needs intrinsic_dim and manifold_constant")
    counts, diams, lips = _check_partition(inputs, partition)
    dt = int(inputs.intrinsic_dim)
    factors = _regularity_factors(inputs, lips, tightened)
    cost = inputs.manifold_constant * _weighted_rate_sum(counts, diams, factors, inputs.N, lambda n: n ** (-1.0 / dt))
    k = len(partition)
    return BoundReport(
        Theorem.MANIFOLD, inputs.N, inputs.delta, k, cost,
        _err_transport(inputs, float(diams.max()), tightened), _cost_partition(inputs, k),
        loss_sup=inputs.loss_sup,
        provenance={"partition_size": k, "intrinsic_dim": dt, "rate_constant": inputs.manifold_constant,
                    "constant_user_supplied": True, "tightened": tightened, "mesh_per_dim": mesh_per_dim},
    )


def shift_bound(inputs: BoundInputs, global_lip_composed: float, domain_diam: float,
                tightened: bool = True, mesh_per_dim=None) -> BoundReport:
    """Global bound on the risk under a shifted distribution at Wasserstein distance ``shift_w1``."""
    if inputs.shift_w1 is None:
        raise ValueError("the shift bound needs shift_w1")
    base = global_bound(inputs, global_lip_composed, domain_diam, tightened, mesh_per_dim=mesh_per_dim)
    shift = inputs.loss_lip * max(1.0, inputs.predictor_lip) * inputs.shift_w1
    prov = dict(base.provenance, shift_w1=inputs.shift_w1,
                shift_w1_source="empirical" if inputs.shift_w1_empirical else "supplied")
    return BoundReport(Theorem.SHIFT, inputs.N, inputs.delta, 1, base.cost_transport, base.err_transport,
                       0.0, shift_term=shift, loss_sup=inputs.loss_sup, provenance=prov)


# --------------------------------------------------------------------------- comparator

class RademacherTerms(NamedTuple):
    entropy: float
    discretization: float


def rademacher_complexity_terms(d: int, D: float, B: float, L: float, N: int) -> RademacherTerms:
    """The two parts of the complexity bound for ``L``-Lipschitz functions on ``[0, B]^d``
    with sup-norm at most ``D``."""
    for name, v in (("D", D), ("B", B), ("L", L)):
        _finite_nonneg(name, v, positive=True)
    e = 1.0 / (d + 3)
    grid = (16.0 * B * L) ** d
    first = (8.0 * (d + 1) ** 2 * D * D * grid / N) ** e
    second = 4.0 * math.sqrt(2.0) * D * (grid / N / (8.0 * (d + 1) * D) ** (d + 1)) ** e
    return RademacherTerms(first, second)


def rademacher_bound(d: int, D: float, B: float, L: float, loss_lip: float, loss_sup: float,
                     N: int, delta: float) -> float:
    """Uniform bound over all ``L``-Lipschitz predictors (contraction + complexity + McDiarmid)."""
    return rademacher_report(d, D, B, L, loss_lip, loss_sup, N, delta).total


def rademacher_report(d: int, D: float, B: float, L: float, loss_lip: float, loss_sup: float,
                      N: int, delta: float, empirical_term: float = 0.0) -> BoundReport:
    """The uniform bound as a report: complexity in ``cost_transport``, deviation in ``err_transport``."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    t = rademacher_complexity_terms(d, D, B, L, N)
    complexity = 4.0 * loss_lip * t.entropy + 4.0 * loss_lip * t.discretization
    dev = loss_sup * math.sqrt(8.0 * math.log(2.0 / delta) / N)
    return BoundReport(Theorem.RADEMACHER, N, delta, 1, complexity, dev, 0.0,
                       empirical_term=float(empirical_term), loss_sup=loss_sup,
                       provenance={"D": D, "B": B, "L": L, "cost_transport": "complexity",
                                   "err_transport": "deviation"})


# --------------------------------------------------------------------------- construction

class ConstructionTerms(NamedTuple):
    cost_transport: float
    err_transport: float
    cost_partition: float

    @property
    def total(self) -> float:
        return math.fsum(self)


class ClosedForms(NamedTuple):
    local_total: float
    global_cost_transport: float


def _check_construction_n(N: int) -> None:
    if int(N) != N or N < 16:
        raise ValueError("the closed forms need an integer N >= 16")


def prop10_local_terms(N: int, loss_lip: float = 1.0, delta: float = 0.05, loss_sup: float = 1.0) -> ConstructionTerms:
    """Local-bound terms for the one-neuron ReLU whose slope grows like sqrt(N)/log2(log2 N)
    on the strip/column partition of the unit square."""
    _check_construction_n(N)
    llN = math.log2(math.log2(N))
    c21 = holder_constant(_holder1(2))
    log_term = math.log(4.0 / delta)
    cost = 8.0 * math.sqrt(2.0) * c21 * loss_lip / (llN * N**0.1)
    err = math.sqrt(2.0) * loss_lip * math.sqrt(log_term) / llN
    k = 2 * prop10_strip_count(N) - 1
    part = loss_sup / math.sqrt(N) * max(math.sqrt(2.0 * log_term), math.sqrt(k))
    return ConstructionTerms(cost, err, part)


def prop10_global_cost(N: int, loss_lip: float = 1.0) -> float:
    """Global transport cost for the same construction; grows like log2 N."""
    _check_construction_n(N)
    return math.sqrt(2.0) * holder_constant(_holder1(2)) * loss_lip * (8.0 + math.log2(N))


def prop10_closed_forms(N: int, loss_lip: float = 1.0, delta: float = 0.05, loss_sup: float = 1.0) -> ClosedForms:
    return ClosedForms(prop10_local_terms(N, loss_lip, delta, loss_sup).total, prop10_global_cost(N, loss_lip))


def prop10_reports(N: int, loss_lip: float = 1.0, delta: float = 0.05, loss_sup: float = 1.0):
    """Local and global closed forms as reports (for CSV output)."""
    t = prop10_local_terms(N, loss_lip, delta, loss_sup)
    k = 2 * prop10_strip_count(N) - 1
    local = BoundReport(Theorem.CONSTRUCTION_LOCAL, N, delta, k, *t, loss_sup=loss_sup)
    glob = BoundReport(Theorem.CONSTRUCTION_GLOBAL, N, delta, 1, prop10_global_cost(N, loss_lip), 0.0, 0.0,
                       loss_sup=loss_sup)
    return local, glob
