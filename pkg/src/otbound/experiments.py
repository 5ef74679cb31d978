"""Experiment pipelines: train, measure regularity, assemble bounds, write CSV rows.

Every pipeline takes a :class:`RunConfig` and returns a list of row dictionaries with a
fixed column order; :func:`write_csv` serialises them deterministically (``repr`` floats,
``\\n`` line endings, no timestamps), so identical configurations give identical files.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import (
    CSV_COLUMNS,
    BoundInputs,
    BoundReport,
    classification_bound,
    global_bound,
    prop10_reports,
    rademacher_report,
    shift_bound,
    theorem5_bound,
)
from .learners.losses import CrossEntropy, Huber, Ramp, zero_one
from .learners.mlp import MlpModel, mlp_forward
from .learners.tasks import (
    CLASSIFICATION_DOMAIN,
    REGRESSION_DOMAIN,
    REGRESSION_LABELS,
    Dataset,
    make_dataset,
    test_sample,
)
from .learners.train import TrainConfig, train
from .lipschitz import DEFAULT_MESH, GradField, global_lipschitz, grad_norm_field, local_lipschitz, mesh_points
from .partitioning import (
    Box,
    Partition,
    assign_counts,
    build_grid_partition,
    build_paired_partition,
)
from .rates import RegularityClass, holder_constant, holder_rate
from .transport import EmpiricalMeasure, mc_wasserstein_mean, uniform_box_sampler, w_alpha

DESK_ITERATIONS = 2000
PAPER_ITERATIONS = 20000
RAMP_GAMMA = 5.0
REGRESSION_LABEL_MESH = 256
# Largest loss slope across the label jump from -1 to +1 of a loss valued in [0, 1].
LABEL_JUMP_SLOPE = 0.5


class Experiment(Enum):
    BOUND = "bound"
    PARTITION_SWEEP = "sweep-partitions"
    SIZE_SWEEP = "sweep-size"
    REG_SWEEP = "sweep-reg"
    SHIFT = "shift"
    CONCENTRATION = "concentration"
    PROP10 = "prop10"
    HEATMAP = "heatmap"


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "bound"
    task: str = "regression"
    seeds: Tuple[int, ...] = tuple(range(10))
    n_list: Tuple[int, ...] = (2560,)
    delta: float = 0.05
    paper_scale: bool = False
    iterations: Optional[int] = None
    hidden: Tuple[int, ...] = (64, 64, 64)
    weight_decay: float = 0.0
    adv_eps: float = 0.0
    early_stop: Optional[int] = None
    partition: Optional[str] = None
    partitions: Tuple[str, ...] = ()
    mesh_per_dim: Optional[Tuple[int, ...]] = None
    tightened: bool = True
    gamma: float = RAMP_GAMMA
    test_samples: int = 100_000
    reg_kind: str = "weight_decay"
    reg_values: Tuple[float, ...] = (0.0, 0.001, 0.01, 0.1)
    widths: Tuple[int, ...] = (32, 64, 128, 256)
    depths: Tuple[int, ...] = (1, 2, 3, 4)
    shift_norms: Tuple[float, ...] = (0.0, 0.5, 1.0)
    shift_samples: int = 256
    trials: int = 200
    alpha: float = 1.0
    dim: int = 2
    out: str = "results"
    n_jobs: int = 1

    def __post_init__(self):
        Experiment(self.experiment)
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")
        if not self.seeds or not self.n_list:
            raise ValueError("seeds and n_list must be nonempty")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")

    @property
    def train_iterations(self) -> int:
        if self.iterations is not None:
            return int(self.iterations)
        return PAPER_ITERATIONS if self.paper_scale else DESK_ITERATIONS

    @property
    def default_partition(self) -> str:
        if self.partition is not None:
            return self.partition
        return "5x5" if self.task == "regression" else "30"

    @property
    def sweep_partitions(self) -> Tuple[str, ...]:
        if self.partitions:
            return self.partitions
        if self.task == "regression":
            return tuple(f"{mx}x{my}" for my in (1, 2, 5) for mx in (1, 2, 4, 8, 16, 32, 64))
        return tuple(str(m) for m in (1, 2, 3, 5, 8, 10, 15, 20, 30, 40, 50, 64))

    def config_hash(self) -> str:
        """Short digest of every setting that can change results (not ``out``/``n_jobs``)."""
        payload = {k: v for k, v in asdict(self).items() if k not in ("out", "n_jobs")}
        blob = json.dumps(payload, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def metadata(self) -> dict:
        return dict(asdict(self), train_iterations=self.train_iterations, config_hash=self.config_hash())


# --------------------------------------------------------------------------- config IO

_TUPLE_INT = {"seeds", "n_list", "hidden", "mesh_per_dim", "widths", "depths"}
_TUPLE_FLOAT = {"reg_values", "shift_norms"}
_TUPLE_STR = {"partitions"}


def _parse_value(name: str, raw: str, kind):
    raw = raw.strip()
    if name in _TUPLE_INT:
        return tuple(int(v) for v in raw.replace(",", " ").split()) if raw else None
    if name in _TUPLE_FLOAT:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if name in _TUPLE_STR:
        return tuple(v for v in raw.replace(",", " ").split())
    if raw.lower() in ("", "none"):
        return None
    if kind is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    if name in ("iterations", "early_stop", "test_samples", "shift_samples", "trials", "dim", "n_jobs"):
        return int(raw)
    if name in ("delta", "weight_decay", "adv_eps", "gamma", "alpha"):
        return float(raw)
    return raw


def load_config(path, **overrides) -> RunConfig:
    """Read ``key = value`` lines from the ``[run]`` section (or a section-less file)."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {p}: {exc}") from exc
    parser = configparser.ConfigParser()
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    parser.read_string(text, source=str(p))
    section = parser["run"] if parser.has_section("run") else parser[parser.sections()[0]]
    kinds = {f.name: (bool if f.type in ("bool", bool) else None) for f in fields(RunConfig)}
    values = {}
    for key, raw in section.items():
        name = key.replace("-", "_")
        if name not in kinds:
            raise ValueError(f"{p}: unknown config key {key!r}")
        values[name] = _parse_value(name, raw, kinds[name])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def write_csv(rows: Sequence[dict], path, columns: Optional[Sequence[str]] = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    try:
        with p.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n", extrasaction="raise")
            w.writeheader()
            for r in rows:
                w.writerow({k: _fmt(v) for k, v in r.items()})
    except OSError as exc:
        raise OSError(f"cannot write results to {p}: {exc}") from exc
    return p


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


# --------------------------------------------------------------------------- fitting

@dataclass
class Fit:
    """A trained predictor plus everything the bounds need about it."""

    task: str
    N: int
    seed: int
    model: MlpModel
    data: Dataset
    train_risk: float
    test_risk: float
    ramp_train_error: float
    predictor_field: GradField
    composed_field: GradField
    loss_lip: float
    loss_sup: float
    predictor_lip: float
    composed_lip: float
    pred_sup: float
    mesh_per_dim: Tuple[int, ...]

    @property
    def gap(self) -> float:
        return self.test_risk - self.train_risk


def _train_config(cfg: RunConfig, seed: int, **over) -> TrainConfig:
    base = dict(
        iterations=cfg.train_iterations,
        batch=8 if cfg.task == "regression" else 16,
        weight_decay=cfg.weight_decay,
        adv_eps=cfg.adv_eps,
        seed=seed,
        hidden=tuple(cfg.hidden),
    )
    base.update(over)
    return TrainConfig(**base)


def fit(cfg: RunConfig, N: int, seed: int, early_stop: Optional[int] = None, **train_over) -> Fit:
    data = make_dataset(cfg.task, N, seed)
    tcfg = _train_config(cfg, seed, **train_over)
    stop = cfg.early_stop if early_stop is None else early_stop
    mesh = tuple(cfg.mesh_per_dim) if cfg.mesh_per_dim else DEFAULT_MESH[data.x.shape[1]]
    x_test, y_test = test_sample(cfg.task, cfg.test_samples, seed)
    if cfg.task == "regression":
        loss = Huber()
        model, _ = train(data, tcfg, loss, stop)
        train_risk = float(np.mean(loss.value(mlp_forward(model, data.x), data.y)))
        test_risk = float(np.mean(loss.value(mlp_forward(model, x_test), y_test)))
        labels = np.linspace(REGRESSION_LABELS.lower[0], REGRESSION_LABELS.upper[0], REGRESSION_LABEL_MESH)
        composed = grad_norm_field(model, loss, data.domain, mesh, labels)
        pred_field = grad_norm_field(model, None, data.domain, mesh)
        preds = mlp_forward(model, pred_field.mesh_points)
        loss_sup = loss.sup_over((float(preds.min()), float(preds.max())),
                                 (REGRESSION_LABELS.lower[0], REGRESSION_LABELS.upper[0]))
        loss_lip, ramp_err = loss.lipschitz, 0.0
        composed_lip = global_lipschitz(composed)
    else:
        model, _ = train(data, tcfg, CrossEntropy(), stop)
        ramp = Ramp(cfg.gamma)
        train_pred = mlp_forward(model, data.x)
        train_risk = float(np.mean(zero_one(train_pred, data.y)))
        test_risk = float(np.mean(zero_one(mlp_forward(model, x_test), y_test)))
        ramp_err = float(np.mean(ramp.value(train_pred, data.y)))
        composed = grad_norm_field(model, ramp, data.domain, mesh, (-1.0, 1.0))
        pred_field = grad_norm_field(model, None, data.domain, mesh)
        preds = mlp_forward(model, pred_field.mesh_points)
        loss_sup, loss_lip = 1.0, ramp.lipschitz
        composed_lip = global_lipschitz(composed)
    return Fit(cfg.task, N, seed, model, data, train_risk, test_risk, ramp_err, pred_field, composed,
               loss_lip, loss_sup, global_lipschitz(pred_field), composed_lip,
               float(np.max(np.abs(preds))), mesh)


def _inputs(cfg: RunConfig, f: Fit, **extra) -> BoundInputs:
    return BoundInputs(
        N=f.N, delta=cfg.delta, loss_lip=f.loss_lip, predictor_lip=f.predictor_lip,
        loss_sup=f.loss_sup, input_dim=f.data.x.shape[1],
        gamma=cfg.gamma if f.task == "classification" else None,
        composed_lip=f.composed_lip, **extra,
    )


def product_domain(task: str) -> Box:
    """Inputs x labels; for discrete labels the label axis spans [-1, 1]."""
    if task == "regression":
        return REGRESSION_DOMAIN.product(REGRESSION_LABELS)
    return CLASSIFICATION_DOMAIN.product(Box((-1.0,), (1.0,)))


def parse_partition(task: str, granularity: str) -> Tuple[int, ...]:
    """``"MxK"`` (input cells x label cells) for regression, ``"M"`` (M x M input cells) for classification."""
    s = str(granularity).lower().strip()
    if task == "regression":
        parts = s.split("x")
        if len(parts) == 1:
            parts.append("1")
        if len(parts) != 2:
            raise ValueError(f"regression partition must look like 'MxK', got {granularity!r}")
        return tuple(int(v) for v in parts)
    return (int(s), int(s))


def build_partition(task: str, granularity: str, f: Fit, tightened: bool) -> Partition:
    shape = parse_partition(task, granularity)
    field_ = f.composed_field if tightened else f.predictor_field
    if task == "regression":
        part = build_grid_partition(product_domain(task), shape, input_dims=1)
    else:
        part = build_paired_partition(build_grid_partition(CLASSIFICATION_DOMAIN, shape))
    part = assign_counts(part, f.data.joint)
    return local_lipschitz(field_, part)


def partition_report(cfg: RunConfig, f: Fit, granularity: str) -> BoundReport:
    part = build_partition(f.task, granularity, f, cfg.tightened)
    inputs = _inputs(cfg, f)
    if f.task == "regression":
        return theorem5_bound(inputs, part, cfg.tightened, f.mesh_per_dim)
    return classification_bound(inputs, part, f.ramp_train_error, cfg.tightened, f.mesh_per_dim)


def global_report(cfg: RunConfig, f: Fit) -> BoundReport:
    inputs = _inputs(cfg, f)
    diam = product_domain(f.task).diameter
    if f.task == "regression":
        lip = f.composed_lip if cfg.tightened else f.predictor_lip
        return global_bound(inputs, lip, diam, cfg.tightened, mesh_per_dim=f.mesh_per_dim)
    lip = max(f.composed_lip, LABEL_JUMP_SLOPE) if cfg.tightened else f.predictor_lip
    return global_bound(inputs, lip, diam, cfg.tightened, f.ramp_train_error, f.mesh_per_dim)


def rademacher_for(cfg: RunConfig, f: Fit) -> BoundReport:
    d = f.data.x.shape[1]
    B = float(np.max(f.data.domain.widths))
    if f.task == "regression":
        D = float(max(abs(REGRESSION_LABELS.lower[0]), abs(REGRESSION_LABELS.upper[0])))
    else:
        D = max(f.pred_sup, 1e-12)
    L = max(f.predictor_lip, 1e-12)
    return rademacher_report(d, D, B, L, f.loss_lip, f.loss_sup, f.N, cfg.delta, f.ramp_train_error)


def _base(cfg: RunConfig, seed: int, N: int) -> dict:
    return {"experiment": cfg.experiment, "seed": seed, "N": N, "config_hash": cfg.config_hash()}


BOUND_ROW_COLUMNS = ("experiment", "seed", "N", "config_hash", "task", "partition",
                     *[c for c in CSV_COLUMNS if c not in ("N", "seed")],
                     "empirical_term", "train_risk", "test_risk", "gap")


def _bound_row(cfg: RunConfig, f: Fit, rep: BoundReport, partition: str) -> dict:
    row = _base(cfg, f.seed, f.N)
    row.update(task=f.task, partition=partition)
    row.update({k: v for k, v in rep.to_row(f.seed).items() if k not in ("N", "seed")})
    row.update(empirical_term=repr(float(rep.empirical_term)), train_risk=f.train_risk,
               test_risk=f.test_risk, gap=f.gap)
    return row


def _map(cfg: RunConfig, fn, items):
    if cfg.n_jobs == 1 or len(items) < 2:
        return [fn(*it) for it in items]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=cfg.n_jobs)(delayed(fn)(*it) for it in items)


# --------------------------------------------------------------------------- pipelines

def run_bound(cfg: RunConfig) -> List[dict]:
    def one(N, seed):
        f = fit(cfg, N, seed)
        granularity = cfg.default_partition
        return [_bound_row(cfg, f, partition_report(cfg, f, granularity), granularity),
                _bound_row(cfg, f, global_report(cfg, f), "global"),
                _bound_row(cfg, f, rademacher_for(cfg, f), "uniform")]

    out = _map(cfg, one, [(N, s) for N in cfg.n_list for s in cfg.seeds])
    return [r for rows in out for r in rows]


def run_partition_sweep(cfg: RunConfig) -> List[dict]:
    def one(N, seed):
        f = fit(cfg, N, seed)
        rows = [_bound_row(cfg, f, partition_report(cfg, f, granularity), granularity) for granularity in cfg.sweep_partitions]
        rows.append(_bound_row(cfg, f, global_report(cfg, f), "global"))
        rows.append(_bound_row(cfg, f, rademacher_for(cfg, f), "uniform"))
        return rows

    out = _map(cfg, one, [(N, s) for N in cfg.n_list for s in cfg.seeds])
    return [r for rows in out for r in rows]


def summarize(rows: Sequence[dict], keys=("N", "theorem", "partition"), value="total") -> List[dict]:
    """Mean and standard error of ``value`` across seeds for every key combination."""
    groups: Dict[tuple, List[float]] = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(float(r[value]))
    out = []
    for key, vals in groups.items():
        v = np.asarray(vals)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        out.append({**dict(zip(keys, key)), "n_seeds": len(v), "mean": float(v.mean()), "stderr": se})
    return out


def best_partition(rows: Sequence[dict], N: int, theorem: str) -> Tuple[str, float]:
    """Granularity with the lowest seed-averaged total."""
    summ = [s for s in summarize([r for r in rows if r["N"] == N and r["theorem"] == theorem])]
    best = min(summ, key=lambda s: s["mean"])
    return best["partition"], best["mean"]


def run_size_sweep(cfg: RunConfig) -> List[dict]:
    def one(N, seed, width, depth):
        c = replace(cfg, hidden=(width,) * depth)
        f = fit(c, N, seed)
        granularity = cfg.default_partition
        rep = partition_report(cfg, f, granularity)
        row = _bound_row(cfg, f, rep, granularity)
        row.update(width=width, depth=depth, n_params=f.model.n_params)
        return row

    items = [(N, s, w, d) for N in cfg.n_list for w in cfg.widths for d in cfg.depths for s in cfg.seeds]
    return _map(cfg, one, items)


SIZE_COLUMNS = BOUND_ROW_COLUMNS + ("width", "depth", "n_params")
REG_COLUMNS = BOUND_ROW_COLUMNS + ("reg_kind", "reg_value")


def run_reg_sweep(cfg: RunConfig) -> List[dict]:
    kind = cfg.reg_kind
    if kind not in ("adversarial", "weight_decay", "early_stopping"):
        raise ValueError(f"unknown regularization {kind!r}")

    def one(N, seed, value):
        if kind == "adversarial":
            f = fit(cfg, N, seed, adv_eps=float(value))
        elif kind == "weight_decay":
            f = fit(cfg, N, seed, weight_decay=float(value))
        else:
            f = fit(cfg, N, seed, early_stop=int(value))
        granularity = cfg.default_partition
        row = _bound_row(cfg, f, partition_report(cfg, f, granularity), granularity)
        row.update(reg_kind=kind, reg_value=value)
        return row

    return _map(cfg, one, [(N, s, v) for N in cfg.n_list for v in cfg.reg_values for s in cfg.seeds])


SHIFT_COLUMNS = BOUND_ROW_COLUMNS + ("shift_norm", "shift_w1", "expected_shift_term")


def translate_w1(x: np.ndarray, y: np.ndarray, v: np.ndarray) -> float:
    """Empirical W1 between the samples ``(x, y)`` and the same samples with ``x`` moved by ``v``."""
    src = EmpiricalMeasure.uniform(np.column_stack([x, y]))
    dst = EmpiricalMeasure.uniform(np.column_stack([x + v, y]))
    return w_alpha(src, dst, 1.0)


def run_shift(cfg: RunConfig) -> List[dict]:
    def one(N, seed):
        f = fit(cfg, N, seed)
        rng = np.random.default_rng([seed, 4])
        idx = rng.choice(f.N, size=min(cfg.shift_samples, f.N), replace=False)
        x, y = f.data.x[idx], f.data.y[idx]
        direction = np.zeros(x.shape[1])
        direction[0] = 1.0
        rows = []
        for norm in cfg.shift_norms:
            w1 = translate_w1(x, y, norm * direction)
            inputs = _inputs(cfg, f, shift_w1=w1, shift_w1_empirical=True)
            lip = max(f.composed_lip, LABEL_JUMP_SLOPE) if f.task == "classification" else f.composed_lip
            if not cfg.tightened:
                lip = f.predictor_lip
            rep = shift_bound(inputs, lip, product_domain(f.task).diameter, cfg.tightened, f.mesh_per_dim)
            row = _bound_row(cfg, f, rep, "global")
            row.update(shift_norm=norm, shift_w1=w1,
                       expected_shift_term=f.loss_lip * max(1.0, f.predictor_lip) * norm)
            rows.append(row)
        return rows

    out = _map(cfg, one, [(N, s) for N in cfg.n_list for s in cfg.seeds])
    return [r for rows in out for r in rows]


CONCENTRATION_COLUMNS = ("experiment", "seed", "N", "config_hash", "dim", "alpha", "trials",
                         "mean", "stderr", "envelope", "holds")


def concentration_envelope(N: int, dim: int, alpha: float = 1.0) -> float:
    reg = RegularityClass.holder(alpha, dim)
    return holder_constant(reg) * holder_rate(reg, N)


def run_concentration(cfg: RunConfig) -> List[dict]:
    seed = cfg.seeds[0]
    sampler = uniform_box_sampler(np.zeros(cfg.dim), np.ones(cfg.dim))
    rows = []
    for N in cfg.n_list:
        mean, se = mc_wasserstein_mean(sampler, N, cfg.trials, cfg.alpha, seed=seed, n_jobs=cfg.n_jobs)
        env = concentration_envelope(N, cfg.dim, cfg.alpha)
        rows.append({**_base(cfg, seed, N), "dim": cfg.dim, "alpha": cfg.alpha, "trials": cfg.trials,
                     "mean": mean, "stderr": se, "envelope": env, "holds": int(mean <= env)})
    return rows


PROP10_COLUMNS = ("experiment", "seed", "N", "config_hash", "k", "cost_transport", "err_transport",
                  "cost_partition", "local_total", "global_cost_transport")


def run_prop10(cfg: RunConfig) -> List[dict]:
    seed = cfg.seeds[0]
    rows = []
    for N in cfg.n_list:
        local, glob = prop10_reports(N, 1.0, cfg.delta)
        rows.append({**_base(cfg, seed, N), "k": local.k, "cost_transport": local.cost_transport,
                     "err_transport": local.err_transport, "cost_partition": local.cost_partition,
                     "local_total": local.total, "global_cost_transport": glob.cost_transport})
    return rows


HEATMAP_COLUMNS = ("experiment", "seed", "N", "config_hash", "cell_x", "cell_y", "value")


def heatmap_values(part: Partition, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per input cell ``sum_slices Lip * diam * sqrt(N_P) / N`` and the cell centres."""
    lips = np.nan_to_num(part.local_lips)
    vals = lips * part.diameters * np.sqrt(part.counts) / N
    if part.paired:
        k = len(part) // 2
        vals = vals[:k] + vals[k:]
        boxes = [c.box for c in part.cells[:k]]
    else:
        boxes = [c.box for c in part.cells]
    centres = np.array([(np.asarray(b.lower) + np.asarray(b.upper)) / 2 for b in boxes])
    return vals, centres


def run_heatmap(cfg: RunConfig) -> List[dict]:
    rows = []
    for N in cfg.n_list:
        for seed in cfg.seeds:
            f = fit(cfg, N, seed)
            part = build_partition(cfg.task, cfg.default_partition, f, cfg.tightened)
            vals, centres = heatmap_values(part, N)
            for c, v in zip(centres, vals):
                rows.append({**_base(cfg, seed, N), "cell_x": float(c[0]), "cell_y": float(c[1]), "value": float(v)})
    return rows


PIPELINES = {
    Experiment.BOUND: (run_bound, BOUND_ROW_COLUMNS),
    Experiment.PARTITION_SWEEP: (run_partition_sweep, BOUND_ROW_COLUMNS),
    Experiment.SIZE_SWEEP: (run_size_sweep, SIZE_COLUMNS),
    Experiment.REG_SWEEP: (run_reg_sweep, REG_COLUMNS),
    Experiment.SHIFT: (run_shift, SHIFT_COLUMNS),
    Experiment.CONCENTRATION: (run_concentration, CONCENTRATION_COLUMNS),
    Experiment.PROP10: (run_prop10, PROP10_COLUMNS),
    Experiment.HEATMAP: (run_heatmap, HEATMAP_COLUMNS),
}


def run(cfg: RunConfig) -> Path:
    """Run the configured experiment and write ``<out>/<experiment>.csv`` (plus a summary for sweeps)."""
    exp = Experiment(cfg.experiment)
    fn, columns = PIPELINES[exp]
    rows = fn(cfg)
    out_dir = Path(cfg.out)
    path = write_csv(rows, out_dir / f"{exp.value}.csv", columns)
    if exp in (Experiment.PARTITION_SWEEP, Experiment.BOUND):
        write_csv(summarize(rows), out_dir / f"{exp.value}_summary.csv", ("N", "theorem", "partition", "n_seeds", "mean", "stderr"))
    meta = out_dir / f"{exp.value}_config.json"
    meta.write_text(json.dumps(cfg.metadata(), sort_keys=True, indent=1, default=list) + "\n")
    return path
