"""Mesh-based estimates of local and global Lipschitz constants.

The gradient of the predictor (or of the loss composed with it) is evaluated on a
regular grid; a cell's constant is the largest gradient norm among grid points that
fall in it. This is a lower estimate of the true constant that converges as the grid
is refined.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .learners.mlp import MlpModel, _forward_tape, _backward, spectral_lipschitz_upper
from .partitioning import Box, Partition, _locate_boxes, adjacency

DEFAULT_MESH = {1: (512,), 2: (256, 256)}


class Probe(Enum):
    LOSS_COMPOSED = "loss_composed"
    PREDICTOR_ONLY = "predictor_only"


@dataclass(frozen=True)
class GradField:
    """Gradient norms at mesh points.

    For loss-composed fields the points carry the label as a trailing coordinate.
    """

    mesh_points: np.ndarray
    grad_norms: np.ndarray
    probed: Probe = Probe.PREDICTOR_ONLY
    input_dim: Optional[int] = None
    mesh_shape: Optional[tuple] = None

    def __post_init__(self):
        pts = np.asarray(self.mesh_points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        norms = np.asarray(self.grad_norms, dtype=float).ravel()
        if len(pts) != len(norms):
            raise ValueError("one gradient norm per mesh point is required")
        if not np.all(np.isfinite(norms)) or np.any(norms < 0):
            raise ValueError("gradient norms must be finite and nonnegative")
        object.__setattr__(self, "mesh_points", pts)
        object.__setattr__(self, "grad_norms", norms)
        if self.input_dim is None:
            extra = 1 if self.probed is Probe.LOSS_COMPOSED else 0
            object.__setattr__(self, "input_dim", pts.shape[1] - extra)

    def __len__(self) -> int:
        return len(self.grad_norms)

    def to_csv(self, path) -> None:
        d = self.mesh_points.shape[1]
        names = [f"x{i + 1}" for i in range(self.input_dim)] + (["y"] if d > self.input_dim else [])
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + ["grad_norm"])
            for p, g in zip(self.mesh_points, self.grad_norms):
                w.writerow([repr(float(v)) for v in p] + [repr(float(g))])


def mesh_points(domain: Box, mesh_per_dim: Sequence[int]) -> np.ndarray:
    """Regular grid including the domain faces, in C order (last axis fastest)."""
    shape = tuple(int(m) for m in np.atleast_1d(mesh_per_dim))
    if len(shape) != domain.dim:
        raise ValueError(f"mesh has {len(shape)} axes, domain has dimension {domain.dim}")
    if any(m < 1 for m in shape):
        raise ValueError("mesh_per_dim entries must be positive")
    axes = [np.linspace(lo, hi, m) if m > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi, m in zip(domain.lower, domain.upper, shape)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def grad_norm_field(model: MlpModel, loss, domain: Box, mesh_per_dim: Optional[Sequence[int]] = None,
                    label_grid: Optional[Sequence[float]] = None, chunk: int = 1 << 16) -> GradField:
    """Gradient norms of ``f`` (``loss is None``) or of ``loss(f(x), y)`` over a grid.

    With a loss, every input point is paired with every value of ``label_grid``. For
    continuous labels the gradient is taken in ``(x, y)`` jointly; for discrete labels
    only the input part is differentiated.
    """
    if model.input_dim != domain.dim:
        raise ValueError(f"model takes {model.input_dim} inputs, domain has dimension {domain.dim}")
    if mesh_per_dim is None:
        mesh_per_dim = DEFAULT_MESH.get(domain.dim, (64,) * domain.dim)
    X = mesh_points(domain, mesh_per_dim)
    shape = tuple(int(m) for m in np.atleast_1d(mesh_per_dim))
    if loss is not None and label_grid is None:
        raise ValueError("a loss-composed field needs a label_grid")

    pred = np.empty(len(X))
    grad_f = np.empty_like(X)
    for s in range(0, len(X), chunk):
        out, acts, pres = _forward_tape(model, X[s:s + chunk])
        _, g = _backward(model, acts, pres, np.ones(len(out)), want_params=False)
        pred[s:s + chunk], grad_f[s:s + chunk] = out, g
    gnorm = np.linalg.norm(grad_f, axis=1)
    if loss is None:
        return GradField(X, gnorm, Probe.PREDICTOR_ONLY, domain.dim, shape)

    labels = np.asarray(label_grid, dtype=float).ravel()
    pts, norms = [], []
    for y in labels:
        dl = np.abs(loss.d_pred(pred, np.full(len(X), y)))
        if loss.discrete_labels:
            norms.append(dl * gnorm)
        else:
            # d/dy loss(f(x) - y) = -d/df, so the joint gradient is dl * (grad f, -1)
            norms.append(dl * np.sqrt(gnorm**2 + 1.0))
        pts.append(np.column_stack([X, np.full(len(X), y)]))
    return GradField(np.vstack(pts), np.concatenate(norms), Probe.LOSS_COMPOSED, domain.dim, shape + (len(labels),))


def global_lipschitz(field: GradField) -> float:
    if len(field) == 0:
        raise ValueError("empty gradient field")
    return float(field.grad_norms.max())


def _cell_maxima(field: GradField, partition: Partition) -> np.ndarray:
    """Per-cell maximum of the field; NaN where no mesh point falls in the cell."""
    pts = field.mesh_points
    out = np.full(len(partition), np.nan)

    def reduce(idx, norms, n_cells):
        acc = np.full(n_cells, -np.inf)
        ok = idx >= 0
        np.maximum.at(acc, idx[ok], norms[ok])
        return np.where(np.isfinite(acc), acc, np.nan)

    if pts.shape[1] == partition.point_dim:
        return reduce(partition.locate(pts), field.grad_norms, len(partition))
    if partition.paired and pts.shape[1] == partition.domain.dim:
        # input-only field on a label-paired partition: both slices see the same values
        half = reduce(_locate_boxes(partition._input_cells(), partition.domain, pts, partition.locator),
                      field.grad_norms, len(partition) // 2)
        return np.concatenate([half, half])
    if not partition.paired and pts.shape[1] == (partition.input_dim or 0) < partition.point_dim:
        # input-only field on a partition of the product space: project each cell to inputs
        d = pts.shape[1]
        for j, c in enumerate(partition.cells):
            lo, hi = np.asarray(c.box.lower[:d]), np.asarray(c.box.upper[:d])
            m = np.all((pts >= lo) & (pts <= hi), axis=1)
            if m.any():
                out[j] = field.grad_norms[m].max()
        return out
    raise ValueError(f"field points have dimension {pts.shape[1]}, partition expects {partition.point_dim}")


def local_lipschitz(field: GradField, partition: Partition) -> Partition:
    """Fill ``local_lip`` of every cell with the field maximum over the cell.

    Cells that contain no mesh point take the largest value among face-sharing cells,
    repeated until every cell is filled.
    """
    if len(field) == 0:
        raise ValueError("empty gradient field")
    vals = _cell_maxima(field, partition)
    if np.all(np.isnan(vals)):
        raise ValueError("no mesh point falls inside the partition domain")
    adj = adjacency(partition) if np.isnan(vals).any() else None
    while np.isnan(vals).any():
        filled = vals.copy()
        for j in np.flatnonzero(np.isnan(vals)):
            nb = vals[adj[j]]
            nb = nb[~np.isnan(nb)]
            if nb.size:
                filled[j] = nb.max()
        if np.array_equal(np.isnan(filled), np.isnan(vals)):
            # isolated cells (e.g. a label slice with no data); fall back to the global max
            filled[np.isnan(filled)] = np.nanmax(vals)
        vals = filled
    return partition.with_cells(replace(c, local_lip=float(v)) for c, v in zip(partition.cells, vals))


def spectral_norm_diagnostic(model: MlpModel) -> float:
    """Operator-norm product; a certified but typically very loose global constant."""
    return spectral_lipschitz_upper(model)
