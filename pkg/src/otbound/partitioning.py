"""Data-independent rectangular partitions of a box domain.

Membership is half-open ``[a, b)`` on every interior boundary; the last cell along each
axis is closed so the domain's upper face is covered. Partitions never see samples at
construction time; counts are attached afterwards with :func:`assign_counts`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np


class LabelSlice(Enum):
    MINUS = -1
    PLUS = 1


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must be nonempty and of equal length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate box: lower={lo}, upper={hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(points)
        return np.all((p >= self.lower) & (p <= self.upper), axis=1)

    def product(self, other: "Box") -> "Box":
        return Box(self.lower + other.lower, self.upper + other.upper)


@dataclass(frozen=True)
class Cell:
    box: Box
    diameter: float
    input_projection_diameter: float
    count: int = 0
    local_lip: Optional[float] = None
    local_smooth_norm: Optional[float] = None
    label_slice: Optional[LabelSlice] = None


@dataclass(frozen=True)
class Partition:
    """Cells covering ``domain``.

    For a paired (classification) partition ``domain`` is the input box and every cell
    carries a ``label_slice``; points are then given as ``(x_1, ..., x_d, label)``.
    """

    cells: tuple
    domain: Box
    grid_shape: Optional[tuple] = None
    paired: bool = False
    input_dim: Optional[int] = None
    locator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def point_dim(self) -> int:
        return self.domain.dim + (1 if self.paired else 0)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c.count for c in self.cells], dtype=np.int64)

    @property
    def diameters(self) -> np.ndarray:
        return np.array([c.diameter for c in self.cells])

    @property
    def local_lips(self) -> np.ndarray:
        return np.array([np.nan if c.local_lip is None else c.local_lip for c in self.cells])

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Cell index of every point, or -1 for points outside the domain."""
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            p = p[:, None] if self.point_dim == 1 else p[None, :]
        if p.shape[1] != self.point_dim:
            raise ValueError(f"points have dimension {p.shape[1]}, partition expects {self.point_dim}")
        if self.paired:
            x, lab = p[:, :-1], p[:, -1]
            bad = ~np.isin(lab, (-1.0, 1.0))
            if bad.any():
                raise ValueError(f"label at sample index {int(np.flatnonzero(bad)[0])} is not in {{-1, +1}}")
            base = _locate_boxes(self._input_cells(), self.domain, x, self.locator)
            half = len(self.cells) // 2
            idx = np.where(lab > 0, base + half, base)
            return np.where(base < 0, -1, idx)
        return _locate_boxes(self.cells, self.domain, p, self.locator)

    def _input_cells(self) -> tuple:
        return self.cells[: len(self.cells) // 2]

    def with_cells(self, cells: Sequence[Cell]) -> "Partition":
        return replace(self, cells=tuple(cells))


def _locate_boxes(cells, domain: Box, p: np.ndarray, locator) -> np.ndarray:
    inside = domain.contains(p)
    if locator is not None:
        idx = locator(p)
        return np.where(inside, idx, -1)
    idx = np.full(len(p), -1, dtype=np.int64)
    dom_hi = np.asarray(domain.upper)
    for j, c in enumerate(cells):
        lo = np.asarray(c.box.lower)
        hi = np.asarray(c.box.upper)
        below_hi = (p < hi) | ((p == hi) & (hi == dom_hi))
        hit = np.all((p >= lo) & below_hi, axis=1) & (idx < 0)
        idx[hit] = j
    return np.where(inside, idx, -1)


def _grid_locator(edges: list, shape: tuple):
    def locate(p: np.ndarray) -> np.ndarray:
        per_axis = []
        for k, e in enumerate(edges):
            i = np.searchsorted(e, p[:, k], side="right") - 1
            per_axis.append(np.clip(i, 0, shape[k] - 1))
        return np.ravel_multi_index(per_axis, shape)

    return locate


def build_grid_partition(domain: Box, cells_per_dim: Sequence[int], input_dims: Optional[int] = None) -> Partition:
    """Uniform ``prod(cells_per_dim)`` mesh of ``domain``.

    ``input_dims`` marks how many leading coordinates belong to the input space (the rest
    being label coordinates); it only affects ``input_projection_diameter``.
    """
    shape = tuple(int(n) for n in np.atleast_1d(cells_per_dim))
    if len(shape) != domain.dim:
        raise ValueError(f"cells_per_dim has length {len(shape)}, domain has dimension {domain.dim}")
    if any(n < 1 for n in shape):
        raise ValueError("every axis needs at least one cell")
    n_in = domain.dim if input_dims is None else int(input_dims)
    edges = [np.linspace(lo, hi, n + 1) for lo, hi, n in zip(domain.lower, domain.upper, shape)]
    cells = []
    for multi in np.ndindex(*shape):
        lo = [edges[k][i] for k, i in enumerate(multi)]
        hi = [edges[k][i + 1] for k, i in enumerate(multi)]
        box = Box(lo, hi)
        w = box.widths
        cells.append(Cell(box, box.diameter, float(np.linalg.norm(w[:n_in]))))
    return Partition(tuple(cells), domain, shape, input_dim=n_in, locator=_grid_locator(edges, shape))


def build_paired_partition(input_partition: Partition) -> Partition:
    """Duplicate an input-space partition at the labels -1 and +1.

    Cell order is all MINUS copies, then all PLUS copies, each in the input order.
    """
    if input_partition.paired:
        raise ValueError("partition is already paired")
    cells = []
    for sl in (LabelSlice.MINUS, LabelSlice.PLUS):
        for c in input_partition.cells:
            cells.append(Cell(c.box, c.diameter, c.diameter, label_slice=sl))
    return Partition(
        tuple(cells),
        input_partition.domain,
        input_partition.grid_shape,
        paired=True,
        input_dim=input_partition.domain.dim,
        locator=input_partition.locator,
    )


def assign_counts(partition: Partition, samples: np.ndarray) -> Partition:
    idx = partition.locate(samples)
    outside = np.flatnonzero(idx < 0)
    if outside.size:
        i = int(outside[0])
        raise ValueError(f"sample index {i} lies outside the partition domain: {np.asarray(samples)[i]}")
    counts = np.bincount(idx, minlength=len(partition))
    return partition.with_cells(replace(c, count=int(n)) for c, n in zip(partition.cells, counts))


def prop10_strip_count(n: int) -> int:
    """``ceil(n ** 0.6)`` in exact integer arithmetic (smallest D with D**5 >= n**3)."""
    if n < 1:
        raise ValueError("n must be positive")
    target = n**3
    d = max(1, int(round(n**0.6)))
    while d**5 < target:
        d += 1
    while d > 1 and (d - 1) ** 5 >= target:
        d -= 1
    return d


def build_prop10_partition(n: int) -> Partition:
    """Strip/column partition of the unit square used for the one-neuron ReLU construction.

    ``D = ceil(n^0.6)`` vertical strips ``B_1..B_{D-1}`` spanning the full label range, and
    the last strip ``B_D`` cut into ``D`` squares along the label axis.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    D = prop10_strip_count(n)
    edges = np.array([i / D for i in range(D + 1)])
    domain = Box((0.0, 0.0), (1.0, 1.0))
    cells = []
    for i in range(D - 1):
        box = Box((edges[i], 0.0), (edges[i + 1], 1.0))
        cells.append(Cell(box, box.diameter, float(edges[i + 1] - edges[i])))
    for j in range(D):
        box = Box((edges[D - 1], edges[j]), (1.0, edges[j + 1]))
        cells.append(Cell(box, box.diameter, float(1.0 - edges[D - 1])))

    def locate(p: np.ndarray) -> np.ndarray:
        ix = np.clip(np.searchsorted(edges, p[:, 0], side="right") - 1, 0, D - 1)
        iy = np.clip(np.searchsorted(edges, p[:, 1], side="right") - 1, 0, D - 1)
        return np.where(ix < D - 1, ix, D - 1 + iy)

    return Partition(tuple(cells), domain, None, input_dim=1, locator=locate)


def neighbours(partition: Partition, j: int) -> list:
    """Indices of cells sharing a face with cell ``j`` (same label slice when paired)."""
    cells = partition.cells
    cj = cells[j]
    out = []
    lo_j, hi_j = np.asarray(cj.box.lower), np.asarray(cj.box.upper)
    for i, c in enumerate(cells):
        if i == j or c.label_slice != cj.label_slice:
            continue
        lo, hi = np.asarray(c.box.lower), np.asarray(c.box.upper)
        touch = np.isclose(hi, lo_j) | np.isclose(lo, hi_j)
        overlap = (np.minimum(hi, hi_j) - np.maximum(lo, lo_j)) > 0
        for k in range(len(lo)):
            if touch[k] and np.all(np.delete(overlap, k)):
                out.append(i)
                break
    return out


def adjacency(partition: Partition, chunk: int = 512) -> List[np.ndarray]:
    """Face-sharing neighbour indices of every cell at once (same rule as :func:`neighbours`)."""
    cells = partition.cells
    lo = np.array([c.box.lower for c in cells], dtype=float)
    hi = np.array([c.box.upper for c in cells], dtype=float)
    sl = np.array([-2 if c.label_slice is None else c.label_slice for c in cells])
    out = []
    for start in range(0, len(cells), chunk):
        lj, hj = lo[start:start + chunk, None, :], hi[start:start + chunk, None, :]
        touch = np.isclose(hi[None], lj) | np.isclose(lo[None], hj)
        overlap = (np.minimum(hi[None], hj) - np.maximum(lo[None], lj)) > 0
        n_overlap = overlap.sum(axis=2)
        d = lo.shape[1]
        # face contact along axis k: touching on k and overlapping on every other axis
        face = np.zeros(touch.shape[:2], dtype=bool)
        for k in range(d):
            face |= touch[:, :, k] & (n_overlap - overlap[:, :, k] == d - 1)
        face &= sl[start:start + chunk, None] == sl[None]
        idx = np.arange(start, min(start + chunk, len(cells)))
        face[np.arange(len(idx)), idx] = False
        out.extend(np.flatnonzero(row) for row in face)
    return out

