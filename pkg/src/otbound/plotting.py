"""SVG figures drawn purely from experiment CSV files."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed element ids and no timestamp, so re-plotting the same CSV gives the same bytes
plt.rcParams["svg.hashsalt"] = "otbound"
plt.rcParams["svg.fonttype"] = "none"


def read_rows(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _mean_by(rows, xkey, ykey, group=None):
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        acc[r[group] if group else ""][float(r[xkey])].append(float(r[ykey]))
    out = {}
    for g, d in sorted(acc.items()):
        xs = sorted(d)
        ys = np.array([np.mean(d[x]) for x in xs])
        se = np.array([np.std(d[x], ddof=1) / np.sqrt(len(d[x])) if len(d[x]) > 1 else 0.0 for x in xs])
        out[g] = (np.array(xs), ys, se)
    return out


def _partition_cells(granularity: str) -> float:
    parts = [int(v) for v in granularity.lower().split("x")]
    return float(np.prod(parts)) if len(parts) > 1 else float(parts[0] ** 2)


def plot_csv(csv_path, svg_path=None) -> Path:
    rows = read_rows(csv_path)
    if not rows:
        raise ValueError(f"{csv_path} holds no rows")
    exp = rows[0]["experiment"]
    svg = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    fig, ax = plt.subplots(figsize=(6, 4))
    if exp == "sweep-partitions":
        local = [dict(r, cells=_partition_cells(r["partition"])) for r in rows if r["partition"] not in ("global", "uniform")]
        for N, (x, y, se) in _mean_by(local, "cells", "total", "N").items():
            ax.errorbar(x, y, yerr=se, marker="o", label=f"N={N}")
        for name in ("global", "uniform"):
            for N, (_, y, _) in _mean_by([r for r in rows if r["partition"] == name], "N", "total", "N").items():
                ax.axhline(y[0], linestyle="--", linewidth=0.8)
        ax.set_xscale("log")
        ax.set_xlabel("number of cells")
        ax.set_ylabel("bound")
    elif exp in ("sweep-reg", "sweep-size", "bound"):
        xkey = {"sweep-reg": "reg_value", "sweep-size": "n_params", "bound": "N"}[exp]
        for N, (x, y, se) in _mean_by([r for r in rows if r["partition"] not in ("global", "uniform")], xkey, "total", "N").items():
            ax.errorbar(x, y, yerr=se, marker="o", label=f"N={N}")
        if exp == "sweep-size":
            ax.set_xscale("log")
        ax.set_xlabel(xkey)
        ax.set_ylabel("bound")
    elif exp == "shift":
        for N, (x, y, se) in _mean_by(rows, "shift_norm", "shift_term", "N").items():
            ax.errorbar(x, y, yerr=se, marker="o", label=f"N={N}")
        ax.set_xlabel("shift norm")
        ax.set_ylabel("shift term")
    elif exp == "concentration":
        N = np.array([float(r["N"]) for r in rows])
        ax.errorbar(N, [float(r["mean"]) for r in rows], yerr=[float(r["stderr"]) for r in rows], marker="o", label="Monte-Carlo mean")
        ax.plot(N, [float(r["envelope"]) for r in rows], linestyle="--", label="envelope")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("N")
    elif exp == "prop10":
        N = np.array([float(r["N"]) for r in rows])
        ax.plot(N, [float(r["local_total"]) for r in rows], marker="o", label="local")
        ax.plot(N, [float(r["global_cost_transport"]) for r in rows], marker="s", label="global")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("N")
    elif exp == "heatmap":
        first = (rows[0]["seed"], rows[0]["N"])
        sel = [r for r in rows if (r["seed"], r["N"]) == first]
        xs = np.unique([float(r["cell_x"]) for r in sel])
        ys = np.unique([float(r["cell_y"]) for r in sel])
        grid = np.zeros((len(ys), len(xs)))
        for r in sel:
            grid[np.searchsorted(ys, float(r["cell_y"])), np.searchsorted(xs, float(r["cell_x"]))] = float(r["value"])
        im = ax.imshow(grid, origin="lower", extent=(xs[0], xs[-1], ys[0], ys[-1]), aspect="auto")
        fig.colorbar(im, ax=ax)
    else:
        raise ValueError(f"no plot defined for experiment {exp!r}")
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    svg.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg
