"""Command-line entry point: ``otbound <experiment> [options]``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .experiments import Experiment, RunConfig, load_config, run
from .plotting import plot_csv


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otbound", description="Generalization bound experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for exp in Experiment:
        p = sub.add_parser(exp.value, help=f"run the {exp.value} experiment")
        p.add_argument("--config", help="key = value config file ([run] section optional)")
        p.add_argument("--task", choices=("regression", "classification"))
        p.add_argument("--seeds", type=_ints, help="comma-separated seeds")
        p.add_argument("--n", type=_ints, dest="n_list", help="comma-separated sample sizes")
        p.add_argument("--out", help="output directory")
        p.add_argument("--paper-scale", action="store_true", default=None, help="train for the full 20000 iterations")
        p.add_argument("--delta", type=float)
        p.add_argument("--iterations", type=int)
        p.add_argument("--n-jobs", type=int, dest="n_jobs")
        p.add_argument("--plot", action="store_true", help="also write an SVG next to the CSV")
    p = sub.add_parser("plot", help="render an SVG from a results CSV")
    p.add_argument("csv")
    p.add_argument("--svg", help="output path (default: CSV path with .svg)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        print(plot_csv(args.csv, args.svg))
        return 0
    over = dict(experiment=args.command, task=args.task, delta=args.delta, out=args.out,
                paper_scale=args.paper_scale, iterations=args.iterations, n_jobs=args.n_jobs,
                seeds=tuple(args.seeds) if args.seeds else None,
                n_list=tuple(args.n_list) if args.n_list else None)
    if args.config:
        cfg = load_config(args.config, **over)
    else:
        defaults = {"concentration": dict(n_list=(16, 64, 256, 1024)),
                    "prop10": dict(n_list=tuple(2**k for k in range(10, 21))),
                    "shift": dict(task="classification")}.get(args.command, {})
        merged = {**defaults, **{k: v for k, v in over.items() if v is not None}}
        cfg = RunConfig(**merged)
    path = run(cfg)
    print(path)
    if args.plot:
        print(plot_csv(path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
