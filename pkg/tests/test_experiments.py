from __future__ import annotations

import csv
from dataclasses import replace

import numpy as np
import pytest

from otbound.cli import main
from otbound.experiments import (
    BOUND_ROW_COLUMNS,
    PIPELINES,
    Experiment,
    RunConfig,
    best_partition,
    build_partition,
    fit,
    global_report,
    heatmap_values,
    load_config,
    parse_partition,
    partition_report,
    run,
    summarize,
    translate_w1,
    write_csv,
)
from otbound.learners.mlp import MlpModel
from otbound.lipschitz import grad_norm_field, local_lipschitz
from otbound.partitioning import Box, assign_counts, build_grid_partition, build_paired_partition
from otbound.plotting import plot_csv

TINY = dict(seeds=(0, 1), n_list=(64,), iterations=30, test_samples=500, hidden=(8, 8), trials=3, shift_samples=32)


def tiny(task="regression", **kw):
    mesh = (32,) if task == "regression" else (12, 12)
    return RunConfig(task=task, mesh_per_dim=mesh, **{**TINY, **kw})


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_file_roundtrip(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("task = classification\nseeds = 3, 4\nn_list = 100 200\ndelta = 0.1\ntightened = false\n"
                 "mesh_per_dim = 8 8\npartitions = 2 5\n")
    cfg = load_config(p, out=str(tmp_path))
    assert cfg.task == "classification" and cfg.seeds == (3, 4) and cfg.n_list == (100, 200)
    assert cfg.delta == 0.1 and cfg.tightened is False and cfg.mesh_per_dim == (8, 8)
    assert cfg.partitions == ("2", "5") and cfg.out == str(tmp_path)
    p2 = tmp_path / "sec.ini"
    p2.write_text("[run]\nexperiment = prop10\n")
    assert load_config(p2).experiment == "prop10"
    p3 = tmp_path / "bad.ini"
    p3.write_text("nonsense = 1\n")
    with pytest.raises(ValueError, match="nonsense"):
        load_config(p3)
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.ini")


def test_config_validation_and_hash():
    with pytest.raises(ValueError):
        RunConfig(experiment="nope")
    with pytest.raises(ValueError):
        RunConfig(task="ranking")
    with pytest.raises(ValueError):
        RunConfig(delta=0.0)
    a = RunConfig()
    assert a.config_hash() == replace(a, out="elsewhere", n_jobs=4).config_hash()
    assert a.config_hash() != replace(a, seeds=(1,)).config_hash()
    assert a.train_iterations == 2000 and replace(a, paper_scale=True).train_iterations == 20000


def test_parse_partition():
    assert parse_partition("regression", "8x2") == (8, 2)
    assert parse_partition("regression", "4") == (4, 1)
    assert parse_partition("classification", "30") == (30, 30)
    with pytest.raises(ValueError):
        parse_partition("regression", "1x2x3")


def test_single_cell_partition_equals_global_regression():
    cfg = tiny()
    f = fit(cfg, 64, 0)
    a = partition_report(cfg, f, "1x1")
    b = global_report(cfg, f)
    assert a.total == pytest.approx(b.total, abs=1e-12)


def test_classification_fit_is_consistent():
    cfg = tiny("classification")
    f = fit(cfg, 64, 0)
    assert 0.0 <= f.train_risk <= f.ramp_train_error <= 1.0
    rep = partition_report(cfg, f, "3")
    assert rep.k == 9 and rep.empirical_term == f.ramp_train_error


def test_zero_predictor_heatmap_is_zero():
    model = MlpModel.zeros((2, 4, 4, 1))
    field = grad_norm_field(model, None, Box((-5, -5), (5, 5)), (9, 9))
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-5, 5, (50, 2)), rng.choice([-1.0, 1.0], 50)])
    part = assign_counts(build_paired_partition(build_grid_partition(Box((-5, -5), (5, 5)), (3, 3))), pts)
    vals, centres = heatmap_values(local_lipschitz(field, part), 50)
    assert vals.shape == (9,) and centres.shape == (9, 2)
    assert np.all(vals == 0.0)


def test_translation_distance_is_shift_norm():
    rng = np.random.default_rng(1)
    x, y = rng.uniform(-5, 5, (40, 2)), rng.choice([-1.0, 1.0], 40)
    assert translate_w1(x, y, np.zeros(2)) == 0.0
    assert translate_w1(x, y, np.array([0.5, 0.0])) == pytest.approx(0.5, abs=1e-9)


def test_summary_and_best_partition():
    rows = [dict(N=10, theorem="partition", partition=p, total=t)
            for p, t in [("a", 1.0), ("a", 3.0), ("b", 1.5), ("b", 1.5)]]
    s = {r["partition"]: r for r in summarize(rows)}
    assert s["a"]["mean"] == 2.0 and s["a"]["stderr"] == pytest.approx(1.0)
    assert best_partition(rows, 10, "partition") == ("b", 1.5)


def test_write_csv_is_plain(tmp_path):
    p = write_csv([{"a": 0.1, "b": True, "c": np.int64(3)}], tmp_path / "x.csv")
    assert p.read_bytes() == b"a,b,c\n0.1,1,3\n"


@pytest.mark.parametrize("exp", [e for e in Experiment])
def test_every_experiment_is_deterministic(tmp_path, exp):
    task = "classification" if exp in (Experiment.SHIFT, Experiment.HEATMAP) else "regression"
    extra = dict(widths=(4,), depths=(1, 2), reg_values=(0.0, 0.1), partitions=("1x1", "2x1"), n_list=(16, 32))
    if exp not in (Experiment.CONCENTRATION, Experiment.PROP10):
        extra["n_list"] = (64,)
    cfg = tiny(task, experiment=exp.value, **extra)
    a = run(replace(cfg, out=str(tmp_path / "a")))
    b = run(replace(cfg, out=str(tmp_path / "b"), n_jobs=2))
    assert a.read_bytes() == b.read_bytes()
    rows = read(a)
    assert rows and tuple(rows[0]) == tuple(PIPELINES[exp][1])
    assert {r["config_hash"] for r in rows} == {cfg.config_hash()}
    svg1, svg2 = plot_csv(a, tmp_path / "1.svg"), plot_csv(a, tmp_path / "2.svg")
    assert svg1.read_bytes() == svg2.read_bytes()


def test_shift_rows(tmp_path):
    cfg = tiny("classification", experiment="shift", out=str(tmp_path), seeds=(0,))
    rows = read(run(cfg))
    assert [float(r["shift_norm"]) for r in rows] == [0.0, 0.5, 1.0]
    assert float(rows[0]["shift_term"]) == 0.0
    for r in rows[1:]:
        assert float(r["shift_w1"]) == pytest.approx(float(r["shift_norm"]), abs=1e-9)


def test_cli_end_to_end(tmp_path, capsys):
    conf = tmp_path / "c.ini"
    conf.write_text("iterations = 20\ntest_samples = 300\nhidden = 8\nmesh_per_dim = 16\npartition = 2x1\n")
    for d in ("a", "b"):
        assert main(["bound", "--config", str(conf), "--seeds", "0", "--n", "48", "--out", str(tmp_path / d), "--plot"]) == 0
    out = capsys.readouterr().out
    assert "bound.csv" in out and "bound.svg" in out
    a, b = (tmp_path / d / "bound.csv" for d in ("a", "b"))
    assert a.read_bytes() == b.read_bytes()
    rows = read(a)
    assert tuple(rows[0]) == BOUND_ROW_COLUMNS
    assert [r["theorem"] for r in rows] == ["partition", "global", "rademacher"]
    assert (tmp_path / "a" / "bound_summary.csv").exists() and (tmp_path / "a" / "bound_config.json").exists()
    assert main(["prop10", "--out", str(tmp_path / "p")]) == 0
    assert len(read(tmp_path / "p" / "prop10.csv")) == 11
    assert main(["plot", str(tmp_path / "p" / "prop10.csv"), "--svg", str(tmp_path / "p.svg")]) == 0
    assert (tmp_path / "p.svg").read_text().lstrip().startswith("<?xml")
    with pytest.raises(SystemExit):
        main(["bogus"])
