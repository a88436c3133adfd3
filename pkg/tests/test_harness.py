import json
import math

import numpy as np
import pytest

from ccdetect.graphs import graph_edit_distance, read_dataset, read_graphs
from ccdetect.harness import (
    ConfigError,
    ExperimentConfig,
    generate_dataset,
    load_config,
    run_distortion_sweep,
    run_pipeline,
)
from ccdetect.harness.cli import main
from ccdetect.harness.model import Monitor
from ccdetect.harness.pipeline import (
    RUN_COLUMNS,
    SUMMARY_COLUMNS,
    draw_sequence,
    pool_distances,
    write_csv,
)
from ccdetect.manifold import pairwise_distances

from conftest import sample_points

SMALL = dict(pool_size=40, n_embed_train=30, n_detect_train=40, n_operational=80,
             n_sequences=3, M=5, d=3, n_boot=200, grid=[-0.05, -0.01, 0.01, 0.05])


@pytest.fixture
def small(tmp_path):
    def make(**changes):
        values = {**SMALL, "cache_dir": str(tmp_path / "cache"), **changes}
        return ExperimentConfig(**values)
    return make


# -- configuration ----------------------------------------------------------------

def test_config_defaults():
    cfg = ExperimentConfig()
    assert cfg.n_embed_train == 300 and cfg.n_detect_train == 600
    assert cfg.operational == 1200 and cfg.change_time == 600
    assert cfg.prototypes == 30
    assert ExperimentConfig(method="dissimilarity").prototypes == 15


@pytest.mark.parametrize("changes", [
    {"method": "other"}, {"n_sequences": 0}, {"alpha": 1.0}, {"difficulty": 0},
    {"M": 0}, {"n_operational": 1},
])
def test_config_validation(changes):
    with pytest.raises(ConfigError):
        ExperimentConfig(**changes)


def test_load_config(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("method: euclidean\ndifficulty: 6\nn_sequences: 10\n")
    cfg = load_config(path, n_sequences=None, seed=3)
    assert (cfg.method, cfg.difficulty, cfg.n_sequences, cfg.seed) == ("euclidean", 6, 10, 3)
    path.write_text("bogus: 1\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("- 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("CCDETECT_CACHE_DIR", str(tmp_path))
    assert ExperimentConfig().cache_path() == tmp_path
    assert "cache_dir" not in ExperimentConfig().to_dict()


def test_dataset_key_tracks_inputs():
    a = ExperimentConfig()
    assert a.dataset_key(0, 2) == ExperimentConfig(method="euclidean").dataset_key(0, 2)
    assert a.dataset_key(0, 2) != a.dataset_key(0, 4)
    assert a.dataset_key(0, 2) != ExperimentConfig(seed=1).dataset_key(0, 2)
    assert a.dataset_key(0, 2) != ExperimentConfig(edge_cost=1.0).dataset_key(0, 2)


# -- datasets ---------------------------------------------------------------------

def test_generate_dataset(tmp_path):
    cfg = ExperimentConfig()
    paths = generate_dataset(cfg, [0, 2], 50, tmp_path / "a")
    assert [p.name for p in paths] == ["class_00.jsonl", "class_02.jsonl"]
    assert all(len(p.read_text().splitlines()) == 51 for p in paths)
    again = generate_dataset(cfg, [0, 2], 50, tmp_path / "b")
    assert [p.read_bytes() for p in paths] == [p.read_bytes() for p in again]
    spec, graphs = read_dataset(paths[1])
    assert spec.class_id == 2 and len(graphs) == 50


def test_generated_difficulty_ordering(tmp_path):
    cfg = ExperimentConfig()
    paths = generate_dataset(cfg, [0, 2, 12], 60, tmp_path)
    c0, c2, c12 = (read_graphs(p) for p in paths)
    far = np.mean([graph_edit_distance(a, b) for a, b in zip(c0, c2)])
    near = np.mean([graph_edit_distance(a, b) for a, b in zip(c0, c12)])
    assert near < far


# -- pipeline ---------------------------------------------------------------------

def test_draws_independent_of_change_class(small):
    a = draw_sequence(small(difficulty=2), 1)
    b = draw_sequence(small(difficulty=8), 1)
    np.testing.assert_array_equal(a.nominal, b.nominal)
    np.testing.assert_array_equal(a.detect, b.detect)
    assert a.change.size == 40 and a.nominal.size == 40


def test_pool_distances_cached(small, tmp_path):
    cfg = small()
    first = pool_distances(cfg)
    assert len(list((tmp_path / "cache").glob("ged_*.npy"))) == 2
    second = pool_distances(cfg)
    np.testing.assert_array_equal(first.nominal, second.nominal)
    assert first.nominal.shape == (40, 40) and first.change.shape == (40, 40)


@pytest.mark.parametrize("method", ["graph_domain", "dissimilarity", "euclidean",
                                    "spherical", "hyperbolic"])
def test_pipeline_runs_every_method(small, method):
    report = run_pipeline(small(method=method, difficulty=2))
    assert len(report.runs) == 3
    row = report.summary_row()
    assert tuple(row) == SUMMARY_COLUMNS
    assert 0.0 <= report.metrics.dcr <= 1.0
    assert report.metrics.dcr == np.mean([r.outcome.detected for r in report.runs])
    if method == "spherical":
        assert report.kappa > 0
    if method == "hyperbolic":
        assert report.kappa < 0
    if method == "graph_domain":
        assert (row["M"], row["d"]) == ("-", "-")
    if method == "dissimilarity":
        assert row["d"] == "-1"
    json.loads(json.dumps(report.to_dict()))


def test_pipeline_deterministic(small):
    cfg = small(method="euclidean")
    a, b = run_pipeline(cfg), run_pipeline(cfg)
    assert write_csv([a.summary_row()], SUMMARY_COLUMNS) == write_csv([b.summary_row()], SUMMARY_COLUMNS)
    assert write_csv(a.run_rows(), RUN_COLUMNS) == write_csv(b.run_rows(), RUN_COLUMNS)


def test_arl0_independent_of_change_class(small):
    # nominal draws and training are shared, so ARL0 cannot see the change class
    a = run_pipeline(small(method="graph_domain", difficulty=2))
    b = run_pipeline(small(method="graph_domain", difficulty=8))
    assert a.metrics.arl0 == b.metrics.arl0
    assert a.summary_row()["arl0_ci_lo"] == b.summary_row()["arl0_ci_lo"]


def test_write_csv(tmp_path):
    text = write_csv([{"a": 1, "b": "x"}], ("a", "b"), tmp_path / "out.csv")
    assert text == "a,b\n1,x\n"
    assert (tmp_path / "out.csv").read_text() == text


# -- distortion sweep -------------------------------------------------------------

def test_sweep_single_point(small, tmp_path):
    D = pairwise_distances(sample_points(np.random.default_rng(0), 12, 3, 0.0))
    result = run_distortion_sweep(small(grid=[0.0], d=3), D=D, out_dir=tmp_path / "s")
    lines = (tmp_path / "s" / "distortion.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[0] == "kappa,log_distortion"
    svg = (tmp_path / "s" / "distortion.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "<circle" in svg and result.kappa == 0.0


def test_sweep_recovers_sphere_curvature(small):
    X = sample_points(np.random.default_rng(1), 15, 3, 0.5)
    D = pairwise_distances(X, kappa=0.5)
    grid = np.linspace(-1.0, 1.0, 21)
    result = run_distortion_sweep(small(grid=list(grid), d=3), D=D)
    assert abs(result.kappa - 0.5) <= 0.1 + 1e-12


def test_sweep_on_generated_data(small):
    result = run_distortion_sweep(small(sweep_n_train=25, grid=None, grid_side=4, d=5))
    assert len(result.curve) == 9 and any(k == 0 for k, _ in result.curve)
    assert math.isfinite(dict(result.curve)[0.0])


# -- command line -----------------------------------------------------------------

def _flags(tmp_path, **changes):
    values = {**SMALL, "cache_dir": str(tmp_path / "cache"), **changes}
    out = []
    for key, val in values.items():
        if val is None:
            continue
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        # the joined form keeps negative grids from parsing as options
        out.append(f"--{key.replace('_', '-')}={val}")
    return out


def test_cli_gen(tmp_path, capsys):
    assert main(["gen", "--classes", "0", "3", "--n-graphs", "5", "--out", str(tmp_path)]) == 0
    assert len(capsys.readouterr().out.split()) == 2
    assert len((tmp_path / "class_03.jsonl").read_text().splitlines()) == 6


def test_cli_run_and_sweep(tmp_path, capsys):
    out = tmp_path / "report.csv"
    argv = ["run", "--out", str(out), "--runs", str(tmp_path / "runs.csv"),
            "--json", str(tmp_path / "report.json")] + _flags(tmp_path, method="euclidean")
    assert main(argv) == 0
    assert out.read_text().splitlines()[0] == ",".join(SUMMARY_COLUMNS)
    assert len((tmp_path / "runs.csv").read_text().splitlines()) == 4
    assert json.loads((tmp_path / "report.json").read_text())["summary"]["method"] == "euclidean"
    argv = ["sweep", "--out", str(tmp_path / "sw")] + _flags(tmp_path, sweep_n_train=20)
    assert main(argv) == 0
    assert (tmp_path / "sw" / "distortion.svg").exists()


@pytest.mark.parametrize("method", ["graph_domain", "spherical"])
def test_cli_train_and_detect(tmp_path, capsys, method):
    model = tmp_path / "model.json"
    flags = _flags(tmp_path, method=method, n_embed_train=25, n_detect_train=25,
                   n_boot=100)
    assert main(["train", "--out", str(model)] + flags) == 0
    mon = Monitor.from_dict(json.loads(model.read_text()))
    assert mon.method == method and mon.cusum.h > 0
    assert main(["gen", "--classes", "1", "--n-graphs", "15", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    argv = ["detect", "--model", str(model), "--stream", str(tmp_path / "class_01.jsonl")]
    assert main(argv + flags) == 0
    alarms = [int(t) for t in capsys.readouterr().out.split()]
    assert alarms == sorted(alarms) and all(1 <= t <= 15 for t in alarms)
    assert alarms, "a class far from the training class should raise alarms"


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--method", "nope"]) == 2
    assert main(["detect", "--model", str(tmp_path / "missing.json"),
                 "--stream", str(tmp_path / "x.jsonl")]) == 2
    assert "error" in capsys.readouterr().err
