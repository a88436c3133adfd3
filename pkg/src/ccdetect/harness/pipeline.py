"""End-to-end change-detection experiments on bootstrapped Delaunay streams.

Each class is a finite dataset (a *pool*) of generated graphs.  Every
sequence bootstraps its training and operational graphs from the class-0
pool, switching to the pool of the change class at the midpoint of the
operational segment.  All graph distances are lookups into pool distance
matrices, which are computed once and cached on disk.
"""

from __future__ import annotations

import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..detection import RunMetrics, compute_run_metrics, run_outcome
from ..graphs import distance_matrix, generate_class_graphs, set_median_index
from .config import MANIFOLD_METHODS, ExperimentConfig
from .model import Monitor, StageError, build_monitor, curvature_grid, fit_references

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("method", "difficulty", "M", "d", "dcr", "dcr_ci_lo", "dcr_ci_hi",
                   "arl0", "arl0_ci_lo", "arl0_ci_hi", "arl1", "arl1_ci_lo",
                   "arl1_ci_hi")
RUN_COLUMNS = ("method", "difficulty", "M", "d", "run", "kappa", "distortion",
               "detected", "arl0", "arl1", "censored0", "censored1")


def class_pool(cfg: ExperimentConfig, class_id: int) -> list:
    """The finite dataset of a class (deterministic in the config seed)."""
    return generate_class_graphs(cfg.class_spec(class_id), cfg.pool_size)


def _cached(cfg, name, compute):
    root = cfg.cache_path()
    if root is None:
        return compute()
    path = Path(root) / f"{name}.npy"
    if path.exists():
        return np.load(path)
    value = compute()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npy")
    np.save(tmp, value)
    tmp.replace(path)
    return value


@dataclass
class PoolDistances:
    """GED matrices among the class-0 pool and from it to a change pool."""

    nominal: np.ndarray          # (P0, P0)
    change: np.ndarray           # (P0, Pt)


def pool_distances(cfg: ExperimentConfig, difficulty=None) -> PoolDistances:
    difficulty = cfg.difficulty if difficulty is None else difficulty
    pool0 = class_pool(cfg, 0)
    costs = cfg.costs
    D00 = _cached(cfg, f"ged_{cfg.dataset_key(0, 0)}",
                  lambda: distance_matrix(pool0, costs=costs, workers=cfg.workers))
    D0t = _cached(cfg, f"ged_{cfg.dataset_key(0, difficulty)}",
                  lambda: distance_matrix(pool0, class_pool(cfg, difficulty),
                                          costs=costs, workers=cfg.workers))
    return PoolDistances(nominal=D00, change=D0t)


@dataclass
class SequenceDraw:
    embed: np.ndarray
    detect: np.ndarray
    nominal: np.ndarray
    change: np.ndarray


def draw_sequence(cfg: ExperimentConfig, run: int) -> SequenceDraw:
    """Bootstrap indices of one sequence.

    The nominal draws use their own random stream, so they (and every
    statistic computed from them) do not depend on the change class.
    """
    P = cfg.pool_size
    nom = np.random.default_rng([cfg.seed, run, 0])
    chg = np.random.default_rng([cfg.seed, run, 1])
    n_nominal = cfg.change_time
    return SequenceDraw(
        embed=nom.integers(P, size=cfg.n_embed_train),
        detect=nom.integers(P, size=cfg.n_detect_train),
        nominal=nom.integers(P, size=n_nominal),
        change=chg.integers(P, size=cfg.operational - n_nominal),
    )


@dataclass
class RunRecord:
    run: int
    kappa: float
    distortion: float
    alarms: list
    outcome: object
    e_train: np.ndarray = field(repr=False, default=None)
    e_operational: np.ndarray = field(repr=False, default=None)
    seconds: float = 0.0


def _operational_statistic(monitor, refs, draw, dist: PoolDistances):
    """``e`` for the operational stream, computed once per distinct graph."""
    nominal = dist.nominal[np.ix_(draw.nominal, refs)]
    change = dist.change[np.ix_(refs, draw.change)].T
    return monitor.statistic(np.vstack([nominal, change]))


def run_sequence(cfg: ExperimentConfig, run: int, dist: PoolDistances) -> RunRecord:
    """Train and monitor one bootstrapped sequence."""
    start = time.perf_counter()
    draw = draw_sequence(cfg, run)
    seed = int(np.random.SeedSequence([cfg.seed, run, 2]).generate_state(1)[0])
    D00 = dist.nominal
    method = cfg.method

    if method == "graph_domain":
        D_det = D00[np.ix_(draw.detect, draw.detect)]
        refs = [int(draw.detect[set_median_index(D_det)])]
        monitor = Monitor(method=method)
    else:
        D_emb = D00[np.ix_(draw.embed, draw.embed)]
        grid = None
        if method in MANIFOLD_METHODS:
            grid = curvature_grid(method, D_emb, cfg.grid_side, cfg.kappa_min,
                                  cfg.kappa_max, cfg.grid)
        stage = fit_references(method, D_emb, d=cfg.d, M=cfg.prototypes,
                               seed=seed, grid=grid)
        refs = [int(draw.embed[i]) for i in stage.references]
        monitor = build_monitor(stage)

    Y_train = D00[np.ix_(draw.detect, refs)]
    e_train = monitor.fit_statistic(Y_train, alpha=cfg.alpha, seed=seed,
                                    n_boot=cfg.n_boot, conditioning=cfg.conditioning)
    e_op = _operational_statistic(monitor, refs, draw, dist)
    alarms = monitor.detect(e_op)
    outcome = run_outcome(alarms, cfg.change_time, cfg.operational)
    if monitor.n_clipped:
        logger.info("run %d: %d distances clipped to pi*r", run, monitor.n_clipped)
    return RunRecord(run=run, kappa=monitor.kappa, distortion=monitor.distortion,
                     alarms=alarms, outcome=outcome, e_train=e_train,
                     e_operational=e_op, seconds=time.perf_counter() - start)


def _run_job(args):
    cfg, run, dist = args
    try:
        return run_sequence(cfg, run, dist)
    except StageError:
        raise
    except Exception as exc:  # surface the failing stage
        raise StageError("sequence", f"run {run}: {exc}") from exc


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    metrics: RunMetrics
    runs: list
    seconds: float = 0.0

    @property
    def kappa(self) -> float:
        return float(np.median([r.kappa for r in self.runs]))

    @property
    def distortion(self) -> float:
        vals = [r.distortion for r in self.runs if not math.isnan(r.distortion)]
        return float(np.median(vals)) if vals else math.nan

    def _md(self):
        cfg = self.config
        if cfg.method == "graph_domain":
            return "-", "-"
        if cfg.method == "dissimilarity":
            return str(cfg.prototypes), "-1"
        return str(cfg.prototypes), str(cfg.d)

    def summary_row(self) -> dict:
        m = self.metrics
        M, d = self._md()
        return {"method": self.config.method, "difficulty": self.config.difficulty,
                "M": M, "d": d,
                "dcr": f"{m.dcr:.3f}", "dcr_ci_lo": f"{m.dcr_ci[0]:.3f}",
                "dcr_ci_hi": f"{m.dcr_ci[1]:.3f}",
                "arl0": f"{m.arl0:.2f}", "arl0_ci_lo": f"{m.arl0_ci[0]:.2f}",
                "arl0_ci_hi": f"{m.arl0_ci[1]:.2f}",
                "arl1": f"{m.arl1:.2f}", "arl1_ci_lo": f"{m.arl1_ci[0]:.2f}",
                "arl1_ci_hi": f"{m.arl1_ci[1]:.2f}"}

    def run_rows(self) -> list:
        M, d = self._md()
        rows = []
        for r in self.runs:
            o = r.outcome
            rows.append({"method": self.config.method,
                         "difficulty": self.config.difficulty, "M": M, "d": d,
                         "run": r.run, "kappa": f"{r.kappa:.6g}",
                         "distortion": ("nan" if math.isnan(r.distortion)
                                        else f"{r.distortion:.6g}"),
                         "detected": int(o.detected), "arl0": f"{o.arl0:.2f}",
                         "arl1": f"{o.arl1:.2f}", "censored0": int(o.censored0),
                         "censored1": int(o.censored1)})
        return rows

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "summary": self.summary_row(),
                "kappa": self.kappa, "distortion": self.distortion,
                "seconds": round(self.seconds, 3),
                "censored": {"arl0": self.metrics.n_censored0,
                             "arl1": self.metrics.n_censored1}}


def write_csv(rows, columns, path=None, header=True) -> str:
    buf = io.StringIO()
    if header:
        buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(str(row[c]) for c in columns) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def run_pipeline(cfg: ExperimentConfig, dist: PoolDistances = None) -> ExperimentReport:
    """Run ``cfg.n_sequences`` independent sequences and aggregate them."""
    start = time.perf_counter()
    if dist is None:
        dist = pool_distances(cfg)
    jobs = [(cfg, run, dist) for run in range(cfg.n_sequences)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(_run_job, jobs))
    else:
        runs = [_run_job(job) for job in jobs]
    runs.sort(key=lambda r: r.run)
    metrics = compute_run_metrics([r.outcome for r in runs], n_boot=cfg.n_boot,
                                  seed=cfg.seed)
    report = ExperimentReport(config=cfg, metrics=metrics, runs=runs,
                              seconds=time.perf_counter() - start)
    logger.info("%s difficulty %d: DCR %.3f ARL0 %.1f ARL1 %.1f (%.1fs)",
                cfg.method, cfg.difficulty, metrics.dcr, metrics.arl0,
                metrics.arl1, report.seconds)
    return report


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)
