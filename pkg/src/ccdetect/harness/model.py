"""Trained monitors: everything needed to turn a new graph into ``e_t``.

A monitor keeps a list of reference graphs.  A new graph is summarised by
its distances ``y`` to these references:

* ``graph_domain``: one reference, the set median of the detector training
  graphs, and ``e = y[0]``;
* ``dissimilarity``: k-centre prototypes and ``e = ||y - mean(y_train)||``;
* manifold methods: prototypes with fixed positions on ``M_kappa``; the
  graph is placed out of sample and ``e`` is its geodesic distance from the
  Fréchet mean of the embedded training graphs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..detection import CusumConfig, calibrate, detect_change
from ..embedding import (
    EmbeddingError,
    curvature_sweep,
    default_curvature_grid,
    embed,
)
from ..graphs import AttributedGraph, graph_edit_distance, set_median_index
from ..manifold import frechet_mean, geodesic_distance, pairwise_distances, radius
from ..oos import PrototypeSet, embed_out_of_sample, kcentres
from .config import MANIFOLD_METHODS

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class ReferenceStage:
    """Outcome of the first training stage on the embedding set."""

    method: str
    references: list            # indices into the embedding training set
    kappa: float = 0.0
    X: np.ndarray = None
    distortion: float = math.nan
    curve: list = field(default_factory=list)
    D_refs: np.ndarray = None   # graph distances among the references


def curvature_grid(method, D, side=20, kappa_min=1e-3, kappa_max=0.2, grid=None):
    full = (np.asarray(grid, dtype=float) if grid is not None
            else default_curvature_grid(D, side, kappa_min, kappa_max))
    if method == "spherical":
        return full[full > 0]
    if method == "hyperbolic":
        return full[full < 0]
    return np.array([0.0])


def fit_references(method, D_embed, d=15, M=30, seed=0, grid=None) -> ReferenceStage:
    """Curvature, configuration and prototypes from the embedding set.

    For ``dissimilarity`` the prototypes are k-centres of the graph distances;
    ``graph_domain`` has no first stage.
    """
    D_embed = np.asarray(D_embed, dtype=float)
    if method == "graph_domain":
        return ReferenceStage(method=method, references=[])
    if method == "dissimilarity":
        centres, _ = kcentres(D_embed, M, seed)
        return ReferenceStage(method=method, references=centres)

    grid = curvature_grid(method, D_embed) if grid is None else np.asarray(grid)
    if grid.size == 0:
        raise StageError("curvature", f"empty curvature grid for {method}")
    try:
        sweep = curvature_sweep(D_embed, grid, d, keep_solutions=True)
    except EmbeddingError as exc:
        raise StageError("curvature", str(exc)) from exc
    finite = sorted((abs(k - sweep.kappa), k) for k, v in sweep.curve
                    if math.isfinite(v))
    sol = None
    for _, kappa in finite:
        # the selected curvature may still fail on a re-run; walk to the
        # nearest feasible grid point
        try:
            sol = sweep.solutions.get(kappa) or embed(D_embed, kappa, d)
            break
        except EmbeddingError as exc:
            logger.warning("kappa=%g infeasible (%s); trying the next grid point",
                           kappa, exc)
    if sol is None:
        raise StageError("embedding", "no feasible curvature")
    dist = pairwise_distances(sol.X, kappa=sol.kappa)
    centres, _ = kcentres(dist, M, seed)
    return ReferenceStage(method=method, references=centres, kappa=sol.kappa,
                          X=sol.X, distortion=sol.distortion, curve=sweep.curve,
                          D_refs=D_embed[np.ix_(centres, centres)])


@dataclass
class Monitor:
    method: str
    cusum: CusumConfig = None
    kappa: float = 0.0
    prototypes: PrototypeSet = None
    mean: np.ndarray = None
    references: list = field(default_factory=list)
    distortion: float = math.nan
    n_clipped: int = 0

    def embed(self, Y) -> np.ndarray:
        """Out-of-sample positions for rows of prototype distances ``Y``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.kappa > 0:
            # distances beyond pi*r have no antipode on the sphere to go to
            limit = math.pi * radius(self.kappa)
            clipped = Y > limit
            if clipped.any():
                self.n_clipped += int(clipped.sum())
                Y = np.minimum(Y, limit)
        # bootstrapped streams repeat graphs; place each distinct row once
        uniq, inverse = np.unique(Y, axis=0, return_inverse=True)
        placed = np.array([embed_out_of_sample(y, self.prototypes) for y in uniq])
        return placed[np.ravel(inverse)]

    def statistic(self, Y) -> np.ndarray:
        """Monitored statistic ``e`` for rows of reference distances ``Y``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.method == "graph_domain":
            return Y[:, 0].copy()
        if self.method == "dissimilarity":
            return np.linalg.norm(Y - self.mean, axis=1)
        return geodesic_distance(self.mean, self.embed(Y), self.kappa)

    def fit_statistic(self, Y_train, alpha=0.99, seed=0, n_boot=2000,
                      conditioning="renewal"):
        """Estimate the nominal mean and calibrate the CUSUM.  Returns e_train."""
        Y_train = np.atleast_2d(np.asarray(Y_train, dtype=float))
        if self.method == "dissimilarity":
            self.mean = Y_train.mean(axis=0)
        elif self.method in MANIFOLD_METHODS:
            try:
                self.mean = frechet_mean(self.embed(Y_train), self.kappa)
            except Exception as exc:
                raise StageError("mean", str(exc)) from exc
        e_train = self.statistic(Y_train)
        try:
            self.cusum = calibrate(e_train, alpha, n_boot=n_boot, seed=seed,
                                   conditioning=conditioning)
        except ValueError as exc:
            raise StageError("calibration", str(exc)) from exc
        return e_train

    def detect(self, e_stream):
        return detect_change(e_stream, self.cusum)

    # -- graph-level interface ------------------------------------------------

    def distances(self, graphs, costs):
        return np.array([[graph_edit_distance(g, r, costs) for r in self.references]
                         for g in graphs])

    def to_dict(self) -> dict:
        out = {"method": self.method,
               "q": self.cusum.q, "h": self.cusum.h, "alpha": self.cusum.alpha,
               "kappa": self.kappa,
               "references": [g.to_dict() for g in self.references]}
        if self.prototypes is not None:
            out["positions"] = self.prototypes.positions.tolist()
            if self.prototypes.dissimilarities is not None:
                out["prototype_dissimilarities"] = self.prototypes.dissimilarities.tolist()
        if self.mean is not None:
            out["mean"] = np.asarray(self.mean).tolist()
        out["distortion"] = None if math.isnan(self.distortion) else self.distortion
        return out

    @classmethod
    def from_dict(cls, obj) -> "Monitor":
        refs = [AttributedGraph.from_dict(g) for g in obj["references"]]
        kappa = float(obj.get("kappa", 0.0))
        protos = None
        if "positions" in obj:
            protos = PrototypeSet(graphs=refs or None,
                                  positions=np.array(obj["positions"]), kappa=kappa,
                                  dissimilarities=obj.get("prototype_dissimilarities"))
        mean = np.array(obj["mean"]) if obj.get("mean") is not None else None
        dist = obj.get("distortion")
        return cls(method=obj["method"],
                   cusum=CusumConfig(q=obj["q"], h=obj["h"], alpha=obj["alpha"]),
                   kappa=kappa, prototypes=protos, mean=mean, references=refs,
                   distortion=math.nan if dist is None else float(dist))


def build_monitor(stage: ReferenceStage, reference_graphs=None) -> Monitor:
    """Monitor skeleton (no mean, no thresholds) from a first-stage result."""
    mon = Monitor(method=stage.method, kappa=stage.kappa,
                  distortion=stage.distortion,
                  references=list(reference_graphs or []))
    if stage.method in MANIFOLD_METHODS:
        positions = stage.X[stage.references]
        mon.prototypes = PrototypeSet(
            graphs=reference_graphs, positions=positions, kappa=stage.kappa,
            indices=tuple(int(i) for i in stage.references),
            dissimilarities=stage.D_refs)
    return mon


def train_monitor(method, embed_graphs, detect_graphs, costs, d=15, M=30,
                  alpha=0.99, seed=0, grid=None, n_boot=2000,
                  conditioning="renewal", workers=1) -> Monitor:
    """Graph-level training used by the CLI: both stages on explicit graphs."""
    from ..graphs import distance_matrix

    embed_graphs = list(embed_graphs)
    detect_graphs = list(detect_graphs)
    if method == "graph_domain":
        D_det = distance_matrix(detect_graphs, costs=costs, workers=workers)
        median = detect_graphs[set_median_index(D_det)]
        mon = Monitor(method=method, references=[median])
        Y = D_det[:, [set_median_index(D_det)]]
    else:
        D_emb = distance_matrix(embed_graphs, costs=costs, workers=workers)
        stage = fit_references(method, D_emb, d=d, M=M, seed=seed, grid=grid)
        refs = [embed_graphs[i] for i in stage.references]
        mon = build_monitor(stage, refs)
        Y = distance_matrix(detect_graphs, refs, costs=costs, workers=workers)
    mon.fit_statistic(Y, alpha=alpha, seed=seed, n_boot=n_boot,
                      conditioning=conditioning)
    return mon
