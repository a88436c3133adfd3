"""Delaunay graph classes of tunable difficulty, and their JSONL storage.

Class 0 is defined by ``n_points`` seed points drawn uniformly in a square
box.  Class ``t >= 1`` displaces every class-0 seed point by a vector drawn
uniformly in a disc of radius ``10 * 2**-t``, so higher classes are harder to
tell apart from class 0.  Every emitted graph jitters the seed points of its
class with uniform noise in a disc of radius ``noise_radius`` and connects
them by Delaunay triangulation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import AttributedGraph
from .delaunay import TriangulationError, delaunay_edges

MAX_RETRIES = 20


@dataclass(frozen=True)
class DelaunayClassSpec:
    class_id: int = 0
    n_points: int = 10
    support_box: float = 10.0
    noise_radius: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError("class id must be nonnegative")
        if self.n_points < 3:
            raise ValueError("a Delaunay graph needs at least 3 points")
        if self.support_box <= 0 or self.noise_radius < 0:
            raise ValueError("box side must be positive, noise nonnegative")

    @property
    def perturbation_radius(self) -> float:
        return 0.0 if self.class_id == 0 else 10.0 * 2.0 ** (-self.class_id)

    def to_json(self) -> str:
        return json.dumps({"spec": asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "DelaunayClassSpec":
        obj = json.loads(line)
        return cls(**obj.get("spec", obj))


def uniform_disc(rng, n: int, radius: float) -> np.ndarray:
    """``n`` points uniformly distributed in a disc of the given radius."""
    rho = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack((rho * np.cos(theta), rho * np.sin(theta)))


def class_seed_points(spec: DelaunayClassSpec) -> np.ndarray:
    """Seed points of a class; fixed by ``(spec.seed, spec.class_id)``."""
    base_rng = np.random.default_rng([spec.seed, 0])
    base = spec.support_box * base_rng.random((spec.n_points, 2))
    if spec.class_id == 0:
        return base
    rng = np.random.default_rng([spec.seed, spec.class_id])
    return base + uniform_disc(rng, spec.n_points, spec.perturbation_radius)


def generate_class_graph(spec: DelaunayClassSpec, rng,
                         seed_points=None) -> AttributedGraph:
    """Draw one graph of the class described by ``spec``."""
    if seed_points is None:
        seed_points = class_seed_points(spec)
    for _ in range(MAX_RETRIES):
        pts = seed_points + uniform_disc(rng, spec.n_points, spec.noise_radius)
        try:
            return AttributedGraph(pts, delaunay_edges(pts))
        except TriangulationError:
            continue
    raise TriangulationError(f"no valid triangulation after {MAX_RETRIES} draws")


def generate_class_graphs(spec: DelaunayClassSpec, n: int, rng=None) -> list:
    if rng is None:
        rng = np.random.default_rng([spec.seed, spec.class_id, 1])
    seed_points = class_seed_points(spec)
    return [generate_class_graph(spec, rng, seed_points) for _ in range(n)]


def write_dataset(path, spec: DelaunayClassSpec, graphs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(spec.to_json() + "\n")
        for g in graphs:
            fh.write(g.to_json() + "\n")
    return path


def read_graphs(path) -> list:
    """Graphs of a JSONL file; a leading spec header line is skipped."""
    graphs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "spec" in obj:
                continue
            graphs.append(AttributedGraph.from_dict(obj))
    return graphs


def read_dataset(path):
    """``(spec, graphs)`` from a dataset file written by :func:`write_dataset`."""
    with Path(path).open(encoding="utf-8") as fh:
        spec = DelaunayClassSpec.from_json(fh.readline())
    return spec, read_graphs(path)
