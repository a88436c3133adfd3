"""Experiment configuration: a flat key-value record loadable from YAML."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from ..graphs import DelaunayClassSpec, EditCosts

METHODS = ("graph_domain", "euclidean", "spherical", "hyperbolic", "dissimilarity")
MANIFOLD_METHODS = ("euclidean", "spherical", "hyperbolic")
CACHE_ENV = "CCDETECT_CACHE_DIR"
#: bumped whenever cached distances would change
GED_VERSION = 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    method: str = "hyperbolic"
    difficulty: int = 4
    M: Optional[int] = None          # 30 on manifolds, 15 for dissimilarity
    d: int = 15
    n_embed_train: int = 300
    n_detect_train: int = 600
    n_operational: Optional[int] = None  # defaults to 2 * n_detect_train
    alpha: float = 0.99
    n_sequences: int = 100
    seed: int = 0
    # finite class datasets the sequences are bootstrapped from
    pool_size: int = 400
    n_points: int = 10
    support_box: float = 10.0
    noise_radius: float = 0.5
    node_cost: float = 1.0
    edge_cost: float = 0.5
    substitution_cap: float = 2.0
    grid_side: int = 20
    kappa_min: float = 1e-3
    kappa_max: float = 0.2
    grid: Optional[list] = None      # explicit curvature grid, overrides the above
    conditioning: str = "renewal"
    n_boot: int = 2000
    workers: int = 1
    sweep_n_train: Optional[int] = None  # defaults to n_embed_train
    cache_dir: Optional[str] = field(default=None, metadata={"report": False})

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; pick one of {METHODS}")
        for name in ("n_embed_train", "n_detect_train", "n_sequences", "pool_size",
                     "n_points", "grid_side", "n_boot", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.n_operational is not None and self.n_operational < 2:
            raise ConfigError("n_operational must be at least 2")
        if self.M is not None and self.M < 1:
            raise ConfigError("M must be positive")
        if self.method in MANIFOLD_METHODS and self.d < 1:
            raise ConfigError("manifold methods need d >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if self.difficulty < 1:
            raise ConfigError("the change class must differ from class 0")

    @property
    def prototypes(self) -> int:
        if self.M is not None:
            return self.M
        return 15 if self.method == "dissimilarity" else 30

    @property
    def operational(self) -> int:
        return self.n_operational if self.n_operational is not None else 2 * self.n_detect_train

    @property
    def change_time(self) -> int:
        return self.operational // 2

    @property
    def costs(self) -> EditCosts:
        return EditCosts(self.node_cost, self.edge_cost, self.substitution_cap)

    def class_spec(self, class_id: int) -> DelaunayClassSpec:
        return DelaunayClassSpec(class_id=class_id, n_points=self.n_points,
                                 support_box=self.support_box,
                                 noise_radius=self.noise_radius, seed=self.seed)

    def cache_path(self) -> Optional[Path]:
        path = self.cache_dir or os.environ.get(CACHE_ENV)
        return Path(path) if path else None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.metadata.get("report", True)}

    def dataset_key(self, *class_ids) -> str:
        """Hash of everything a pool distance matrix depends on."""
        payload = {"classes": list(class_ids), "seed": self.seed,
                   "pool": self.pool_size, "n_points": self.n_points,
                   "box": self.support_box, "noise": self.noise_radius,
                   "costs": self.costs.key(), "ged": GED_VERSION}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a YAML key-value file and apply keyword overrides (``None`` skips)."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values = yaml.safe_load(fh) or {}
        if not isinstance(values, dict):
            raise ConfigError("configuration file must be a mapping")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
