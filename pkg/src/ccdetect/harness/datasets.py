"""Writing class datasets to disk."""

from __future__ import annotations

from pathlib import Path

from ..graphs import generate_class_graphs, write_dataset
from .config import ExperimentConfig


def dataset_path(out_dir, class_id: int) -> Path:
    return Path(out_dir) / f"class_{class_id:02d}.jsonl"


def generate_dataset(cfg: ExperimentConfig, class_ids, n_graphs: int, out_dir) -> list:
    """One JSONL file per class: a spec header line, then one graph per line."""
    paths = []
    for cid in class_ids:
        spec = cfg.class_spec(int(cid))
        graphs = generate_class_graphs(spec, n_graphs)
        paths.append(write_dataset(dataset_path(out_dir, int(cid)), spec, graphs))
    return paths
