"""Change detection in streams of attributed graphs through embeddings on
constant-curvature manifolds."""

from .detection import CusumConfig, calibrate, compute_run_metrics, detect_change
from .embedding import curvature_sweep, embed
from .manifold import frechet_mean, geodesic_distance, project_to_manifold
from .oos import PrototypeSet, embed_out_of_sample

__version__ = "0.1.0"

__all__ = [
    "CusumConfig", "PrototypeSet", "calibrate", "compute_run_metrics",
    "curvature_sweep", "detect_change", "embed", "embed_out_of_sample",
    "frechet_mean", "geodesic_distance", "project_to_manifold",
]
