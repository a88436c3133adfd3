"""Experiment pipeline, distortion sweeps and the command line interface."""

from .config import METHODS, ConfigError, ExperimentConfig, load_config
from .datasets import generate_dataset
from .model import Monitor, StageError, fit_references, train_monitor
from .pipeline import ExperimentReport, pool_distances, run_pipeline, write_csv
from .sweep import DistortionSweep, render_svg, run_distortion_sweep

__all__ = [
    "METHODS", "ConfigError", "DistortionSweep", "ExperimentConfig",
    "ExperimentReport", "Monitor", "StageError", "fit_references",
    "generate_dataset", "load_config", "pool_distances", "render_svg",
    "run_distortion_sweep", "run_pipeline", "train_monitor", "write_csv",
]
