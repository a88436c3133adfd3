"""Distortion-versus-curvature sweeps with CSV and SVG output."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..embedding import curvature_sweep, curve_to_csv, default_curvature_grid
from .config import ExperimentConfig


@dataclass
class DistortionSweep:
    kappa: float                 # grid point with the smallest distortion
    curve: list                  # (kappa, distortion) pairs, inf where infeasible
    csv: str
    svg: str


def training_distances(cfg: ExperimentConfig) -> np.ndarray:
    """GED matrix of the first training graphs of class 0 (cached)."""
    from ..graphs import distance_matrix
    from .pipeline import _cached, class_pool

    n = cfg.sweep_n_train or cfg.n_embed_train
    if n > cfg.pool_size:
        raise ValueError(f"sweep needs {n} graphs but the pool holds {cfg.pool_size}")
    root = cfg.cache_path()
    full = root / f"ged_{cfg.dataset_key(0, 0)}.npy" if root else None
    if full is not None and full.exists():
        return np.load(full)[:n, :n]
    return _cached(cfg, f"ged_{cfg.dataset_key(0, 0)}_first{n}",
                   lambda: distance_matrix(class_pool(cfg, 0)[:n], costs=cfg.costs,
                                           workers=cfg.workers))


def sweep_grid(cfg: ExperimentConfig, D) -> np.ndarray:
    if cfg.grid is not None:
        return np.asarray(cfg.grid, dtype=float)
    return default_curvature_grid(D, cfg.grid_side, cfg.kappa_min, cfg.kappa_max)


def run_distortion_sweep(cfg: ExperimentConfig, D=None, out_dir=None) -> DistortionSweep:
    """Log distortion over the curvature grid; optionally writes
    ``distortion.csv`` and ``distortion.svg`` to ``out_dir``."""
    D = training_distances(cfg) if D is None else np.asarray(D, dtype=float)
    result = curvature_sweep(D, sweep_grid(cfg, D), cfg.d)
    csv = curve_to_csv(result.curve, log=True)
    svg = render_svg(result.curve)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "distortion.csv").write_text(csv, encoding="utf-8")
        (out / "distortion.svg").write_text(svg, encoding="utf-8")
    return DistortionSweep(kappa=result.kappa, curve=result.curve, csv=csv, svg=svg)


def render_svg(curve, width=640, height=400, margin=56) -> str:
    """Line plot of log distortion against kappa, with kappa=0 as a filled dot."""
    pts = [(float(k), math.log(v)) for k, v in curve if math.isfinite(v) and v > 0]
    zero = [(float(k), math.log(v)) for k, v in curve
            if k == 0 and math.isfinite(v) and v > 0]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    x0, x1 = margin, width - margin / 2
    y0, y1 = height - margin, margin / 2
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    if pts:
        ks = [p[0] for p in pts]
        vs = [p[1] for p in pts]
        kmin, kmax = min(ks), max(ks)
        vmin, vmax = min(vs), max(vs)
        if kmax == kmin:
            kmin, kmax = kmin - 0.5, kmax + 0.5
        if vmax == vmin:
            vmin, vmax = vmin - 0.5, vmax + 0.5
        kspan, vspan = kmax - kmin, vmax - vmin

        def sx(k):
            return x0 + (k - kmin) / kspan * (x1 - x0)

        def sy(v):
            return y0 - (v - vmin) / vspan * (y0 - y1)

        path = " ".join(f"{sx(k):.2f},{sy(v):.2f}" for k, v in pts if k != 0)
        if path:
            lines.append(f'<polyline points="{path}" fill="none" stroke="steelblue" '
                         'stroke-width="1.5"/>')
            for k, v in pts:
                if k != 0:
                    lines.append(f'<circle cx="{sx(k):.2f}" cy="{sy(v):.2f}" r="2" '
                                 'fill="none" stroke="steelblue"/>')
        for k, v in zero:
            lines.append(f'<circle cx="{sx(k):.2f}" cy="{sy(v):.2f}" r="5" '
                         'fill="black"><title>kappa=0</title></circle>')
        for k, anchor in ((kmin, "start"), (kmax, "end")):
            lines.append(f'<text x="{sx(k):.2f}" y="{y0 + 18}" font-size="11" '
                         f'text-anchor="{anchor}">{k:.3g}</text>')
        for v in (vmin, vmax):
            lines.append(f'<text x="{x0 - 6}" y="{sy(v):.2f}" font-size="11" '
                         f'text-anchor="end">{v:.3g}</text>')
    lines.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{height - 12}" font-size="12" '
                 f'text-anchor="middle">{escape("curvature kappa")}</text>')
    lines.append(f'<text x="14" y="{(y0 + y1) / 2:.0f}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 14 {(y0 + y1) / 2:.0f})">'
                 'log distortion</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
