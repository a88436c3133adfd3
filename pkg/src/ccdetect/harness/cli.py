"""Command line interface: ``ccdetect {gen,train,run,sweep,detect}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config

log = logging.getLogger("ccdetect")

_INT_FIELDS = {"difficulty", "M", "d", "n_embed_train", "n_detect_train",
               "n_operational", "n_sequences", "seed", "pool_size", "n_points",
               "grid_side", "n_boot", "workers", "sweep_n_train"}
_STR_FIELDS = {"method", "conditioning", "cache_dir"}


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def _add_config_flags(parser):
    parser.add_argument("-c", "--config", help="YAML key-value configuration file")
    group = parser.add_argument_group("configuration overrides")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "grid":
            kind, meta = _float_list, "K1,K2,..."
        elif f.name in _INT_FIELDS:
            kind, meta = int, "INT"
        elif f.name in _STR_FIELDS:
            kind, meta = str, "STR"
        else:
            kind, meta = float, "FLOAT"
        group.add_argument(flag, dest=f"cfg_{f.name}", type=kind, metavar=meta,
                           default=None, help=f"override {f.name}")


def _config(args) -> ExperimentConfig:
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_")}
    return load_config(args.config, **overrides)


def _cmd_gen(args):
    from .datasets import generate_dataset

    cfg = _config(args)
    for path in generate_dataset(cfg, args.classes, args.n_graphs, args.out):
        print(path)


def _training_graphs(cfg, args):
    from ..graphs import generate_class_graphs, read_graphs

    n_e, n_d = cfg.n_embed_train, cfg.n_detect_train
    if args.data:
        graphs = read_graphs(args.data)
    else:
        graphs = generate_class_graphs(cfg.class_spec(0), n_e + n_d)
    if len(graphs) < n_e + n_d and cfg.method != "graph_domain":
        raise ConfigError(f"need {n_e + n_d} training graphs, found {len(graphs)}")
    if cfg.method == "graph_domain":
        return [], graphs[:n_d]
    return graphs[:n_e], graphs[n_e:n_e + n_d]


def _cmd_train(args):
    from .model import train_monitor

    cfg = _config(args)
    embed_graphs, detect_graphs = _training_graphs(cfg, args)
    monitor = train_monitor(cfg.method, embed_graphs, detect_graphs, cfg.costs,
                            d=cfg.d, M=cfg.prototypes, alpha=cfg.alpha,
                            seed=cfg.seed, grid=cfg.grid, n_boot=cfg.n_boot,
                            conditioning=cfg.conditioning, workers=cfg.workers)
    text = json.dumps(monitor.to_dict(), sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)


def _cmd_run(args):
    from .pipeline import RUN_COLUMNS, SUMMARY_COLUMNS, report_json, run_pipeline, write_csv

    cfg = _config(args)
    report = run_pipeline(cfg)
    text = write_csv([report.summary_row()], SUMMARY_COLUMNS, args.out)
    if args.runs:
        write_csv(report.run_rows(), RUN_COLUMNS, args.runs)
    if args.json:
        Path(args.json).write_text(report_json(report) + "\n", encoding="utf-8")
    if not args.out:
        sys.stdout.write(text)


def _cmd_sweep(args):
    from .sweep import run_distortion_sweep

    cfg = _config(args)
    result = run_distortion_sweep(cfg, out_dir=args.out)
    if args.out:
        print(Path(args.out) / "distortion.csv")
        print(Path(args.out) / "distortion.svg")
    else:
        sys.stdout.write(result.csv)
    log.info("lowest distortion at kappa=%g", result.kappa)


def _cmd_detect(args):
    from ..graphs import EditCosts, read_graphs
    from .model import Monitor

    cfg = _config(args)
    monitor = Monitor.from_dict(json.loads(Path(args.model).read_text(encoding="utf-8")))
    costs = EditCosts(cfg.node_cost, cfg.edge_cost, cfg.substitution_cap)
    e = monitor.statistic(monitor.distances(read_graphs(args.stream), costs))
    for t in monitor.detect(e):
        print(t)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccdetect",
        description="Change detection in graph streams via constant-curvature embeddings.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write class datasets as JSONL")
    p.add_argument("--classes", type=int, nargs="+", default=[0])
    p.add_argument("--n-graphs", type=int, default=100)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a monitor and write it as JSON")
    p.add_argument("--data", help="class-0 JSONL (default: generated)")
    p.add_argument("--out", help="model file (default: stdout)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("run", help="full bootstrapped experiment, CSV report")
    p.add_argument("--out", help="summary CSV (default: stdout)")
    p.add_argument("--runs", help="per-run CSV")
    p.add_argument("--json", help="report JSON")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="distortion against curvature, CSV and SVG")
    p.add_argument("--out", help="output directory (default: CSV to stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("detect", help="alarm times of a trained model on a stream")
    p.add_argument("--model", required=True)
    p.add_argument("--stream", required=True, help="JSONL graph stream")
    p.set_defaults(func=_cmd_detect)

    for name in ("gen", "train", "run", "sweep", "detect"):
        _add_config_flags(sub.choices[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # stage failures carry their own stage tag
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
