"""Command line: generate, stats, train, grid, report."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import grid, io, netstats
from .features import KINDS, FeatureKind
from .generators import DatasetSpec, build_dataset
from .models import ARCHITECTURES, ModelConfig
from .training import FeatureSet, TrainConfig, train_once

log = logging.getLogger("graphclf")


class CLIError(Exception):
    pass


def _apply_config(args, parser):
    """Values from --config fill in options the user left at their defaults."""
    if not getattr(args, "config", None):
        return
    values = io.read_config(args.config)
    for key, raw in values.items():
        if not hasattr(args, key):
            raise CLIError(f"unknown config key {key!r}")
        if getattr(args, key) != parser.get_default(key):
            continue  # flag given explicitly
        default = parser.get_default(key)
        if isinstance(default, list) or key in ("n_range", "H", "arch", "feature", "seeds"):
            setattr(args, key, raw.replace(",", " ").split())
        elif isinstance(default, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(default, int):
            setattr(args, key, int(raw))
        elif isinstance(default, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)


def cmd_generate(args) -> int:
    if args.preset == "small":
        spec = DatasetSpec.small(args.seed)
    elif args.preset == "medium":
        spec = DatasetSpec.medium(args.seed)
    else:
        lo, hi = (int(v) for v in args.n_range)
        ratios = tuple(float(v) for v in args.split)
        spec = DatasetSpec(int(args.per_class), (lo, hi), args.seed, ratios)
    if args.preset and args.per_class:
        spec = DatasetSpec(int(args.per_class), spec.n_range, spec.master_seed, spec.split_ratios)
    ds = build_dataset(spec)
    out = Path(args.out)
    try:
        io.write_dataset(ds, out)
    except OSError as e:
        raise CLIError(f"cannot write {out}: {e}") from e
    print(f"wrote {len(ds)} graphs ({len(ds) // 8} per class) to {out}")
    summary = netstats.summarize_dataset(ds, with_path_length=False)
    print(netstats.format_summary(summary))
    return 0


def _load(path):
    try:
        return io.read_dataset(path)
    except (OSError, io.FormatError) as e:
        raise CLIError(f"cannot read dataset {path}: {e}") from e


def cmd_stats(args) -> int:
    ds = _load(args.dataset)
    if len(ds) == 0:
        raise CLIError("dataset is empty")
    summary = netstats.summarize_dataset(ds, with_path_length=not args.no_path_length)
    print(netstats.format_summary(summary))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            csv.writer(fh).writerows(netstats.summary_csv_rows(summary))
    return 0


def _train_config(args, arch, feature, h) -> TrainConfig:
    kind = FeatureKind.parse(feature, args.identity_k)
    model = ModelConfig(arch, kind, int(h), args.K, args.r, args.dropout)
    return TrainConfig(model, epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                       weight_decay=args.weight_decay, selection=args.selection)


def cmd_train(args) -> int:
    ds = _load(args.dataset)
    medium = _load(args.medium) if args.medium else None
    cfg = _train_config(args, args.arch, args.feature, args.H)
    fs = FeatureSet(ds, cfg.model.feature)
    mfs = FeatureSet(medium, cfg.model.feature) if medium is not None else None
    for seed in (int(s) for s in args.seeds):
        res = train_once(cfg, fs, seed, mfs)
        rec = res.record()
        io.append_results(args.results, [rec])
        print(json.dumps(rec))
    return 0


def cmd_grid(args) -> int:
    for p in (args.dataset, args.medium):
        if p and not Path(p).exists():
            raise CLIError(f"dataset {p} does not exist")
    spec = grid.GridSpec(tuple(args.arch), tuple(args.feature), tuple(int(h) for h in args.H),
                         args.K, args.identity_k, args.replications, args.r,
                         args.dataset, args.medium,
                         {"epochs": args.epochs, "batch_size": args.batch_size, "lr": args.lr,
                          "weight_decay": args.weight_decay, "selection": args.selection})
    rows = grid.run_grid(spec, args.results, args.workers)
    print(grid.format_table(grid.results_table(rows)))
    return 0


def cmd_report(args) -> int:
    rows = io.read_results(args.results)
    if not rows:
        raise CLIError(f"no results in {args.results}")
    written, missing = grid.write_series(rows, args.out)
    present = {(r["arch"], r["feature"]) for r in rows}
    absent = [f"{a}/{f}" for a in args.arch for f in args.feature if (a, f) not in present]
    if absent:
        log.warning("no results for: %s", ", ".join(absent))
    table = grid.format_table(grid.results_table(rows))
    (Path(args.out) / "table.txt").write_text(table + "\n")
    print(table)
    print(f"{len(written)} series written to {args.out}")
    return 0


def _train_flags(p):
    p.add_argument("--K", type=int, default=4, help="message-passing layers")
    p.add_argument("--r", type=float, default=0.5, help="SAGPool keep ratio")
    p.add_argument("--identity-k", type=int, default=4)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=1e-3)
    p.add_argument("--selection", choices=("best_val", "last"), default="best_val")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphclf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic dataset file")
    p.add_argument("--config")
    p.add_argument("--preset", choices=("small", "medium"))
    p.add_argument("--per-class", type=int)
    p.add_argument("--n-range", nargs=2, default=["250", "1024"])
    p.add_argument("--split", nargs=3, default=["0.8", "0.1", "0.1"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="per-class network statistics")
    p.add_argument("dataset")
    p.add_argument("--csv")
    p.add_argument("--no-path-length", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train one configuration for several seeds")
    p.add_argument("--config")
    p.add_argument("--dataset", required=True)
    p.add_argument("--medium")
    p.add_argument("--arch", choices=ARCHITECTURES, required=True)
    p.add_argument("--feature", required=True, help=f"one of {KINDS}; identity:K allowed")
    p.add_argument("--H", type=int, default=8)
    p.add_argument("--seeds", nargs="+", default=["0"])
    p.add_argument("--results", default="results.csv")
    _train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="run (resumable) grid search")
    p.add_argument("--config")
    p.add_argument("--dataset", required=True)
    p.add_argument("--medium")
    p.add_argument("--arch", nargs="+", default=list(ARCHITECTURES))
    p.add_argument("--feature", nargs="+", default=list(KINDS))
    p.add_argument("--H", nargs="+", default=[str(h) for h in grid.DEFAULT_H])
    p.add_argument("--replications", type=int, default=5)
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (env {grid.WORKERS_ENV} overrides the default of 1)")
    p.add_argument("--results", default="results.csv")
    _train_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="plot-data series and min-H table from a results file")
    p.add_argument("results")
    p.add_argument("--out", default="report")
    p.add_argument("--arch", nargs="+", default=list(ARCHITECTURES))
    p.add_argument("--feature", nargs="+", default=list(KINDS))
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(args, sub)
        return args.func(args)
    except (CLIError, ValueError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e),
                          "command": args.command}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
