"""Grid search over (architecture, feature, H) and the derived result tables."""
from __future__ import annotations

import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .features import KINDS, FeatureKind
from .models import ARCHITECTURES, ModelConfig
from .training import FeatureSet, TrainConfig, train_once

log = logging.getLogger(__name__)

DEFAULT_H = (1, 2, 3, 8, 16, 32)
THRESHOLDS = (1.0, 0.95, 0.9)
WORKERS_ENV = "GRAPHCLF_WORKERS"


@dataclass
class GridSpec:
    architectures: tuple[str, ...] = ARCHITECTURES
    features: tuple[str, ...] = KINDS
    H_values: tuple[int, ...] = DEFAULT_H
    K: int = 4
    identity_k: int = 4
    replications: int = 5
    ratio: float = 0.5
    train_path: str | None = None
    medium_path: str | None = None
    train: dict = field(default_factory=dict)  # extra TrainConfig fields

    def __post_init__(self):
        if not (self.architectures and self.features and self.H_values):
            raise ValueError("grid axes must be non-empty")
        for a in self.architectures:
            if a not in ARCHITECTURES:
                raise ValueError(f"unknown architecture {a!r}")
        for f in self.features:
            FeatureKind.parse(f)

    def cells(self):
        for arch in self.architectures:
            for feat in self.features:
                for h in self.H_values:
                    for seed in range(self.replications):
                        yield arch, FeatureKind.parse(feat, self.identity_k).name, h, seed


def cell_key(row: dict) -> tuple:
    return (row["arch"], row["feature"], int(row["H"]), int(row["K"]), float(row["r"]),
            int(row["identity_k"]), int(row["seed"]))


_WORKER_DATA: dict = {}


def _run_cell(spec: GridSpec, arch, feat, h, seed, train_ds=None, medium_ds=None) -> dict:
    key = (feat,)
    if key not in _WORKER_DATA:
        train_ds = train_ds or io.read_dataset(spec.train_path)
        if medium_ds is None and spec.medium_path:
            medium_ds = io.read_dataset(spec.medium_path)
        kind = FeatureKind.parse(feat, spec.identity_k)
        _WORKER_DATA[key] = (FeatureSet(train_ds, kind),
                             FeatureSet(medium_ds, kind) if medium_ds is not None else None)
    fs, mfs = _WORKER_DATA[key]
    cfg = TrainConfig(ModelConfig(arch, fs.kind, h, spec.K, spec.ratio), **spec.train)
    res = train_once(cfg, fs, seed, mfs)
    rec = res.record(spec.identity_k)
    if res.failed:
        log.warning("cell %s/%s/H=%d seed %d diverged", arch, feat, h, seed)
    return rec


def worker_count(requested: int | None = None) -> int:
    if requested:
        return requested
    env = os.environ.get(WORKERS_ENV)
    return int(env) if env else 1


def run_grid(spec: GridSpec, results_path, workers: int | None = None,
             train_ds=None, medium_ds=None) -> list[dict]:
    """Run every missing cell and append its record; returns all rows for the grid.

    Cells already present in ``results_path`` (same key) are skipped, so an
    interrupted grid resumes where it stopped.
    """
    done = {cell_key(r) for r in io.read_results(results_path)}
    todo = []
    for arch, feat, h, seed in spec.cells():
        key = (arch, feat, h, spec.K, float(spec.ratio), spec.identity_k, seed)
        if key not in done:
            todo.append((arch, feat, h, seed))
    log.info("%d cells to run, %d already done", len(todo), len(done))
    n = worker_count(workers)
    if n <= 1 or len(todo) <= 1:
        for cell in todo:
            io.append_results(results_path, [_run_cell(spec, *cell, train_ds, medium_ds)])
    else:
        _WORKER_DATA.clear()
        with ProcessPoolExecutor(n) as pool:
            futures = [pool.submit(_run_cell, spec, *cell) for cell in todo]
            # single writer: only this process appends
            for fut in as_completed(futures):
                io.append_results(results_path, [fut.result()])
    wanted = {(a, f, h, spec.K, float(spec.ratio), spec.identity_k, s)
              for a, f, h, s in spec.cells()}
    return [r for r in io.read_results(results_path) if cell_key(r) in wanted]


# ---------------------------------------------------------------- derived tables

def aggregate(rows: list[dict]) -> dict[tuple, dict]:
    """Mean and std of accuracies per (arch, feature, H) over finished runs."""
    groups = defaultdict(list)
    for r in rows:
        groups[(r["arch"], r["feature"], int(r["H"]))].append(r)
    out = {}
    for key, rs in sorted(groups.items()):
        entry = {"n": len(rs)}
        for col, name in (("acc_small_test", "small"), ("acc_medium", "medium")):
            vals = np.array([r[col] for r in rs], dtype=float)
            vals = vals[~np.isnan(vals)]
            entry[f"{name}_mean"] = float(vals.mean()) if len(vals) else math.nan
            entry[f"{name}_std"] = float(vals.std()) if len(vals) else math.nan
        out[key] = entry
    return out


def min_h(series: dict[int, float], level: float) -> int | None:
    """Smallest H whose mean accuracy reaches ``level``."""
    hits = [h for h, acc in sorted(series.items()) if not math.isnan(acc) and acc >= level - 1e-12]
    return hits[0] if hits else None


def generalisation_ratio(small: dict[int, float], medium: dict[int, float],
                         level: float = 0.9) -> float | None:
    """Among the H values reaching ``level`` on the small test split, the
    fraction that also reach it on the medium dataset."""
    reached = [h for h, acc in small.items() if not math.isnan(acc) and acc >= level - 1e-12]
    if not reached:
        return None
    ok = [h for h in reached if not math.isnan(medium.get(h, math.nan)) and medium[h] >= level - 1e-12]
    return len(ok) / len(reached)


def results_table(rows: list[dict]) -> dict[tuple[str, str], dict]:
    """Per (arch, feature): min-H at each accuracy level and the 90% ratio."""
    agg = aggregate(rows)
    cells = defaultdict(lambda: ({}, {}))
    for (arch, feat, h), e in agg.items():
        cells[(arch, feat)][0][h] = e["small_mean"]
        cells[(arch, feat)][1][h] = e["medium_mean"]
    out = {}
    for key, (small, medium) in sorted(cells.items()):
        out[key] = {"min_h": {lvl: (min_h(small, lvl), min_h(medium, lvl)) for lvl in THRESHOLDS},
                    "ratio90": generalisation_ratio(small, medium, 0.9)}
    return out


def format_table(table: dict) -> str:
    """Aligned text: one row per architecture, one column per feature."""
    archs = [a for a in ARCHITECTURES if any(k[0] == a for k in table)]
    feats = [f for f in KINDS if any(k[1] == f for k in table)]

    def cell(arch, feat):
        e = table.get((arch, feat))
        if e is None:
            return ["n/a"] * 4
        fmt = lambda v: "-" if v is None else str(v)
        lines = [f"{fmt(s)}, {fmt(m)}" for s, m in (e["min_h"][lvl] for lvl in THRESHOLDS)]
        lines.append("-" if e["ratio90"] is None else f"{round(100 * e['ratio90'])}%")
        return lines

    grid = {(a, f): cell(a, f) for a in archs for f in feats}
    w0 = max([len(a) for a in archs] + [12])
    widths = {f: max(len(f), *(len(x) for a in archs for x in grid[(a, f)])) for f in feats}
    out = [" " * w0 + " | " + " | ".join(f.ljust(widths[f]) for f in feats)]
    for a in archs:
        out.append("-" * len(out[0]))
        for i in range(4):
            label = a if i == 0 else ""
            out.append(label.ljust(w0) + " | " + " | ".join(grid[(a, f)][i].ljust(widths[f]) for f in feats))
    return "\n".join(out)


def write_series(rows: list[dict], out_dir) -> tuple[list[Path], list[str]]:
    """One CSV per (arch, feature, dataset): H, mean, std, n.

    Returns the written paths and a list of (arch, feature) combinations that
    have no results at all.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg = aggregate(rows)
    written, missing = [], []
    archs = sorted({k[0] for k in agg}, key=ARCHITECTURES.index)
    feats = sorted({k[1] for k in agg}, key=KINDS.index)
    for arch in archs:
        for feat in feats:
            hs = sorted(h for (a, f, h) in agg if a == arch and f == feat)
            if not hs:
                missing.append(f"{arch}/{feat}")
                continue
            for ds in ("small", "medium"):
                path = out_dir / f"{arch}_{feat}_{ds}.csv"
                with open(path, "w") as fh:
                    fh.write("H,mean,std,n\n")
                    for h in hs:
                        e = agg[(arch, feat, h)]
                        mean, std = e[f"{ds}_mean"], e[f"{ds}_std"]
                        fmt = lambda v: "" if math.isnan(v) else f"{v:.6f}"
                        fh.write(f"{h},{fmt(mean)},{fmt(std)},{e['n']}\n")
                written.append(path)
    return written, missing
