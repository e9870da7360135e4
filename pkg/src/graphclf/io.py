"""Dataset files, the results store and key=value config files.

Dataset file (text, UTF-8)::

    GDS1 {"master_seed": ..., "spec": {...}, "max_degree_over_dataset": ..., "splits": [...], ...}
    G <id> <class-name> <split> <n> <m>
    u v            # m lines, u < v
    G ...

JSON is written with sorted keys and no extra whitespace, so writing the same
dataset twice yields identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .generators import DatasetSpec, LabeledDataset
from .graph import ClassLabel, from_edge_list

MAGIC = "GDS1"

RESULT_FIELDS = ("arch", "feature", "H", "K", "r", "identity_k", "seed", "epoch_best",
                 "acc_small_test", "acc_medium", "wall_s")


class FormatError(ValueError):
    pass


def dumps_dataset(ds: LabeledDataset) -> str:
    meta = dict(ds.metadata)
    meta["splits"] = [str(s) for s in ds.splits]
    meta["graph_params"] = ds.params
    lines = [f"{MAGIC} {json.dumps(meta, sort_keys=True, separators=(',', ':'))}"]
    for i, (g, label, split) in enumerate(zip(ds.graphs, ds.labels, ds.splits)):
        lines.append(f"G {i} {ClassLabel(label).name} {split} {g.num_nodes} {g.num_edges}")
        lines.extend(f"{u} {v}" for u, v in g.to_edge_list())
    return "\n".join(lines) + "\n"


def write_dataset(ds: LabeledDataset, path) -> None:
    Path(path).write_text(dumps_dataset(ds), encoding="utf-8")


def loads_dataset(text: str) -> LabeledDataset:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise FormatError(f"not a {MAGIC} dataset file")
    meta = json.loads(lines[0][len(MAGIC) + 1:])
    graphs, labels, splits = [], [], []
    pos = 1
    while pos < len(lines):
        head = lines[pos].split()
        if len(head) != 6 or head[0] != "G":
            raise FormatError(f"line {pos + 1}: expected a graph header, got {lines[pos]!r}")
        _, gid, name, split, n, m = head
        n, m = int(n), int(m)
        if int(gid) != len(graphs):
            raise FormatError(f"line {pos + 1}: graph id {gid} out of sequence")
        body = lines[pos + 1:pos + 1 + m]
        if len(body) != m:
            raise FormatError(f"graph {gid}: expected {m} edge lines")
        edges = np.array([ln.split() for ln in body], dtype=np.int64).reshape(m, 2)
        g = from_edge_list(n, edges)
        if g.num_edges != m:
            raise FormatError(f"graph {gid}: duplicate or self-loop edges in file")
        graphs.append(g)
        labels.append(int(ClassLabel.from_name(name)))
        splits.append(split)
        pos += 1 + m
    ds = LabeledDataset(graphs, np.array(labels, dtype=np.int64), np.array(splits, dtype=object),
                        DatasetSpec.from_dict(meta["spec"]), meta.get("graph_params", []))
    if ds.max_degree != meta["max_degree_over_dataset"]:
        raise FormatError("max_degree_over_dataset does not match the stored graphs")
    return ds


def read_dataset(path) -> LabeledDataset:
    return loads_dataset(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- results store

def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def append_results(path, records: list[dict]) -> None:
    """Append rows under the fixed header, writing the header for a new file."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(RESULT_FIELDS)
        for r in records:
            w.writerow([_fmt(r[k]) for k in RESULT_FIELDS])
        fh.flush()
        os.fsync(fh.fileno())


_INT_FIELDS = {"H", "K", "identity_k", "seed", "epoch_best"}
_FLOAT_FIELDS = {"r", "acc_small_test", "acc_medium", "wall_s"}


def read_results(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        if tuple(reader.fieldnames) != RESULT_FIELDS:
            raise FormatError(f"{path}: unexpected results header {reader.fieldnames}")
        rows = []
        for row in reader:
            for k in _INT_FIELDS:
                row[k] = int(row[k])
            for k in _FLOAT_FIELDS:
                row[k] = float(row[k]) if row[k] != "" else math.nan
            rows.append(row)
    return rows


# ---------------------------------------------------------------- config files

def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{path}:{i}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out
