"""Network statistics: transitivity, average path length and per-class summaries."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse import csgraph

from .graph import ClassLabel, Graph


class UndefinedStatistic(ValueError):
    pass


@dataclass(frozen=True)
class GraphStats:
    num_nodes: int
    num_edges: int
    avg_degree: float
    density: float
    transitivity: float
    avg_path_length: float | None
    max_degree: int

    def as_dict(self) -> dict:
        return asdict(self)


def triangle_count(g: Graph) -> int:
    a = g.adjacency()
    # each triangle is seen 6 times as (ordered edge, common neighbour)
    return int(round((a @ a).multiply(a).sum())) // 6


def transitivity(g: Graph) -> float:
    """3 * triangles / connected triples, 0 when there are no triples."""
    d = g.degrees().astype(np.int64)
    triads = int((d * (d - 1) // 2).sum())
    if triads == 0:
        return 0.0
    return 3 * triangle_count(g) / triads


def largest_component(g: Graph) -> np.ndarray:
    _, comp = csgraph.connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(comp)
    return np.flatnonzero(comp == np.argmax(sizes))


def avg_path_length(g: Graph) -> float:
    """Mean BFS distance over ordered pairs of distinct nodes in the largest component."""
    nodes = largest_component(g) if g.num_nodes else np.array([], dtype=np.int64)
    if len(nodes) < 2:
        raise UndefinedStatistic("average path length needs a component with >= 2 nodes")
    sub = g.adjacency()[nodes][:, nodes]
    dist = csgraph.shortest_path(sub, method="D", directed=False, unweighted=True)
    k = len(nodes)
    return float(dist.sum() / (k * (k - 1)))


def density(g: Graph) -> float:
    n = g.num_nodes
    return 2 * g.num_edges / (n * (n - 1)) if n > 1 else 0.0


def stats(g: Graph) -> GraphStats:
    try:
        ell = avg_path_length(g)
    except UndefinedStatistic:
        ell = None
    d = g.degrees()
    return GraphStats(g.num_nodes, g.num_edges,
                      2 * g.num_edges / g.num_nodes if g.num_nodes else 0.0,
                      density(g), transitivity(g), ell, int(d.max(initial=0)))


def is_high_transitivity(s: GraphStats) -> bool:
    """High means T is not below the density of the graph."""
    return s.transitivity >= s.density


def is_small_world(s: GraphStats, log=math.log) -> bool:
    """Low average path length: l < log(N); ``log`` picks the base."""
    return s.avg_path_length is not None and s.avg_path_length < log(s.num_nodes)


SUMMARY_COLUMNS = ("num_edges", "avg_degree", "density", "transitivity", "avg_path_length")


def summarize_dataset(ds, with_path_length: bool = True) -> dict[str, dict[str, tuple[float, float, float]]]:
    """Per-class (mean, min, max) of the summary columns.

    ``with_path_length=False`` skips the all-pairs BFS, which dominates the
    cost on larger datasets.
    """
    rows: dict[str, dict[str, list[float]]] = {}
    for g, label in zip(ds.graphs, ds.labels):
        if with_path_length:
            s = stats(g).as_dict()
        else:
            s = {"num_edges": g.num_edges, "avg_degree": 2 * g.num_edges / g.num_nodes,
                 "density": density(g), "transitivity": transitivity(g), "avg_path_length": None}
        bucket = rows.setdefault(ClassLabel(label).name, {c: [] for c in SUMMARY_COLUMNS})
        for c in SUMMARY_COLUMNS:
            if s[c] is not None:
                bucket[c].append(float(s[c]))
    if not rows:
        raise ValueError("dataset is empty")
    out = {}
    for name in (c.name for c in ClassLabel):
        if name not in rows:
            continue
        out[name] = {c: (float(np.mean(v)), float(np.min(v)), float(np.max(v))) if v
                     else (math.nan, math.nan, math.nan)
                     for c, v in rows[name].items()}
    return out


def format_summary(summary: dict) -> str:
    """Aligned text table: mean (min-max) per class and column."""
    header = ["Label", "|E|", "<deg>", "d", "T", "l"]
    fmt = {"num_edges": "{:.0f} ({:.0f}-{:.0f})"}
    lines = []
    for name, cols in summary.items():
        cells = [name]
        for c in SUMMARY_COLUMNS:
            f = fmt.get(c, "{:.2f} ({:.2f}-{:.2f})")
            cells.append(f.format(*cols[c]))
        lines.append(cells)
    widths = [max(len(r[i]) for r in [header] + lines) for i in range(len(header))]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in lines]
    return "\n".join(out)


def summary_csv_rows(summary: dict) -> list[list]:
    rows = [["label"] + [f"{c}_{s}" for c in SUMMARY_COLUMNS for s in ("mean", "min", "max")]]
    for name, cols in summary.items():
        rows.append([name] + [v for c in SUMMARY_COLUMNS for v in cols[c]])
    return rows
