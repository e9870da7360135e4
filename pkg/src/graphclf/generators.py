"""Seeded generators for the eight network classes and dataset assembly.

Per-graph randomness comes from ``numpy.random.Generator(PCG64(seed))`` where
``seed = mix_seed(master_seed, class_code, index)``; ``mix_seed`` folds its
arguments through the splitmix64 finalizer, so a graph's seed does not depend
on generation order.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import ClassLabel, Graph, from_edge_list

_MASK64 = (1 << 64) - 1

SPLITS = ("train", "val", "test")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Deterministic 64-bit hash of a tuple of integers."""
    h = 0x6A09E667F3BCC908
    for p in parts:
        h = _splitmix64(h ^ (int(p) & _MASK64))
    return h


def rng_for(*parts: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix_seed(*parts)))


class Neighborhood(str, enum.Enum):
    VON_NEUMANN = "VonNeumann"
    MOORE = "Moore"


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed)


def gen_er(n: int, p: float, seed) -> Graph:
    """G(n, p): every unordered pair is an edge independently with probability p."""
    if n < 2:
        raise ValueError("ER graph needs n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    rng = _as_rng(seed)
    npairs = n * (n - 1) // 2
    hits = np.flatnonzero(rng.random(npairs) < p)
    # invert the row-major upper-triangle index k -> (i, j), i < j
    i = (n - 2 - np.floor(np.sqrt(-8.0 * hits + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    j = hits + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2
    return from_edge_list(n, np.stack([i, j], axis=1))


def gen_ws(n: int, k: int, rewire_p: float, seed) -> Graph:
    """Watts-Strogatz: ring lattice of k nearest neighbours, then per-edge rewiring.

    Edges are visited lap by lap (offset 1..k/2, node order within a lap). A
    rewired edge keeps its first endpoint and gets a uniform new target that
    is neither the node itself nor an existing neighbour, so |E| = n*k/2.
    """
    if k % 2 or k < 2:
        raise ValueError(f"k={k} must be a positive even number")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than n={n}")
    rng = _as_rng(seed)
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    coins = rng.random((k // 2, n))
    for j in range(1, k // 2 + 1):
        for u in range(n):
            if coins[j - 1, u] >= rewire_p:
                continue
            v = (u + j) % n
            if v not in adj[u] or len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return from_edge_list(n, edges)


def gen_ba(n: int, m: int, seed) -> Graph:
    """Barabasi-Albert preferential attachment from m isolated seed nodes."""
    if m < 1 or m >= n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = _as_rng(seed)
    edges = np.empty((m * (n - m), 2), dtype=np.int64)
    # one entry per edge endpoint, so uniform draws are degree-proportional
    stubs = np.empty(2 * m * (n - m), dtype=np.int64)
    nstubs = 0
    targets = list(range(m))
    pos = 0
    for src in range(m, n):
        for t in targets:
            edges[pos] = (src, t)
            pos += 1
        stubs[nstubs:nstubs + m] = targets
        stubs[nstubs + m:nstubs + 2 * m] = src
        nstubs += 2 * m
        if src == n - 1:
            break
        chosen: list[int] = []
        while len(chosen) < m:
            for idx in rng.integers(nstubs, size=2 * m):
                t = int(stubs[idx])
                if t not in chosen:
                    chosen.append(t)
                    if len(chosen) == m:
                        break
        targets = chosen
    return from_edge_list(n, edges)


def gen_grid(rows: int, cols: int, neighborhood=Neighborhood.VON_NEUMANN, seed=None) -> Graph:
    """Periodic (torus) lattice. ``seed`` is accepted and ignored."""
    if rows < 4 or cols < 4:
        raise ValueError(f"grid dims must both be >= 4, got {rows}x{cols}")
    nb = Neighborhood(neighborhood)
    r, c = np.divmod(np.arange(rows * cols), cols)
    steps = [(0, 1), (1, 0)]
    if nb is Neighborhood.MOORE:
        steps += [(1, 1), (1, -1)]
    src = np.arange(rows * cols)
    edges = [np.stack([src, ((r + dr) % rows) * cols + (c + dc) % cols], axis=1)
             for dr, dc in steps]
    return from_edge_list(rows * cols, np.concatenate(edges))


def grid_dims(n: int) -> tuple[int, int] | None:
    """Most square factor pair of n with both factors >= 4, or None."""
    for rows in range(math.isqrt(n), 3, -1):
        if n % rows == 0 and n // rows >= 4:
            return rows, n // rows
    return None


# per-class generator parameters
CLASS_PARAMS = {
    ClassLabel.ER_low: {"model": "ER", "mean_degree": 4},
    ClassLabel.ER_high: {"model": "ER", "mean_degree": 8},
    ClassLabel.WS_low: {"model": "WS", "k": 4},
    ClassLabel.WS_high: {"model": "WS", "k": 8},
    ClassLabel.BA_low: {"model": "BA", "m": 2},
    ClassLabel.BA_high: {"model": "BA", "m": 4},
    ClassLabel.GRID_low: {"model": "GRID", "neighborhood": Neighborhood.VON_NEUMANN.value},
    ClassLabel.GRID_high: {"model": "GRID", "neighborhood": Neighborhood.MOORE.value},
}

WS_REWIRE_RANGE = (0.1, 0.11)


def generate(label: ClassLabel, n: int, rng: np.random.Generator) -> tuple[Graph, dict]:
    """One graph of class ``label`` with about n nodes; returns (graph, params used)."""
    spec = CLASS_PARAMS[ClassLabel(label)]
    model = spec["model"]
    if model == "ER":
        p = spec["mean_degree"] / n
        return gen_er(n, p, rng), {"n": n, "p": p}
    if model == "WS":
        w = float(rng.uniform(*WS_REWIRE_RANGE))
        return gen_ws(n, spec["k"], w, rng), {"n": n, "k": spec["k"], "rewire_p": w}
    if model == "BA":
        return gen_ba(n, spec["m"], rng), {"n": n, "m": spec["m"]}
    dims = grid_dims(n)
    if dims is None:
        raise ValueError(f"n={n} has no grid factorisation with both dims >= 4")
    g = gen_grid(*dims, spec["neighborhood"])
    return g, {"n": n, "rows": dims[0], "cols": dims[1], "neighborhood": spec["neighborhood"]}


@dataclass(frozen=True)
class DatasetSpec:
    per_class_count: int = 250
    n_range: tuple[int, int] = (250, 1024)
    master_seed: int = 0
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def __post_init__(self):
        if self.per_class_count < 1:
            raise ValueError("per_class_count must be positive")
        lo, hi = self.n_range
        if not 2 <= lo <= hi:
            raise ValueError(f"bad n_range {self.n_range}")
        if len(self.split_ratios) != 3 or min(self.split_ratios) < 0 \
                or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios {self.split_ratios} must be 3 non-negative fractions summing to 1")

    @classmethod
    def small(cls, seed: int = 0) -> "DatasetSpec":
        return cls(250, (250, 1024), seed, (0.8, 0.1, 0.1))

    @classmethod
    def medium(cls, seed: int = 0) -> "DatasetSpec":
        return cls(250, (1024, 2048), seed, (0.0, 0.0, 1.0))

    def to_dict(self) -> dict:
        return {"per_class_count": self.per_class_count, "n_range": list(self.n_range),
                "master_seed": self.master_seed, "split_ratios": list(self.split_ratios)}

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        return cls(int(d["per_class_count"]), tuple(d["n_range"]), int(d["master_seed"]),
                   tuple(float(x) for x in d["split_ratios"]))


@dataclass
class LabeledDataset:
    graphs: list[Graph]
    labels: np.ndarray
    splits: np.ndarray  # array of "train" / "val" / "test"
    spec: DatasetSpec
    params: list[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.graphs)

    @property
    def max_degree(self) -> int:
        return max((int(g.degrees().max(initial=0)) for g in self.graphs), default=0)

    @property
    def metadata(self) -> dict:
        return {"master_seed": self.spec.master_seed, "spec": self.spec.to_dict(),
                "class_params": {c.name: CLASS_PARAMS[c] for c in ClassLabel},
                "max_degree_over_dataset": self.max_degree}

    def indices(self, split: str) -> np.ndarray:
        return np.flatnonzero(self.splits == split)

    def subset(self, split: str) -> tuple[list[Graph], np.ndarray]:
        idx = self.indices(split)
        return [self.graphs[i] for i in idx], self.labels[idx]


def split_counts(count: int, ratios) -> list[int]:
    """Largest-remainder apportionment of ``count`` items over ``ratios``."""
    raw = [count * r for r in ratios]
    base = [math.floor(x) for x in raw]
    rest = count - sum(base)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base


def _draw_n(label: ClassLabel, n_range, rng, grid_choices) -> int:
    lo, hi = n_range
    if CLASS_PARAMS[label]["model"] == "GRID":
        return int(grid_choices[rng.integers(len(grid_choices))])
    return int(rng.integers(lo, hi + 1))


def build_dataset(spec: DatasetSpec) -> LabeledDataset:
    """Generate ``per_class_count`` graphs per class with a stratified split."""
    lo, hi = spec.n_range
    grid_choices = np.array([n for n in range(lo, hi + 1) if grid_dims(n) is not None])
    if len(grid_choices) == 0:
        raise ValueError(f"n_range {spec.n_range} admits no grid with both dims >= 4")
    graphs, labels, splits, params = [], [], [], []
    counts = split_counts(spec.per_class_count, spec.split_ratios)
    for label in ClassLabel:
        for idx in range(spec.per_class_count):
            rng = rng_for(spec.master_seed, int(label), idx)
            n = _draw_n(label, spec.n_range, rng, grid_choices)
            g, p = generate(label, n, rng)
            graphs.append(g)
            labels.append(int(label))
            params.append(p)
        order = rng_for(spec.master_seed, int(label), -1).permutation(spec.per_class_count)
        assign = np.empty(spec.per_class_count, dtype=object)
        assign[order] = np.repeat(np.array(SPLITS, dtype=object), counts)
        splits.extend(assign.tolist())
    return LabeledDataset(graphs, np.array(labels, dtype=np.int64),
                          np.array(splits, dtype=object), spec, params)
