"""Immutable undirected simple graphs in CSR form."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for malformed graph input."""


class ClassLabel(enum.IntEnum):
    ER_low = 0
    ER_high = 1
    WS_low = 2
    WS_high = 3
    BA_low = 4
    BA_high = 5
    GRID_low = 6
    GRID_high = 7

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown class name {name!r}") from None


NUM_CLASSES = len(ClassLabel)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph stored as a symmetric CSR adjacency.

    ``neighbors[offsets[v]:offsets[v + 1]]`` is the strictly increasing
    neighbour list of node ``v``. Build instances with :func:`from_edge_list`.
    """

    num_nodes: int
    offsets: np.ndarray
    neighbors: np.ndarray
    num_edges: int
    _csr: sp.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.offsets.setflags(write=False)
        self.neighbors.setflags(write=False)
        data = np.ones(len(self.neighbors), dtype=np.float64)
        a = sp.csr_matrix((data, self.neighbors, self.offsets),
                          shape=(self.num_nodes, self.num_nodes))
        object.__setattr__(self, "_csr", a)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.num_nodes == other.num_nodes
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors))

    def __hash__(self):
        return hash((self.num_nodes, self.neighbors.tobytes()))

    def __repr__(self):
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def adjacency(self) -> sp.csr_matrix:
        """Shared read-only scipy view; copy before mutating."""
        return self._csr

    def to_edge_list(self) -> np.ndarray:
        """Edges as an (m, 2) array with u < v, sorted lexicographically."""
        rows = np.repeat(np.arange(self.num_nodes), self.degrees())
        mask = rows < self.neighbors
        return np.stack([rows[mask], self.neighbors[mask]], axis=1)


def from_edge_list(n: int, edges: Iterable[Sequence[int]] | np.ndarray) -> Graph:
    """Build a graph on ``n`` nodes, dropping self-loops and duplicate edges."""
    if n < 0:
        raise GraphError(f"negative node count {n}")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise GraphError("edges must be pairs")
    bad = (e < 0) | (e >= n)
    if bad.any():
        i = int(np.nonzero(bad.any(axis=1))[0][0])
        raise GraphError(f"edge {tuple(int(x) for x in e[i])} out of range for n={n}")
    e = e[e[:, 0] != e[:, 1]]
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    key = np.unique(lo * max(n, 1) + hi)
    lo, hi = key // max(n, 1), key % max(n, 1)
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return Graph(n, offsets, dst.astype(np.int64), int(len(key)))


def degree(g: Graph, v: int) -> int:
    if not 0 <= v < g.num_nodes:
        raise GraphError(f"node {v} out of range")
    return int(g.offsets[v + 1] - g.offsets[v])


def adjacency_matvec(g: Graph, x) -> np.ndarray:
    """y[v] = sum of x over the neighbours of v. Accepts vectors or column blocks."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.num_nodes:
        raise GraphError(f"length {x.shape[0]} does not match {g.num_nodes} nodes")
    return g.adjacency() @ x


def permute(g: Graph, perm) -> Graph:
    """Relabel node v as perm[v]."""
    perm = np.asarray(perm)
    return from_edge_list(g.num_nodes, perm[g.to_edge_list()])
