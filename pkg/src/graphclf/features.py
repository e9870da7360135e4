"""Artificial node features for featureless graphs.

``Identity(k)`` counts closed walks, i.e. the diagonal of ``A**l`` for
l = 2..k with the degree as the first column. Closed walks are not simple
cycles: a 4-walk can bounce back and forth along one edge. Exact simple-cycle
counts are intractable in general, so the walk convention is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generators import mix_seed, rng_for
from .graph import Graph

KINDS = ("ones", "noise", "degree", "normdegree", "identity")
_CODES = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class FeatureKind:
    name: str
    k: int = 4  # only meaningful for identity

    def __post_init__(self):
        if self.name not in _CODES:
            raise ValueError(f"unknown feature kind {self.name!r}; expected one of {KINDS}")
        if self.name == "identity" and self.k < 1:
            raise ValueError("identity depth k must be >= 1")

    @property
    def dim(self) -> int:
        return self.k if self.name == "identity" else 1

    @classmethod
    def parse(cls, text: str, identity_k: int = 4) -> "FeatureKind":
        """'ones', 'degree', 'identity', 'identity:5', ..."""
        name, _, k = text.strip().lower().replace("_", "").partition(":")
        aliases = {"id": "identity", "constant": "ones", "normdeg": "normdegree"}
        name = aliases.get(name, name)
        return cls(name, int(k) if k else identity_k)

    def __str__(self):
        return f"identity:{self.k}" if self.name == "identity" else self.name


Ones = FeatureKind("ones")
Noise = FeatureKind("noise")
Degree = FeatureKind("degree")
NormDegree = FeatureKind("normdegree")


def Identity(k: int = 4) -> FeatureKind:
    return FeatureKind("identity", k)


def closed_walk_counts(g: Graph, k: int, block: int = 512) -> np.ndarray:
    """(n, k-1) matrix whose column l-2 is diag(A**l), l = 2..k."""
    n = g.num_nodes
    a = g.adjacency()
    out = np.zeros((n, max(k - 1, 0)))
    if k < 2 or n == 0:
        return out
    for start in range(0, n, block):
        cols = np.arange(start, min(start + block, n))
        x = np.zeros((n, len(cols)))
        x[cols, np.arange(len(cols))] = 1.0
        x = a @ x
        for l in range(2, k + 1):
            x = a @ x
            out[cols, l - 2] = x[cols, np.arange(len(cols))]
    return out


def identity_features(g: Graph, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("identity depth k must be >= 1")
    deg = g.degrees().astype(np.float64)[:, None]
    return np.hstack([deg, closed_walk_counts(g, k)])


def augment(g: Graph, kind: FeatureKind, max_degree: int | None = None, seed: int = 0) -> np.ndarray:
    """Feature matrix of shape (num_nodes, kind.dim).

    ``max_degree`` is the largest degree over the whole dataset the graph
    belongs to (needed by normdegree). ``seed`` drives noise only.
    """
    n = g.num_nodes
    if kind.name == "ones":
        return np.ones((n, 1))
    if kind.name == "noise":
        return rng_for(seed, _CODES["noise"]).random((n, 1))
    if kind.name == "degree":
        return g.degrees().astype(np.float64)[:, None]
    if kind.name == "normdegree":
        if not max_degree:
            raise ValueError("normdegree needs a positive dataset max_degree")
        return g.degrees().astype(np.float64)[:, None] / max_degree
    return identity_features(g, kind.k)


def augment_dataset(graphs, kind: FeatureKind, max_degree: int | None, master_seed: int,
                    indices=None) -> list[np.ndarray]:
    """Features for many graphs; noise seeds derive from (master_seed, graph index)."""
    if indices is None:
        indices = range(len(graphs))
    return [augment(g, kind, max_degree, mix_seed(master_seed, int(i)))
            for g, i in zip(graphs, indices)]
