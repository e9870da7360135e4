"""Message-passing layers (GCN, GIN, GATv2), SAGPool and the sum readout.

Layers are plain functions over a :class:`Batch` and a dict of parameter
tensors; ``init_*`` helpers build those dicts.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tensor
from .graph import Graph


@dataclass(eq=False)
class Batch:
    """A minibatch of graphs as one block-diagonal adjacency.

    ``seg[v]`` is the graph (0..num_graphs-1) that node ``v`` belongs to;
    nodes of one graph are contiguous.
    """

    adj: sp.csr_matrix
    seg: np.ndarray
    num_graphs: int

    @classmethod
    def from_graphs(cls, graphs: list[Graph]) -> "Batch":
        sizes = np.array([g.num_nodes for g in graphs], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(sizes)])
        nnz = np.array([len(g.neighbors) for g in graphs], dtype=np.int64)
        nnz_starts = np.concatenate([[0], np.cumsum(nnz)])
        indices = np.concatenate([g.neighbors + s for g, s in zip(graphs, starts)]) \
            if graphs else np.zeros(0, dtype=np.int64)
        indptr = np.concatenate([[0]] + [g.offsets[1:] + o for g, o in zip(graphs, nnz_starts)])
        n = int(starts[-1])
        adj = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
        seg = np.repeat(np.arange(len(graphs)), sizes)
        return cls(adj, seg, len(graphs))

    @property
    def num_nodes(self) -> int:
        return self.adj.shape[0]

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.seg, minlength=self.num_graphs)

    @cached_property
    def gcn_norm(self) -> sp.csr_matrix:
        """D^-1/2 (A + I) D^-1/2 with D the degrees of A + I."""
        a = self.adj + sp.identity(self.num_nodes, format="csr")
        d = np.asarray(a.sum(axis=1)).ravel()
        s = sp.diags(1.0 / np.sqrt(d))
        return (s @ a @ s).tocsr()

    @cached_property
    def closed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(target, source) pairs over every closed neighbourhood, grouped by target."""
        a = (self.adj + sp.identity(self.num_nodes, format="csr")).tocsr()
        a.sort_indices()
        tgt = np.repeat(np.arange(self.num_nodes), np.diff(a.indptr))
        return tgt, a.indices.astype(np.int64)

    def induced(self, keep: np.ndarray) -> "Batch":
        """Sub-batch on the sorted node indices ``keep``; only induced edges survive."""
        sub = self.adj[keep][:, keep].tocsr()
        return Batch(sub, self.seg[keep], self.num_graphs)


# ---------------------------------------------------------------- parameters

def init_linear(rng, fan_in: int, fan_out: int, prefix: str) -> dict[str, Tensor]:
    return {f"{prefix}.W": ad.Parameter(ad.glorot(rng, fan_in, fan_out)),
            f"{prefix}.b": ad.Parameter(np.zeros((1, fan_out)))}


def linear(x: Tensor, params: dict, prefix: str) -> Tensor:
    return ad.add(ad.matmul(x, params[f"{prefix}.W"]), params[f"{prefix}.b"])


def init_gcn(rng, in_dim: int, out_dim: int, prefix: str = "gcn") -> dict[str, Tensor]:
    return init_linear(rng, in_dim, out_dim, prefix)


def init_gin(rng, in_dim: int, out_dim: int, prefix: str = "gin") -> dict[str, Tensor]:
    p = init_linear(rng, in_dim, out_dim, f"{prefix}.mlp0")
    p.update(init_linear(rng, out_dim, out_dim, f"{prefix}.mlp1"))
    return p


def init_gatv2(rng, in_dim: int, out_dim: int, prefix: str = "gat") -> dict[str, Tensor]:
    w = ad.glorot(rng, 2 * in_dim, out_dim)
    return {f"{prefix}.W_target": ad.Parameter(w[:in_dim]),
            f"{prefix}.W_source": ad.Parameter(w[in_dim:]),
            f"{prefix}.att": ad.Parameter(ad.glorot(rng, out_dim, 1))}


def _check_rows(batch: Batch, x: Tensor):
    if x.shape[0] != batch.num_nodes:
        raise ValueError(f"{x.shape[0]} feature rows for {batch.num_nodes} nodes")


# ---------------------------------------------------------------- layers

def gcn_layer(batch: Batch, x: Tensor, params: dict, prefix: str = "gcn") -> Tensor:
    """Renormalised graph convolution: Â X W + b."""
    _check_rows(batch, x)
    w = params[f"{prefix}.W"]
    if x.shape[1] != w.shape[0]:
        raise ValueError(f"gcn input width {x.shape[1]} != weight rows {w.shape[0]}")
    # multiply by W first when it narrows the features
    if w.shape[1] < x.shape[1]:
        h = ad.spmm(batch.gcn_norm, ad.matmul(x, w))
    else:
        h = ad.matmul(ad.spmm(batch.gcn_norm, x), w)
    return ad.add(h, params[f"{prefix}.b"])


def gin_layer(batch: Batch, x: Tensor, params: dict, prefix: str = "gin",
              eps: float = 0.0, bn: ad.BatchNormState | None = None, train: bool = False) -> Tensor:
    """MLP((1 + eps) x_v + sum of neighbour features).

    The MLP is Linear-ReLU-Linear, or Linear-BN-ReLU-Linear when a batch-norm
    state ``bn`` is passed (parameters ``prefix.mlp_bn.gamma/beta``).
    """
    _check_rows(batch, x)
    if x.shape[1] != params[f"{prefix}.mlp0.W"].shape[0]:
        raise ValueError("gin input width does not match its MLP")
    agg = ad.spmm(batch.adj, x)
    h = ad.add(ad.scale(x, 1.0 + eps), agg) if eps else ad.add(x, agg)
    h = linear(h, params, f"{prefix}.mlp0")
    if bn is not None:
        h = ad.batch_norm(h, params[f"{prefix}.mlp_bn.gamma"], params[f"{prefix}.mlp_bn.beta"], bn, train)
    return linear(ad.relu(h), params, f"{prefix}.mlp1")


def gatv2_layer(batch: Batch, x: Tensor, params: dict, prefix: str = "gat",
                slope: float = 0.2, return_attention: bool = False):
    """Single-head GATv2 over closed neighbourhoods.

    score(i, j) = att . LeakyReLU(W_target x_i + W_source x_j), softmax over
    j in N(i) + {i}, output_i = sum_j alpha_ij W_source x_j.
    """
    _check_rows(batch, x)
    if x.shape[1] != params[f"{prefix}.W_target"].shape[0]:
        raise ValueError("gatv2 input width does not match its weights")
    tgt, src = batch.closed_edges
    ht = ad.matmul(x, params[f"{prefix}.W_target"])
    hs = ad.matmul(x, params[f"{prefix}.W_source"])
    hs_e = ad.gather_rows(hs, src)
    z = ad.leaky_relu(ad.add(ad.gather_rows(ht, tgt), hs_e), slope)
    scores = ad.matmul(z, params[f"{prefix}.att"])
    alpha = ad.segment_softmax(scores, tgt, batch.num_nodes)
    out = ad.rowsum_segments(ad.mul(alpha, hs_e), tgt, batch.num_nodes)
    if return_attention:
        return out, alpha
    return out


def sagpool(batch: Batch, x: Tensor, params: dict, ratio: float = 0.5,
            prefix: str = "pool") -> tuple[Batch, Tensor, Tensor]:
    """Self-attention pooling.

    Scores come from a one-output GCN followed by tanh. Each graph keeps its
    ceil(ratio * n_g) best nodes (ties: lower index), their features are
    gated by the score, and the readout is [mean || max] of the kept rows.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"pool ratio {ratio} outside (0, 1]")
    raw = gcn_layer(batch, x, params, prefix)
    score = ad.tanh(raw)
    # rank on the pre-tanh value: same order as tanh, but saturated scores
    # (tanh == 1.0 in floating point) stay distinguishable
    keep = ad.segment_topk(raw.data, batch.seg, batch.num_graphs, ratio)
    gated = ad.mul(ad.gather_rows(x, keep), ad.gather_rows(score, keep))
    sub = batch.induced(keep)
    readout = ad.concat_cols([ad.segment_mean(gated, sub.seg, sub.num_graphs),
                              ad.segment_max(gated, sub.seg, sub.num_graphs)])
    return sub, gated, readout


def readout_sum_linear(x: Tensor, seg, num_graphs: int, params: dict, prefix: str) -> Tensor:
    """Per-graph sum of node rows followed by one linear map."""
    return linear(ad.rowsum_segments(x, seg, num_graphs), params, prefix)
