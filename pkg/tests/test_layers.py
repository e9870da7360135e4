import numpy as np
import pytest

from graphclf import autodiff as ad
from graphclf.autodiff import Tensor
from graphclf.graph import from_edge_list
from graphclf.layers import (Batch, gatv2_layer, gcn_layer, gin_layer, init_gatv2, init_gcn,
                             init_gin, sagpool)
from conftest import random_graphs
from oracles import dense_adjacency


def leaky(z, s=0.2):
    return np.where(z > 0, z, s * z)


def gcn_dense(a, x, w, b):
    a = a + np.eye(len(a))
    d = a.sum(1) ** -0.5
    return (d[:, None] * a * d[None, :]) @ x @ w + b


def gatv2_dense(a, x, wt, ws, att, s=0.2):
    n = len(a)
    out = np.zeros((n, wt.shape[1]))
    alphas = np.zeros((n, n))
    for i in range(n):
        nb = [j for j in range(n) if a[i, j] or i == j]
        e = np.array([(leaky(x[i] @ wt + x[j] @ ws, s) @ att).item() for j in nb])
        p = np.exp(e - e.max())
        p /= p.sum()
        alphas[i, nb] = p
        out[i] = sum(pj * (x[j] @ ws) for pj, j in zip(p, nb))
    return out, alphas


@pytest.fixture
def graphs():
    return random_graphs(4, 12, seed=8, min_n=3)


def test_gcn_matches_dense(graphs, rng):
    for g in graphs:
        p = init_gcn(rng, 3, 2, "c")
        p["c.b"].data = rng.normal(size=(1, 2))
        x = rng.normal(size=(g.num_nodes, 3))
        got = gcn_layer(Batch.from_graphs([g]), Tensor(x), p, "c").data
        want = gcn_dense(dense_adjacency(g), x, p["c.W"].data, p["c.b"].data)
        assert np.allclose(got, want, atol=1e-12)


def test_gcn_isolated_node_only_self(rng):
    g = from_edge_list(3, [(0, 1)])
    p = init_gcn(rng, 1, 1, "c")
    x = np.array([[1.0], [2.0], [5.0]])
    out = gcn_layer(Batch.from_graphs([g]), Tensor(x), p, "c").data
    assert np.isclose(out[2, 0], 5.0 * p["c.W"].data.item())


def test_gin_matches_dense(graphs, rng):
    g = graphs[0]
    p = init_gin(rng, 2, 3, "g")
    x = rng.normal(size=(g.num_nodes, 2))
    a = dense_adjacency(g)
    h = np.maximum((x + a @ x) @ p["g.mlp0.W"].data + p["g.mlp0.b"].data, 0)
    want = h @ p["g.mlp1.W"].data + p["g.mlp1.b"].data
    assert np.allclose(gin_layer(Batch.from_graphs([g]), Tensor(x), p, "g").data, want)


def test_gatv2_matches_dense_and_attention(graphs, rng):
    for g in graphs:
        p = init_gatv2(rng, 3, 4, "a")
        x = rng.normal(size=(g.num_nodes, 3))
        b = Batch.from_graphs([g])
        out, alpha = gatv2_layer(b, Tensor(x), p, "a", return_attention=True)
        want, dense_alpha = gatv2_dense(dense_adjacency(g), x, p["a.W_target"].data,
                                        p["a.W_source"].data, p["a.att"].data)
        assert np.allclose(out.data, want, atol=1e-12)
        tgt, src = b.closed_edges
        assert np.allclose(alpha.data[:, 0], dense_alpha[tgt, src], atol=1e-12)
        sums = np.bincount(tgt, weights=alpha.data[:, 0])
        assert np.abs(sums - 1).max() <= 1e-12


def test_gatv2_isolated_node_attends_to_itself(rng):
    g = from_edge_list(3, [(0, 1)])
    p = init_gatv2(rng, 2, 2, "a")
    x = rng.normal(size=(3, 2))
    out = gatv2_layer(Batch.from_graphs([g]), Tensor(x), p, "a").data
    assert np.allclose(out[2], x[2] @ p["a.W_source"].data)


def test_batched_equals_unbatched(graphs, rng):
    pg = init_gcn(rng, 2, 3, "c")
    pa = init_gatv2(rng, 2, 3, "a")
    xs = [rng.normal(size=(g.num_nodes, 2)) for g in graphs]
    b = Batch.from_graphs(graphs)
    x = np.vstack(xs)
    for layer, p, pre in ((gcn_layer, pg, "c"), (gatv2_layer, pa, "a")):
        whole = layer(b, Tensor(x), p, pre).data
        parts = np.vstack([layer(Batch.from_graphs([g]), Tensor(xi), p, pre).data
                           for g, xi in zip(graphs, xs)])
        assert np.abs(whole - parts).max() <= 1e-10


def test_sagpool_keep_counts(graphs, rng):
    b = Batch.from_graphs(graphs)
    p = init_gcn(rng, 2, 1, "pool")
    x = Tensor(rng.normal(size=(b.num_nodes, 2)))
    sub, gated, readout = sagpool(b, x, p, 0.5)
    assert np.array_equal(sub.sizes, np.ceil(0.5 * b.sizes))
    assert readout.shape == (len(graphs), 4)
    assert gated.shape == (sub.num_nodes, 2)


def test_sagpool_ratio_one_keeps_all(rng):
    g = random_graphs(1, 10, seed=3, min_n=5)[0]
    b = Batch.from_graphs([g])
    p = init_gcn(rng, 1, 1, "pool")
    sub, _, _ = sagpool(b, Tensor(np.ones((g.num_nodes, 1))), p, 1.0)
    assert sub.num_nodes == g.num_nodes
    assert (sub.adj != b.adj).nnz == 0


def test_sagpool_ties_lower_index():
    # constant features on a vertex-transitive graph give equal scores
    g = from_edge_list(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    b = Batch.from_graphs([g])
    p = {"pool.W": ad.Parameter([[1.0]]), "pool.b": ad.Parameter([[0.0]])}
    sub, gated, readout = sagpool(b, Tensor(np.ones((4, 1))), p, 0.5)
    assert sub.num_nodes == 2
    # nodes 0 and 1 survive with the edge between them
    assert sub.adj.nnz == 2
    t = np.tanh(1.0)
    assert np.allclose(readout.data, [[t, t]])


def test_sagpool_bad_ratio(rng):
    b = Batch.from_graphs(random_graphs(1, 5, seed=1, min_n=3))
    with pytest.raises(ValueError):
        sagpool(b, Tensor(np.ones((b.num_nodes, 1))), init_gcn(rng, 1, 1, "pool"), 0.0)


def test_row_mismatch(rng):
    b = Batch.from_graphs(random_graphs(1, 5, seed=1, min_n=3))
    with pytest.raises(ValueError):
        gcn_layer(b, Tensor(np.ones((b.num_nodes + 1, 1))), init_gcn(rng, 1, 1, "c"), "c")
