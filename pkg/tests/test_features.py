import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphclf.features import (Degree, FeatureKind, Identity, NormDegree, Noise, Ones, augment,
                               augment_dataset, closed_walk_counts, identity_features)
from graphclf.generators import gen_grid
from graphclf.graph import from_edge_list
from conftest import random_graphs
from oracles import closed_walks_bruteforce

K3 = from_edge_list(3, [(0, 1), (1, 2), (2, 0)])
P3 = from_edge_list(3, [(0, 1), (1, 2)])
K2 = from_edge_list(2, [(0, 1)])


def test_dims():
    assert [k.dim for k in (Ones, Noise, Degree, NormDegree)] == [1, 1, 1, 1]
    assert Identity(5).dim == 5
    assert Identity(1).dim == 1
    with pytest.raises(ValueError):
        Identity(0)


def test_parse():
    assert FeatureKind.parse("identity:5") == Identity(5)
    assert FeatureKind.parse("id") == Identity(4)
    assert FeatureKind.parse("degree") == Degree
    assert str(Identity(3)) == "identity:3"
    with pytest.raises(ValueError):
        FeatureKind.parse("pagerank")


def test_identity_examples():
    assert identity_features(K3, 3).tolist() == [[2, 2, 2]] * 3
    assert identity_features(P3, 2).tolist() == [[1, 1], [2, 2], [1, 1]]
    assert identity_features(K2, 4).tolist() == [[1, 1, 0, 1]] * 2
    assert identity_features(K3, 1).tolist() == [[2]] * 3


def test_simple_kinds():
    g = gen_grid(4, 4, "Moore")
    assert (augment(g, Ones) == 1).all()
    assert (augment(g, Degree) == 8).all()
    assert np.allclose(augment(g, NormDegree, max_degree=16), 0.5)
    with pytest.raises(ValueError):
        augment(g, NormDegree)


def test_normdegree_bounded():
    graphs = random_graphs(20, 30, seed=1)
    dmax = max(int(g.degrees().max()) for g in graphs)
    for x in augment_dataset(graphs, NormDegree, dmax, 0):
        assert x.min() >= 0 and x.max() <= 1


def test_noise_seeded():
    graphs = random_graphs(5, 20, seed=2)
    a = augment_dataset(graphs, Noise, None, 11)
    b = augment_dataset(graphs, Noise, None, 11)
    c = augment_dataset(graphs, Noise, None, 12)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
    assert all(((x >= 0) & (x < 1)).all() for x in a)


def test_identity_matches_bruteforce():
    for g in random_graphs(40, 8, seed=5):
        k = 5
        got = identity_features(g, k)
        for v in range(g.num_nodes):
            want = [g.degrees()[v]] + [closed_walks_bruteforce(g, v, l) for l in range(2, k + 1)]
            assert got[v].tolist() == want


def test_blocked_equals_unblocked():
    g = random_graphs(1, 60, seed=6, min_n=60)[0]
    assert np.array_equal(closed_walk_counts(g, 6, block=7), closed_walk_counts(g, 6))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_identity_permutation_equivariant(seed):
    g = random_graphs(1, 12, seed=seed, min_n=2)[0]
    perm = np.random.default_rng(seed).permutation(g.num_nodes)
    from graphclf.graph import permute
    h = permute(g, perm)
    x, y = identity_features(g, 4), identity_features(h, 4)
    assert np.array_equal(y[perm], x)
