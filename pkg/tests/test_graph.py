import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphclf.graph import (ClassLabel, GraphError, adjacency_matvec, degree, from_edge_list,
                            permute)
from graphclf.generators import gen_ba, gen_er, gen_grid, gen_ws
from oracles import edge_set


def test_triangle():
    g = from_edge_list(3, [(0, 1), (1, 2), (2, 0)])
    assert g.num_edges == 3
    assert g.degrees().tolist() == [2, 2, 2]


def test_dedup_and_self_loop():
    g = from_edge_list(2, [(0, 1), (1, 0), (0, 0)])
    assert g.num_edges == 1


def test_path_with_isolate():
    g = from_edge_list(4, [(0, 1), (1, 2)])
    assert g.degrees().tolist() == [1, 2, 1, 0]


def test_out_of_range_names_pair():
    with pytest.raises(GraphError, match=r"\(0, 5\)"):
        from_edge_list(3, [(0, 1), (0, 5)])


def test_degree():
    k3 = from_edge_list(3, [(0, 1), (1, 2), (2, 0)])
    star = from_edge_list(5, [(0, i) for i in range(1, 5)])
    assert degree(k3, 0) == 2
    assert degree(star, 0) == 4
    assert degree(from_edge_list(3, [(0, 1)]), 2) == 0


def test_matvec():
    k3 = from_edge_list(3, [(0, 1), (1, 2), (2, 0)])
    p3 = from_edge_list(3, [(0, 1), (1, 2)])
    assert adjacency_matvec(k3, [1, 1, 1]).tolist() == [2, 2, 2]
    assert adjacency_matvec(p3, [1, 0, 0]).tolist() == [0, 1, 0]
    assert adjacency_matvec(p3, np.zeros(3)).tolist() == [0, 0, 0]
    with pytest.raises(GraphError):
        adjacency_matvec(p3, [1, 2])


def test_class_codes():
    assert [c.name for c in ClassLabel] == ["ER_low", "ER_high", "WS_low", "WS_high",
                                            "BA_low", "BA_high", "GRID_low", "GRID_high"]
    assert ClassLabel.from_name("GRID_high") == 7


def _check_invariants(g):
    d = g.degrees()
    assert d.sum() == 2 * g.num_edges
    for v in range(g.num_nodes):
        nb = g.neighbors_of(v)
        assert np.all(np.diff(nb) > 0)
        assert v not in nb
        for u in nb:
            assert v in g.neighbors_of(u)


@pytest.mark.parametrize("g", [gen_er(60, 0.1, 1), gen_ws(40, 4, 0.1, 2), gen_ba(50, 2, 3),
                               gen_grid(5, 6, "Moore")], ids=["er", "ws", "ba", "grid"])
def test_generated_graph_invariants(g):
    _check_invariants(g)
    assert np.array_equal(adjacency_matvec(g, np.ones(g.num_nodes)), g.degrees())
    assert from_edge_list(g.num_nodes, g.to_edge_list()) == g


edges_strategy = st.integers(2, 20).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                                             max_size=60)))


@settings(max_examples=60, deadline=None)
@given(edges_strategy)
def test_construction_properties(case):
    n, edges = case
    g = from_edge_list(n, edges)
    _check_invariants(g)
    expected = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    assert edge_set(g) == expected


@settings(max_examples=40, deadline=None)
@given(edges_strategy, st.randoms())
def test_permutation_consistency(case, r):
    n, edges = case
    g = from_edge_list(n, edges)
    perm = list(range(n))
    r.shuffle(perm)
    h = permute(g, perm)
    assert sorted(h.degrees()) == sorted(g.degrees())
    mapped = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in edge_set(g)}
    assert edge_set(h) == mapped
