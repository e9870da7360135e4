"""Independent brute-force reference implementations used by the tests."""
import itertools

import numpy as np


def edge_set(g):
    return {(int(u), int(v)) for u, v in g.to_edge_list()}


def adjacency_sets(g):
    adj = [set() for _ in range(g.num_nodes)]
    for u, v in edge_set(g):
        adj[u].add(v)
        adj[v].add(u)
    return adj


def transitivity_bruteforce(g):
    """Count triangles over node triples and connected triples over (centre, pair)."""
    adj = adjacency_sets(g)
    tri = sum(1 for a, b, c in itertools.combinations(range(g.num_nodes), 3)
              if b in adj[a] and c in adj[a] and c in adj[b])
    triples = sum(1 for v in range(g.num_nodes) for _ in itertools.combinations(adj[v], 2))
    return 3 * tri / triples if triples else 0.0


def floyd_warshall(g):
    n = g.num_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in edge_set(g):
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def avg_path_length_bruteforce(g):
    d = floyd_warshall(g)
    n = g.num_nodes
    # components from reachability
    seen, best = set(), []
    for v in range(n):
        if v in seen:
            continue
        comp = [u for u in range(n) if np.isfinite(d[v, u])]
        seen.update(comp)
        if len(comp) > len(best):
            best = comp
    k = len(best)
    total = sum(d[u, v] for u in best for v in best if u != v)
    return total / (k * (k - 1))


def closed_walks_bruteforce(g, v, length):
    """Number of walks of exactly ``length`` steps from v back to v, by enumeration."""
    adj = adjacency_sets(g)

    def walk(u, steps):
        if steps == 0:
            return 1 if u == v else 0
        return sum(walk(w, steps - 1) for w in adj[u])
    return walk(v, length)


def dense_adjacency(g):
    a = np.zeros((g.num_nodes, g.num_nodes))
    for u, v in edge_set(g):
        a[u, v] = a[v, u] = 1
    return a
