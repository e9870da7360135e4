"""
Structural node features
========================

The identity feature of a node stacks its degree with the number of closed
walks of length 2..k through it, i.e. the diagonal of powers of the
adjacency matrix. We check it against dense matrix powers on a tiny graph.
"""
import numpy as np

from graphclf import Degree, Identity, NormDegree, Ones, augment, from_edge_list

# a triangle with a pendant vertex
g = from_edge_list(4, [(0, 1), (1, 2), (0, 2), (2, 3)])

for kind in (Ones, Degree, NormDegree):
    print(kind, augment(g, kind, max_degree=3).ravel())

x = augment(g, Identity(4))
print("identity:4\n", x)

###############################################################################
# The same columns from dense powers: A^2 counts back-and-forth walks (the
# degree again), A^3 counts each triangle twice per vertex.
a = g.adjacency().toarray()
dense = np.column_stack([a.sum(1)] + [np.diag(np.linalg.matrix_power(a, l)) for l in (2, 3, 4)])
print("matches dense powers:", np.array_equal(x, dense))
