"""
Reverse Cuthill-McKee over the undirected view of the graph (u ~ v when
an edge runs either way).
"""
from collections import deque

import numpy as np
import scipy.sparse as sp

from annreorder.graph import FixedDegreeGraph, Permutation


def symmetrize(g: FixedDegreeGraph) -> sp.csr_matrix:
    """0/1 CSR matrix of A + A^T with sorted columns; graphs carry no self-loops."""
    edges = g.edges()
    ones = np.ones(len(edges), dtype=np.int8)
    a = sp.csr_matrix((ones, (edges[:, 0], edges[:, 1])), shape=(g.n, g.n))
    s = ((a + a.T) > 0).astype(np.int8).tocsr()
    s.eliminate_zeros()
    s.sort_indices()
    return s


def rcm(g: FixedDegreeGraph) -> Permutation:
    s = symmetrize(g)
    indptr, indices = s.indptr, s.indices
    degree = np.diff(indptr)
    n = g.n

    visited = np.zeros(n, dtype=bool)
    sequence = []
    # roots: unvisited vertex of least degree, lowest ID first
    for root in np.lexsort((np.arange(n), degree)):
        if visited[root]:
            continue
        visited[root] = True
        queue = deque([int(root)])
        while queue:
            v = queue.popleft()
            sequence.append(v)
            nbrs = indices[indptr[v]:indptr[v + 1]]
            nbrs = nbrs[~visited[nbrs]]
            nbrs = nbrs[np.lexsort((nbrs, degree[nbrs]))]
            visited[nbrs] = True
            queue.extend(nbrs.tolist())

    return Permutation.from_order(sequence[::-1])
