"""
Greedy window ordering: place next the vertex that scores highest against
the last w placed vertices.

S(u, v) counts directed edges between u and v (0, 1 or 2) plus the number
of in-neighbors they share.  Scores live in a dense array; the next vertex
is its argmax, so ties go to the lowest ID.  Each step is O(n), which is
fine at desk scale.
"""
from collections import deque
from typing import List, Sequence

import numpy as np

from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, Permutation

DEFAULT_WINDOW = 10

_PLACED = np.iinfo(np.int64).min // 2


class _Adjacency:
    def __init__(self, g: FixedDegreeGraph):
        edges = g.edges()
        self.out: List[np.ndarray] = g.adjacency_lists()

        by_target = np.argsort(edges[:, 1], kind="stable")
        sources = edges[by_target, 0]
        ptr = np.zeros(g.n + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(np.bincount(edges[:, 1], minlength=g.n))
        self.into: List[np.ndarray] = [sources[ptr[v]:ptr[v + 1]] for v in range(g.n)]

    def related(self, v: int) -> np.ndarray:
        """Every u with S(u, v) > 0, repeated once per unit of score."""
        parts = [self.out[v], self.into[v]]
        parts.extend(self.out[x] for x in self.into[v])
        related = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
        return related[related != v]


def gorder(g: FixedDegreeGraph, w: int = DEFAULT_WINDOW) -> Permutation:
    if w < 1:
        raise ContractViolation(f"window {w} must be >= 1")
    n = g.n
    if n == 1:
        return Permutation.identity(1)

    adj = _Adjacency(g)
    score = np.zeros(n, dtype=np.int64)
    window = deque()
    order = []

    v = int(np.argmax(g.in_degrees()))
    for _ in range(n):
        order.append(v)
        score[v] = _PLACED
        np.add.at(score, adj.related(v), 1)
        window.append(v)
        if len(window) > w:
            np.add.at(score, adj.related(window.popleft()), -1)
        v = int(np.argmax(score))

    return Permutation.from_order(order)


def pair_score(out_sets, in_sets, u: int, v: int) -> int:
    s = int(v in out_sets[u]) + int(u in out_sets[v])
    return s + len(in_sets[u] & in_sets[v])


def windowed_score(g: FixedDegreeGraph, order: Sequence[int], w: int = DEFAULT_WINDOW) -> int:
    """Sum of S(u, v) over every pair placed at most w positions apart."""
    adj = _Adjacency(g)
    out_sets = [set(r.tolist()) for r in adj.out]
    in_sets = [set(r.tolist()) for r in adj.into]
    order = [int(v) for v in order]

    total = 0
    for i, u in enumerate(order):
        for v in order[max(0, i - w):i]:
            total += pair_score(out_sets, in_sets, u, v)
    return total
