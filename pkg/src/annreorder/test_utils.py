"""
Graph and dataset generators shared by the suites.
"""
import numpy as np

from annreorder.dataset import generate_synthetic, make_rng
from annreorder.graph import FixedDegreeGraph, Permutation


def random_graph(n: int, k_max: int, seed: int, min_degree: int = 0) -> FixedDegreeGraph:
    """Each row gets a random degree in [min_degree, k_max] and distinct non-self targets."""
    rng = make_rng(seed)
    rows = []
    for v in range(n):
        deg = int(rng.integers(min_degree, min(k_max, n - 1) + 1))
        others = np.delete(np.arange(n), v)
        rows.append(rng.choice(others, size=deg, replace=False).tolist())
    return FixedDegreeGraph.from_rows(n, k_max, rows)


def graph_of(n: int, edges, k_max=None) -> FixedDegreeGraph:
    rows = [[] for _ in range(n)]
    for u, v in edges:
        rows[u].append(v)
    if k_max is None:
        k_max = max(1, max(len(r) for r in rows))
    return FixedDegreeGraph.from_rows(n, k_max, rows)


def undirected(n: int, pairs, k_max=None) -> FixedDegreeGraph:
    return graph_of(n, [e for u, v in pairs for e in ((u, v), (v, u))], k_max)


def path_graph(n: int) -> FixedDegreeGraph:
    return undirected(n, [(i, i + 1) for i in range(n - 1)])


def band_graph(n: int, width: int) -> FixedDegreeGraph:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, min(n, i + width + 1))]
    return undirected(n, pairs)


def star_graph(leaves: int) -> FixedDegreeGraph:
    return undirected(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def disjoint_triangles(count: int) -> FixedDegreeGraph:
    pairs = []
    for t in range(count):
        a, b, c = 3 * t, 3 * t + 1, 3 * t + 2
        pairs += [(a, b), (b, c), (a, c)]
    return undirected(3 * count, pairs)


def shuffled(seed: int, n: int) -> Permutation:
    return Permutation(make_rng(seed).permutation(n))


def synthetic(n: int, d: int, seed: int, n_queries: int = 10):
    """Uniform data; float32 uniform draws make tied distances vanishingly rare."""
    return generate_synthetic(n, d, seed, seed + 1000003, n_queries)
