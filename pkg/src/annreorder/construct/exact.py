import numpy as np

import annreorder.utils as utils
from annreorder.dataset import make_rng
from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, VectorDataset


def full_rows(ids: np.ndarray) -> FixedDegreeGraph:
    n, k = ids.shape
    return FixedDegreeGraph(ids, np.full(n, k), check=True)


def sort_rows(ids: np.ndarray, dists: np.ndarray):
    """Order every row by (distance, id)."""
    order = np.lexsort((ids, dists), axis=1)
    rows = np.arange(ids.shape[0])[:, None]
    return ids[rows, order], dists[rows, order]


def build_exact_knn(ds: VectorDataset, k: int, workers: int = 1) -> FixedDegreeGraph:
    """Row v holds the k vectors closest to v, ties by ascending ID."""
    if not 1 <= k <= ds.n - 1:
        raise ContractViolation(f"k={k} must be in [1, {ds.n - 1}]")

    def row(v):
        dist = ds.scan(ds.data[v])
        order = np.argsort(dist, kind="stable")
        return order[order != v][:k]

    with utils.timed(f"exact {k}-nn graph over {ds.n} vectors"):
        rows = utils.parallel_map(row, range(ds.n), workers)
    return full_rows(np.stack(rows))


def random_knn_graph(ds: VectorDataset, k: int, seed: int):
    """
    k distinct random neighbors per vertex, rows ordered by (distance, id).
    Returns (graph, ids, distances) so callers can keep refining the rows.
    """
    n = ds.n
    if not 1 <= k <= n - 1:
        raise ContractViolation(f"k={k} must be in [1, {n - 1}]")

    rng = make_rng(seed)
    ids = np.empty((n, k), dtype=np.int64)
    for v in range(n):
        picks = rng.choice(n - 1, size=k, replace=False)
        # skip over v itself
        picks[picks >= v] += 1
        ids[v] = picks

    dists = np.empty((n, k), dtype=np.float32)
    for v in range(n):
        dists[v] = ds.distances(ids[v], ds.data[v])

    ids, dists = sort_rows(ids, dists)
    return full_rows(ids), ids, dists
