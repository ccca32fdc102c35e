import numpy as np

from annreorder.assertions import assert_arrays_equal, assert_equal, assert_raises
from annreorder.construct.exact import build_exact_knn, random_knn_graph
from annreorder.dataset import exact_ground_truth
from annreorder.exceptions import ContractViolation
from annreorder.graph import VectorDataset
from annreorder.test_utils import synthetic


def t_collinear(fix):
    ds = VectorDataset([[0.0], [1.0], [3.0]])
    g = build_exact_knn(ds, 1)
    assert_equal([g.row(v).tolist() for v in range(3)], [[1], [0], [1]])


def t_k_is_n_minus_one(fix):
    ds, _ = synthetic(12, 3, 1)
    g = build_exact_knn(ds, 11)
    for v in range(12):
        assert_equal(sorted(g.row(v).tolist()), [u for u in range(12) if u != v])
    assert_raises(lambda: build_exact_knn(ds, 12), ContractViolation)


def t_matches_ground_truth(fix):
    ds, _ = synthetic(500, 6, 2)
    g = build_exact_knn(ds, 10, fix.workers)
    gt = exact_ground_truth(ds, ds.data, 11, fix.workers)
    # distinct vectors, so each vertex is its own nearest at distance 0
    assert_arrays_equal(gt.ids[:, 0], np.arange(500))
    assert_arrays_equal(g.neighbors.astype(np.int64), gt.ids[:, 1:])


def t_random_rows_sorted(fix):
    ds, _ = synthetic(200, 4, 3)
    g, ids, dists = random_knn_graph(ds, 7, seed=5)
    g.check()
    for v in range(200):
        assert v not in ids[v]
        keys = list(zip(dists[v].tolist(), ids[v].tolist()))
        assert_equal(keys, sorted(keys))

    again, _, _ = random_knn_graph(ds, 7, seed=5)
    assert_equal(again, g)


def register(tests):
    tests.register_batch(
        "/construct/exact/",
        [
            ("collinear", t_collinear),
            ("k-is-n-minus-one", t_k_is_n_minus_one),
            ("matches-ground-truth", t_matches_ground_truth),
            ("random-rows-sorted", t_random_rows_sorted),
        ],
    )
