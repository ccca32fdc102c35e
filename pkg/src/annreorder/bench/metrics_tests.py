from typing import NamedTuple

import numpy as np

from annreorder.assertions import assert_equal, assert_raises
from annreorder.bench.metrics import (
    distance_sequences_equal,
    measure_qps,
    recall_at_k,
    speedup_within_noise,
)
from annreorder.exceptions import ContractViolation
from annreorder.graph import GroundTruth
from annreorder.search import SearchParams, SearchResult, SearchStats
from annreorder.test_utils import random_graph, synthetic


class Rate(NamedTuple):
    qps: float
    qps_std: float


def result(ids, dists):
    return SearchResult(np.asarray(ids), np.asarray(dists, dtype=np.float32), SearchStats(len(ids), 1, len(ids)))


def t_recall_partial(fix):
    truth = [list(range(10)), list(range(10, 20))]
    found = [
        [0, 1, 2, 3, 4, 5, 6, 90, 91, 92],
        [10, 11, 12, 13, 14, 15, 16, 17, 18, 99],
    ]
    assert_equal(recall_at_k(found, truth, 10), 0.8)
    assert_equal(recall_at_k(truth, truth, 10), 1.0)
    assert_equal(recall_at_k([list(range(50, 60))] * 2, truth, 10), 0.0)


def t_recall_order_free(fix):
    truth = GroundTruth(np.array([[3, 1, 2]]), np.zeros((1, 3), dtype=np.float32))
    assert_equal(recall_at_k(np.array([[2, 3, 1]]), truth, 3), 1.0)
    assert_equal(recall_at_k([result([2, 3], [0.0, 0.0])], truth, 3), 2 / 3)


def t_recall_contract(fix):
    truth = [[0, 1, 2]]
    assert_raises(lambda: recall_at_k(truth, truth, 0), ContractViolation)
    assert_raises(lambda: recall_at_k(truth, truth, 4), ContractViolation)
    assert_raises(lambda: recall_at_k([[0, 1, 2], [0, 1, 2]], truth, 3), ContractViolation)
    assert_raises(lambda: recall_at_k(np.zeros((0, 3)), np.zeros((0, 3)), 3), ContractViolation)


def t_measure_qps(fix):
    ds, queries = synthetic(300, 6, 3, n_queries=50)
    g = random_graph(300, 10, 4, min_degree=3)
    m = measure_qps(g, ds, queries, SearchParams(L=20, k=5), trials=5, workers=fix.workers)
    assert_equal(len(m.timings), 5)
    assert_equal(len(m.results), 50)
    assert m.qps > 0 and m.qps_std >= 0
    assert m.mean_latency > 0
    assert m.mean_distance_evals >= m.mean_hops >= 1

    once = measure_qps(g, ds, queries, SearchParams(L=20, k=5), trials=1)
    assert_equal(once.qps_std, 0.0)
    assert_raises(lambda: measure_qps(g, ds, queries, SearchParams(L=20, k=5), trials=0), ContractViolation)


def t_speedup_noise(fix):
    assert speedup_within_noise(Rate(102.0, 5.0), Rate(100.0, 5.0))
    assert not speedup_within_noise(Rate(200.0, 1.0), Rate(100.0, 1.0))
    assert not speedup_within_noise(Rate(100.5, 0.0), Rate(100.0, 0.0))


def t_distance_sequences(fix):
    a = [result([0, 1], [0.5, 1.0]), result([2], [2.0])]
    same = [result([1, 0], [0.5, 1.0]), result([3], [2.0])]
    other = [result([0, 1], [0.5, 1.0]), result([2], [2.5])]
    assert distance_sequences_equal(a, same) is None
    assert_equal(distance_sequences_equal(a, other), 1)
    assert_equal(distance_sequences_equal(a, a[:1]), 0)


def register(tests):
    tests.register_batch(
        "/bench/metrics/",
        [
            ("recall-partial", t_recall_partial),
            ("recall-order-free", t_recall_order_free),
            ("recall-contract", t_recall_contract),
            ("measure-qps", t_measure_qps),
            ("speedup-noise", t_speedup_noise),
            ("distance-sequences", t_distance_sequences),
        ],
    )
