import itertools
import json

import numpy as np

from annreorder.analyzer import (
    GraphReport,
    analyze,
    average_lcc,
    bandwidth,
    lcc_per_vertex,
    local_clustering_coefficient,
    mean_gap,
    spearman_rank_correlation,
    weak_components,
)
from annreorder.assertions import assert_equal, assert_near, assert_raises
from annreorder.dataset import make_rng
from annreorder.exceptions import ContractViolation, DegenerateCorrelation
from annreorder.graph import FixedDegreeGraph, apply_permutation
from annreorder.test_utils import (
    disjoint_triangles,
    graph_of,
    path_graph,
    random_graph,
    shuffled,
    star_graph,
    undirected,
)


def brute_force_lcc(g):
    """Per-vertex clustering straight from the definition."""
    nbrs = [set() for _ in range(g.n)]
    for u, v in g.edge_set():
        nbrs[u].add(v)
        nbrs[v].add(u)

    coeffs = []
    for v in range(g.n):
        k = len(nbrs[v])
        if k < 2:
            coeffs.append(0.0)
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(nbrs[v]), 2) if b in nbrs[a])
        coeffs.append(links / (k * (k - 1) / 2))
    return coeffs


# -----------------------------------------
# clustering


def t_lcc_brute_force(fix):
    rng = make_rng(fix.seed + 5)
    for i in range(50):
        n = int(rng.integers(2, 201))
        k_max = int(rng.integers(1, 9))
        g = random_graph(n, k_max, i)
        expected = brute_force_lcc(g)
        per_vertex = lcc_per_vertex(g)
        for v in range(n):
            assert_near(local_clustering_coefficient(g, v), expected[v], 1e-12, f"graph {i} vertex {v}")
            assert_near(per_vertex[v], expected[v], 1e-12, f"graph {i} vertex {v}")
        assert_near(average_lcc(g), sum(expected) / n, 1e-12, f"graph {i}")


def t_lcc_shapes(fix):
    assert_equal(average_lcc(disjoint_triangles(3)), 1.0)
    assert_equal(average_lcc(star_graph(5)), 0.0)
    assert_equal(average_lcc(undirected(6, [(0, 1), (2, 3), (4, 5)])), 0.0)
    assert_equal(average_lcc(FixedDegreeGraph.from_rows(3, 1, [[], [], []])), 0.0)


def t_lcc_directed_view(fix):
    # one direction per pair still closes the triangle
    g = graph_of(3, [(0, 1), (1, 2), (2, 0)])
    assert_equal(local_clustering_coefficient(g, 0), 1.0)
    assert_equal(lcc_per_vertex(g).tolist(), [1.0, 1.0, 1.0])
    assert_raises(lambda: local_clustering_coefficient(g, 3), ContractViolation)


def t_lcc_single_vertex_matches_vector(fix):
    g = random_graph(80, 6, 3)
    per_vertex = lcc_per_vertex(g)
    for v in range(g.n):
        assert_near(local_clustering_coefficient(g, v), per_vertex[v], 1e-12, f"vertex {v}")


def t_lcc_label_invariant(fix):
    g = random_graph(300, 10, 7)
    pg, _ = apply_permutation(g, None, shuffled(8, 300))
    assert_equal(average_lcc(pg), average_lcc(g))


# -----------------------------------------
# layout


def t_bandwidth(fix):
    assert_equal(bandwidth(path_graph(10)), 1)
    assert_equal(bandwidth(FixedDegreeGraph.from_rows(4, 1, [[], [], [], []])), 0)
    assert_equal(bandwidth(graph_of(5, [(0, 4)])), 4)
    assert_equal(bandwidth(graph_of(5, [(0, 4)]), [2, 0, 1, 4, 3]), 1)
    assert_raises(lambda: bandwidth(path_graph(3), [0, 1]), ContractViolation)


def t_mean_gap_and_components(fix):
    assert_equal(mean_gap(path_graph(5)), 1.0)
    assert_equal(weak_components(disjoint_triangles(4)), 4)
    assert_equal(weak_components(graph_of(3, [(0, 1), (2, 1)])), 1)


# -----------------------------------------
# rank correlation


def t_spearman_known_values(fix):
    assert_near(spearman_rank_correlation([1, 2, 3, 4], [10, 30, 20, 40]), 0.8, 1e-12)
    assert_near(spearman_rank_correlation([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]), 0.8, 1e-12)
    assert_equal(spearman_rank_correlation([1, 2, 3], [10, 20, 30]), 1.0)
    assert_equal(spearman_rank_correlation([1, 2, 3], [0.3, 0.2, 0.1]), -1.0)


def t_spearman_monotone_invariant(fix):
    rng = make_rng(12)
    xs = rng.permutation(40) + 0.5 * rng.random(40)
    ys = rng.permutation(40) + 0.5 * rng.random(40)
    r = spearman_rank_correlation(xs, ys)
    assert_equal(spearman_rank_correlation(np.exp(xs / 10), ys), r)
    assert_equal(spearman_rank_correlation(xs ** 3, 2 * ys + 5), r)
    assert_near(spearman_rank_correlation(-xs, ys), -r, 1e-12)


def t_spearman_ties(fix):
    # average ranks: xs -> 1.5 1.5 3 4
    r = spearman_rank_correlation([1, 1, 2, 3], [1, 2, 3, 4])
    assert_near(r, 0.9486832980505138, 1e-12)


def t_spearman_degenerate(fix):
    assert_raises(lambda: spearman_rank_correlation([1, 1, 1], [1, 2, 3]), DegenerateCorrelation)
    assert_raises(lambda: spearman_rank_correlation([1, 2], [1, 2, 3]), ContractViolation)
    assert_raises(lambda: spearman_rank_correlation([1], [1]), ContractViolation)


# -----------------------------------------
# report


def t_report_star(fix):
    report = analyze(star_graph(3))
    assert_equal(report.n, 4)
    assert_equal(report.edge_count, 6)
    assert_equal((report.min_in_degree, report.max_in_degree), (1, 3))
    assert_equal(report.mean_in_degree, 1.5)
    assert_equal(report.average_lcc, 0.0)
    assert_equal(sum(report.lcc_histogram), 4)
    assert_equal(report.bandwidth, 3)
    assert_equal(report.weak_components, 1)


def t_report_json(fix):
    report = analyze(disjoint_triangles(2), shuffled(1, 6))
    decoded = json.loads(report.to_json())
    assert_equal(list(decoded), list(GraphReport._fields))
    assert_equal(decoded["average_lcc"], 1.0)
    assert_equal(decoded["lcc_histogram"][-1], 6)
    assert_equal(decoded["lcc_view"], "symmetrized")
    assert isinstance(decoded["bandwidth"], int)
    assert np.isfinite(decoded["mean_gap"])


def register(tests):
    tests.register_batch(
        "/analyzer/",
        [
            ("lcc/brute-force", t_lcc_brute_force),
            ("lcc/shapes", t_lcc_shapes),
            ("lcc/directed-view", t_lcc_directed_view),
            ("lcc/single-vertex-matches-vector", t_lcc_single_vertex_matches_vector),
            ("lcc/label-invariant", t_lcc_label_invariant),
            ("layout/bandwidth", t_bandwidth),
            ("layout/mean-gap-and-components", t_mean_gap_and_components),
            ("spearman/known-values", t_spearman_known_values),
            ("spearman/monotone-invariant", t_spearman_monotone_invariant),
            ("spearman/ties", t_spearman_ties),
            ("spearman/degenerate", t_spearman_degenerate),
            ("report/star", t_report_star),
            ("report/json", t_report_json),
        ],
    )
