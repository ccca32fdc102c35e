from unittest.mock import patch

from annreorder.assertions import assert_equal, assert_raises
from annreorder.bench import harness
from annreorder.bench.harness import (
    BASELINE,
    ScatterPoint,
    SweepConfig,
    community_scatter,
    scatter_point,
    speedups,
    sweep,
)
from annreorder.bench.metrics import speedup_within_noise
from annreorder.construct import BuildParams, build
from annreorder.dataset import exact_ground_truth
from annreorder.exceptions import ContractViolation, RecallMismatch
from annreorder.graph import VectorDataset, apply_permutation
from annreorder.reorder import STRATEGIES, ReorderSpec
from annreorder.search import SearchParams
from annreorder.test_utils import random_graph, synthetic

SMALL_GRID = (10, 20, 30)


def small_setup(seed=1):
    ds, queries = synthetic(300, 6, seed, n_queries=20)
    g = random_graph(300, 10, seed, min_degree=4)
    gt = exact_ground_truth(ds, queries, 5)
    return g, ds, queries, gt


def small_config(fix, **kwargs):
    return SweepConfig(L_grid=SMALL_GRID, k=5, trials=2, workers=fix.workers, **kwargs)


def t_record_count(fix):
    g, ds, queries, gt = small_setup()
    specs = [ReorderSpec(name, seed=3) for name in STRATEGIES]
    records = sweep(g, ds, queries, gt, SearchParams(L=1, k=1, seed=2), specs, small_config(fix))

    assert_equal(len(records), len(SMALL_GRID) * (len(specs) + 1))
    assert_equal([r.reorder for r in records[: len(SMALL_GRID)]], [BASELINE] * len(SMALL_GRID))
    assert_equal([r.L for r in records[: len(SMALL_GRID)]], list(SMALL_GRID))
    assert all(r.speedup == 1.0 for r in records if r.reorder == BASELINE)
    assert all(len(r.timings) == 2 and r.trials == 2 for r in records)
    assert_equal(len(speedups(records)), len(SMALL_GRID) * len(specs))


def t_recall_identical_across_orders(fix):
    g, ds, queries, gt = small_setup(2)
    specs = [ReorderSpec(name, seed=5) for name in STRATEGIES]
    records = sweep(g, ds, queries, gt, SearchParams(L=1, k=1, entry_count=3, seed=4), specs, small_config(fix))
    by_L = {}
    for r in records:
        by_L.setdefault(r.L, set()).add(r.recall)
    for L, recalls in by_L.items():
        assert_equal(len(recalls), 1, f"recall at L={L}")


def t_labels_and_validation(fix):
    g, ds, queries, gt = small_setup(3)
    cfg = small_config(fix, index_label="rand", dataset_label="uniform")
    records = sweep(g, ds, queries, gt, SearchParams(L=1, k=1), [ReorderSpec("rcm")], cfg)
    assert all((r.index, r.dataset, r.k) == ("rand", "uniform", 5) for r in records)

    search = SearchParams(L=1, k=1)
    assert_raises(lambda: sweep(g, ds, queries, gt, search, [], cfg._replace(L_grid=())), ContractViolation)
    assert_raises(lambda: sweep(g, ds, queries, gt, search, [], cfg._replace(k=20)), ContractViolation)
    assert_raises(lambda: sweep(g, ds, queries[:5], gt, search, [], cfg), ContractViolation)


def _scaled_apply(g, ds, p):
    pg, pds = apply_permutation(g, ds, p)
    if p.is_identity():
        return pg, pds
    return pg, VectorDataset(pds.data * 2)


def t_strict_recall(fix):
    g, ds, queries, gt = small_setup(4)
    specs = [ReorderSpec("random", seed=1)]
    search = SearchParams(L=1, k=1)
    with patch.object(harness, "apply_permutation", _scaled_apply):
        assert_raises(lambda: sweep(g, ds, queries, gt, search, specs, small_config(fix)), RecallMismatch)
        records = sweep(g, ds, queries, gt, search, specs, small_config(fix, strict_recall=False))
    assert_equal(len(records), 2 * len(SMALL_GRID))


def t_identity_speedup_within_noise(fix):
    ds, queries = synthetic(5000, 16, 6, n_queries=200)
    index = build("nn-descent", ds, BuildParams(k_max=16, seed=1, workers=fix.workers))
    gt = exact_ground_truth(ds, queries, 10, fix.workers)
    cfg = SweepConfig(L_grid=(20, 40, 80, 160), k=10, trials=5, workers=1)
    records = sweep(index.graph, ds, queries, gt, SearchParams(L=1, k=1), [ReorderSpec("identity")], cfg)

    base = {r.L: r for r in records if r.reorder == BASELINE}
    quiet = sum(speedup_within_noise(r, base[r.L]) for r in records if r.reorder != BASELINE)
    # a loaded machine can push one grid point out
    assert quiet >= len(cfg.L_grid) - 1, f"only {quiet} of {len(cfg.L_grid)} speed-ups within 3 sigma"


# -----------------------------------------
# clustering vs speed-up


def t_scatter(fix):
    g, ds, queries, gt = small_setup(5)
    records = sweep(g, ds, queries, gt, SearchParams(L=1, k=1), [ReorderSpec("gorder")], small_config(fix))
    p = scatter_point(records, 0.25)
    assert_equal((p.average_lcc, p.index), (0.25, "index"))
    assert p.max_speedup >= p.mean_speedup > 0
    assert_raises(lambda: scatter_point(records[: len(SMALL_GRID)], 0.25), ContractViolation)


def t_community_scatter(fix):
    points = [
        ScatterPoint("a", "x", 0.1, 1.01, 1.1),
        ScatterPoint("b", "x", 0.3, 1.20, 1.4),
        ScatterPoint("c", "y", 0.2, 1.05, 1.3),
    ]
    assert_equal(community_scatter(points).spearman, 1.0)
    assert community_scatter(points[:1]).spearman is None
    flat = [pt._replace(average_lcc=0.5) for pt in points]
    assert community_scatter(flat).spearman is None
    assert_equal(len(community_scatter(flat).points), 3)


def register(tests):
    tests.register_batch(
        "/bench/harness/",
        [
            ("record-count", t_record_count),
            ("recall-identical-across-orders", t_recall_identical_across_orders),
            ("labels-and-validation", t_labels_and_validation),
            ("strict-recall", t_strict_recall),
            ("scatter", t_scatter),
            ("community-scatter", t_community_scatter),
        ],
    )
    tests.register_batch(
        "/bench/harness/",
        [("identity-speedup-within-noise", t_identity_speedup_within_noise)],
        slow=True,
    )
