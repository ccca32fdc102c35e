import numpy as np

from annreorder.assertions import assert_equal
from annreorder.construct import BuildParams, build
from annreorder.construct.exact import build_exact_knn
from annreorder.construct.vamana import build_vamana, find_medoid, repair_reachability, robust_prune
from annreorder.graph import Metric, VectorDataset
from annreorder.test_utils import synthetic


def reached_from(g, root) -> int:
    seen = {root}
    todo = [root]
    while todo:
        for u in g.row(todo.pop()).tolist():
            if u not in seen:
                seen.add(u)
                todo.append(u)
    return len(seen)


def t_triangle_is_complete(fix):
    ds = VectorDataset([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8660254]])
    g = build_vamana(ds, BuildParams(k_max=2))
    assert_equal(g.edge_set(), {(u, v) for u in range(3) for v in range(3) if u != v})


def t_medoid_of_collinear(fix):
    ds = VectorDataset([[0.0], [1.0], [3.0]])
    assert_equal(find_medoid(ds, 0), 1)


def t_prune_plain_and_occluding(fix):
    ds = VectorDataset([[0.0], [1.0], [2.0], [-3.0]])
    candidates = [(1.0, 1), (4.0, 2), (9.0, 3), (0.0, 0)]
    assert_equal(robust_prune(ds, 0, candidates, 1.0, 2), [1, 2])
    # 2 sits behind 1, while 3 lies on the other side
    assert_equal(robust_prune(ds, 0, candidates, 1.2, 3), [1, 3])


def t_prune_inner_product(fix):
    ds = VectorDataset([[1.0, 0.0], [2.0, 0.0], [1.0, 1.0], [0.5, -1.0]], Metric.INNER_PRODUCT)
    candidates = [(-2.0, 1), (-1.0, 2), (-0.5, 3)]
    # s(1, 2) = 2 and s(1, 3) = 1 against s(0, 2) = 1 and s(0, 3) = 0.5
    assert_equal(robust_prune(ds, 0, candidates, 1.5, 3), [1])
    assert_equal(robust_prune(ds, 0, candidates, 2.5, 3), [1, 2, 3])


def t_alpha_matters_for_inner_product(fix):
    base, _ = synthetic(300, 8, 4)
    ds = VectorDataset(base.data, Metric.INNER_PRODUCT)
    tight = build_vamana(ds, BuildParams(k_max=10, alpha=1.2, build_beam_width=20, seed=3))
    loose = build_vamana(ds, BuildParams(k_max=10, alpha=3.0, build_beam_width=20, seed=3))
    assert tight != loose


def t_plain_prune_keeps_exact_row(fix):
    ds, _ = synthetic(100, 4, 1)
    params = BuildParams(k_max=8, alpha=1.0, build_beam_width=100, seed=2)
    g = build_vamana(ds, params)
    medoid = find_medoid(ds, params.seed)
    exact = build_exact_knn(ds, 8)
    assert_equal(set(g.row(medoid).tolist()), set(exact.row(medoid).tolist()))


def t_medoid_reaches_everything(fix):
    ds, _ = synthetic(1000, 8, 3)
    index = build("vamana", ds, BuildParams(k_max=16, build_beam_width=32, seed=4))
    index.graph.check()
    assert_equal(index.entry_ids, (find_medoid(ds, 4),))
    assert_equal(reached_from(index.graph, index.entry_ids[0]), 1000)


def t_repair_links_unreached(fix):
    ds = VectorDataset(np.arange(6, dtype=np.float32).reshape(6, 1))
    # 0 <-> 1 <-> 2 full, 3..5 cut off
    adj = [[1], [0, 2], [1], [4], [3], [3]]
    added = repair_reachability(ds, adj, 0, 2)
    assert added >= 1
    seen = {0}
    todo = [0]
    while todo:
        for u in adj[todo.pop()]:
            if u not in seen:
                seen.add(u)
                todo.append(u)
    assert_equal(seen, set(range(6)))
    assert max(len(r) for r in adj) <= 2


def t_deterministic(fix):
    ds, _ = synthetic(300, 6, 5)
    params = BuildParams(k_max=10, build_beam_width=20, seed=7)
    assert_equal(build_vamana(ds, params), build_vamana(ds, params))


def register(tests):
    tests.register_batch(
        "/construct/vamana/",
        [
            ("triangle-is-complete", t_triangle_is_complete),
            ("medoid-of-collinear", t_medoid_of_collinear),
            ("prune-plain-and-occluding", t_prune_plain_and_occluding),
            ("prune-inner-product", t_prune_inner_product),
            ("alpha-matters-for-inner-product", t_alpha_matters_for_inner_product),
            ("plain-prune-keeps-exact-row", t_plain_prune_keeps_exact_row),
            ("medoid-reaches-everything", t_medoid_reaches_everything),
            ("repair-links-unreached", t_repair_links_unreached),
            ("deterministic", t_deterministic),
        ],
    )
