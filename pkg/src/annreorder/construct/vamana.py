"""
Vamana-style pruned graph: greedy search from the medoid, robust pruning
and reverse-edge insertion, run in two passes over a seeded vertex order.
"""
import logging as log
from collections import deque
from typing import List, Sequence, Tuple

import numpy as np

import annreorder.utils as utils
from annreorder.construct.params import BuildParams
from annreorder.dataset import make_rng
from annreorder.graph import FixedDegreeGraph, INVALID, Metric, VectorDataset
from annreorder.search import greedy_search

MEDOID_SAMPLE = 1000


def find_medoid(ds: VectorDataset, seed: int, sample_size: int = MEDOID_SAMPLE) -> int:
    """
    Vector with the smallest summed distance to a seeded sample (or to every
    vector when n <= sample_size).  Ties go to the lower ID.
    """
    if ds.n <= sample_size:
        sample = np.arange(ds.n)
    else:
        sample = np.sort(make_rng(seed).choice(ds.n, size=sample_size, replace=False))

    total = np.zeros(ds.n, dtype=np.float64)
    for s in sample:
        total += ds.scan(ds.data[s])
    return int(np.argmin(total))


def robust_prune(
    ds: VectorDataset, p: int, candidates: Sequence[Tuple[float, int]], alpha: float, r: int
) -> List[int]:
    """
    Pick up to r out-neighbors for p from (distance-to-p, id) candidates.

    alpha == 1 keeps the r closest.  Otherwise each selected p* drops every
    remaining p' it occludes: alpha^2 * d(p*, p') <= d(p, p') for squared
    L2.  Inner product distances are negated similarities s, so there p' is
    occluded when s(p*, p') > alpha * s(p, p').
    """
    pool = sorted({c for c in candidates if c[1] != p})
    if alpha == 1.0:
        return [i for _, i in pool[:r]]

    l2 = ds.metric is Metric.L2
    ids = np.asarray([i for _, i in pool], dtype=np.int64)
    to_p = np.asarray([d for d, _ in pool], dtype=np.float32)
    alive = np.ones(ids.size, dtype=bool)
    selected = []

    for j in range(ids.size):
        if len(selected) >= r:
            break
        if not alive[j]:
            continue
        selected.append(int(ids[j]))
        alive[j] = False
        rest = np.nonzero(alive)[0]
        if rest.size == 0:
            break
        to_star = ds.distances(ids[rest], ds.data[ids[j]])
        if l2:
            occluded = alpha * alpha * to_star <= to_p[rest]
        else:
            occluded = -to_star > alpha * -to_p[rest]
        alive[rest[occluded]] = False

    return selected


def _with_distances(ds, p, ids):
    ids = list(ids)
    if not ids:
        return []
    return list(zip(ds.distances(np.asarray(ids, dtype=np.int64), ds.data[p]).tolist(), ids))


def _pass(ds, adj, medoid, order, alpha, params):
    r = params.k_max
    for p in order:
        p = int(p)
        trace = greedy_search(
            lambda v: adj[v],
            lambda ids: ds.distances(np.asarray(ids, dtype=np.int64), ds.data[p]),
            [medoid],
            params.build_beam_width,
            10 * params.build_beam_width,
        )
        candidates = set(trace.evaluated) | set(_with_distances(ds, p, adj[p]))
        adj[p] = robust_prune(ds, p, candidates, alpha, r)

        for j in adj[p]:
            if p in adj[j]:
                continue
            if len(adj[j]) < r:
                adj[j].append(p)
            else:
                adj[j] = robust_prune(ds, j, _with_distances(ds, j, adj[j] + [p]), alpha, r)


def _reachable(adj, root):
    seen = np.zeros(len(adj), dtype=bool)
    seen[root] = True
    parent_edges = set()
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                parent_edges.add((v, u))
                queue.append(u)
    return seen, parent_edges


def repair_reachability(ds: VectorDataset, adj, medoid: int, k_max: int) -> int:
    """
    Link every vertex the medoid cannot reach, lowest ID first, from its
    nearest reached vertex.  When that vertex is full, an edge outside the
    BFS tree is overwritten so nothing already reached gets cut off.
    Returns the number of edges added.
    """
    added = 0
    while True:
        seen, tree = _reachable(adj, medoid)
        missing = np.nonzero(~seen)[0]
        if missing.size == 0:
            return added

        u = int(missing[0])
        reached = np.nonzero(seen)[0]
        dist = ds.distances(reached, ds.data[u])
        by_distance = reached[np.lexsort((reached, dist))]

        for w in by_distance:
            w = int(w)
            if len(adj[w]) < k_max:
                adj[w].append(u)
                break
        else:
            for w in by_distance:
                w = int(w)
                slot = next(
                    (s for s in range(len(adj[w]) - 1, -1, -1) if (w, adj[w][s]) not in tree),
                    None,
                )
                if slot is not None:
                    adj[w][slot] = u
                    break
        added += 1


def build_vamana(ds: VectorDataset, params: BuildParams) -> FixedDegreeGraph:
    params.validate(ds.n)
    n, r = ds.n, params.k_max
    rng = make_rng(params.seed)

    adj = []
    for v in range(n):
        picks = rng.choice(n - 1, size=r, replace=False)
        picks[picks >= v] += 1
        adj.append(picks.tolist())

    medoid = find_medoid(ds, params.seed)
    order = rng.permutation(n)

    with utils.timed(f"vamana over {n} vectors, k_max={r}, alpha={params.alpha}"):
        _pass(ds, adj, medoid, order, 1.0, params)
        _pass(ds, adj, medoid, order, params.alpha, params)

    added = repair_reachability(ds, adj, medoid, r)
    if added:
        log.info(f"vamana: added {added} edges to reach every vertex from medoid {medoid}")

    neighbors = np.full((n, r), INVALID, dtype=np.uint32)
    degrees = np.zeros(n, dtype=np.uint32)
    for v, row in enumerate(adj):
        neighbors[v, : len(row)] = row
        degrees[v] = len(row)
    return FixedDegreeGraph(neighbors, degrees)
