"""
NN-Descent: start from a random k-NN graph and keep improving it by
comparing each vertex's neighbors with one another.

Each iteration works from a snapshot of the new/old candidate lists built
at its start.  Candidate pairs are generated list by list in blocks,
filtered against the current worst distance of either endpoint, and merged
into the rows by keeping the best k_max entries under the (distance, id)
order.  That merge is order independent, so the result does not depend on
block boundaries or worker count.
"""
import logging as log
import math

import numpy as np

import annreorder.utils as utils
from annreorder.construct.exact import full_rows, random_knn_graph
from annreorder.construct.params import BuildParams
from annreorder.graph import FixedDegreeGraph, VectorDataset, paired_distances

PAIR_BLOCK = 1 << 21
DISTANCE_CHUNK = 1 << 18


def _compact(lists: np.ndarray) -> np.ndarray:
    """Move valid (>= 0) entries to the front of each row and drop empty columns."""
    if lists.shape[1] == 0:
        return lists
    packed = -np.sort(-lists, axis=1)
    width = int((packed >= 0).sum(axis=1).max())
    return packed[:, :width]


def _reverse(forward: np.ndarray, cap: int, rng) -> np.ndarray:
    n = forward.shape[0]
    mask = forward >= 0
    src = np.broadcast_to(np.arange(n)[:, None], forward.shape)[mask]
    dst = forward[mask]

    # random priority picks which reverse neighbors survive the cap
    order = np.lexsort((rng.random(dst.size), dst))
    src, dst = src[order], dst[order]
    starts = np.searchsorted(dst, np.arange(n))
    rank = np.arange(dst.size) - starts[dst]
    keep = rank < cap

    out = np.full((n, cap), -1, dtype=np.int64)
    out[dst[keep], rank[keep]] = src[keep]
    return out


def build_candidates(ids, flags, sample: int, rng):
    """
    Returns (new, old) candidate lists.  New entries picked for this round
    have their flag cleared in 'flags'.
    """
    n, k = ids.shape
    rows = np.arange(n)[:, None]

    priority = rng.random((n, k))
    priority[~flags] = np.inf
    order = np.argsort(priority, axis=1, kind="stable")[:, :sample]
    picked = np.isfinite(priority[rows, order])

    fwd_new = np.where(picked, ids[rows, order], -1)
    fwd_old = np.where(flags, -1, ids)

    flags[np.broadcast_to(rows, order.shape)[picked], order[picked]] = False

    new = _compact(np.hstack([fwd_new, _reverse(fwd_new, sample, rng)]))
    old = _compact(np.hstack([fwd_old, _reverse(fwd_old, sample, rng)]))
    return new, old


def _distances(ds: VectorDataset, a, b, workers):
    chunks = [(lo, min(lo + DISTANCE_CHUNK, a.size)) for lo in range(0, a.size, DISTANCE_CHUNK)]
    parts = utils.parallel_map(
        lambda c: paired_distances(ds.data[a[c[0]:c[1]]], ds.data[b[c[0]:c[1]]], ds.metric),
        chunks,
        workers,
    )
    if not parts:
        return np.empty(0, dtype=np.float32)
    return np.concatenate(parts)


def merge_candidates(ids, dists, flags, u, c, d):
    """Fold candidate entries (u gets neighbor c at distance d) into the rows, in place."""
    k = ids.shape[1]
    touched = np.unique(u)
    owner = np.repeat(touched, k)

    uu = np.concatenate([owner, u])
    cc = np.concatenate([ids[touched].ravel(), c])
    dd = np.concatenate([dists[touched].ravel(), d])
    ff = np.concatenate([flags[touched].ravel(), np.ones(u.size, dtype=bool)])
    src = np.concatenate([np.zeros(owner.size, np.int8), np.ones(u.size, np.int8)])

    # existing entries sort before candidates for the same (u, c)
    order = np.lexsort((src, cc, uu))
    uu, cc, dd, ff = uu[order], cc[order], dd[order], ff[order]
    first = np.ones(uu.size, dtype=bool)
    first[1:] = (uu[1:] != uu[:-1]) | (cc[1:] != cc[:-1])
    uu, cc, dd, ff = uu[first], cc[first], dd[first], ff[first]

    order = np.lexsort((cc, dd, uu))
    uu, cc, dd, ff = uu[order], cc[order], dd[order], ff[order]
    starts = np.searchsorted(uu, touched)
    rank = np.arange(uu.size) - starts[np.searchsorted(touched, uu)]
    sel = rank < k

    m = touched.size
    ids[touched] = cc[sel].reshape(m, k)
    dists[touched] = dd[sel].reshape(m, k)
    flags[touched] = ff[sel].reshape(m, k)


def local_join(ds, ids, dists, flags, new, old, workers=1):
    n = ids.shape[0]
    w_new, w_old = new.shape[1], old.shape[1]
    if w_new == 0:
        return

    upper = np.triu_indices(w_new, k=1)
    per_list = max(1, upper[0].size + w_new * w_old)
    block = max(1, PAIR_BLOCK // per_list)

    for lo in range(0, n, block):
        nb = new[lo:lo + block]
        ob = old[lo:lo + block]

        p = np.concatenate([nb[:, upper[0]].ravel(), np.repeat(nb, w_old, axis=1).ravel()])
        q = np.concatenate([nb[:, upper[1]].ravel(), np.tile(ob, (1, w_new)).ravel()])
        keep = (p >= 0) & (q >= 0) & (p != q)
        if not keep.any():
            continue

        keys = np.unique(np.minimum(p[keep], q[keep]) * n + np.maximum(p[keep], q[keep]))
        a, b = keys // n, keys % n
        d = _distances(ds, a, b, workers)

        worst = dists[:, -1]
        to_a = d <= worst[a]
        to_b = d <= worst[b]
        if not (to_a.any() or to_b.any()):
            continue

        merge_candidates(
            ids,
            dists,
            flags,
            np.concatenate([a[to_a], b[to_b]]),
            np.concatenate([b[to_a], a[to_b]]),
            np.concatenate([d[to_a], d[to_b]]),
        )


def count_updates(before: np.ndarray, after: np.ndarray) -> int:
    n, k = before.shape
    rows = np.arange(n)[:, None]
    kept = np.intersect1d((rows * n + before).ravel(), (rows * n + after).ravel()).size
    return n * k - kept


def build_nn_descent(ds: VectorDataset, params: BuildParams) -> FixedDegreeGraph:
    params.validate(ds.n)
    n, k = ds.n, params.k_max

    graph, ids, dists = random_knn_graph(ds, k, params.seed)
    if params.max_iters == 0:
        return graph

    # a stream independent of the one that drew the random graph
    rng = np.random.Generator(np.random.Philox(params.seed).jumped())
    flags = np.ones((n, k), dtype=bool)
    sample = max(1, math.ceil(params.sample_rate * k))

    with utils.timed(f"nn-descent over {n} vectors, k_max={k}"):
        for it in range(params.max_iters):
            before = ids.copy()
            new, old = build_candidates(ids, flags, sample, rng)
            local_join(ds, ids, dists, flags, new, old, params.workers)
            updates = count_updates(before, ids)
            log.info(f"nn-descent iteration {it + 1}: {updates} updates")
            if updates < params.convergence_delta * n * k:
                break

    return full_rows(ids)
