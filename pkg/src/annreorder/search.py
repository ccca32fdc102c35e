"""
Best-first beam search over a FixedDegreeGraph.

The candidate pool is a list of (distance, id) tuples kept sorted, so every
selection and truncation follows the same total order.  Visited vertices
are tracked exactly; nothing is ever forgotten.
"""
import bisect
import enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import annreorder.utils as utils
from annreorder.dataset import make_rng
from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, VectorDataset, as_queries


class EntryMode(enum.Enum):
    FIXED = "fixed"
    RANDOM = "random"


class SearchParams(NamedTuple):
    L: int
    k: int
    entry_mode: EntryMode = EntryMode.RANDOM
    entry_count: int = 1
    entry_ids: Tuple[int, ...] = ()
    seed: int = 0
    max_iterations: Optional[int] = None

    @property
    def iteration_limit(self) -> int:
        if self.max_iterations is None:
            return 10 * self.L
        return self.max_iterations

    def validate(self, n: int):
        if self.L < 1:
            raise ContractViolation(f"L={self.L} must be >= 1")
        if not 1 <= self.k <= self.L:
            raise ContractViolation(f"k={self.k} must be in [1, L={self.L}]")
        if self.k > n:
            raise ContractViolation(f"k={self.k} exceeds the {n} indexed vectors")
        if self.iteration_limit < 1:
            raise ContractViolation("max_iterations must be >= 1")
        mode = EntryMode(self.entry_mode)
        if mode is EntryMode.FIXED:
            if not self.entry_ids:
                raise ContractViolation("fixed entry mode needs at least one entry id")
            for e in self.entry_ids:
                if not 0 <= e < n:
                    raise ContractViolation(f"entry id {e} out of range [0, {n})")
        elif self.entry_count < 1:
            raise ContractViolation("random entry mode needs entry_count >= 1")

    def with_entries(self, ids) -> "SearchParams":
        return self._replace(entry_mode=EntryMode.FIXED, entry_ids=tuple(int(i) for i in ids))


class SearchStats(NamedTuple):
    distance_evals: int
    hops: int
    visited: int


class SearchResult(NamedTuple):
    ids: np.ndarray
    distances: np.ndarray
    stats: SearchStats


def resolve_entries(params: SearchParams, n: int) -> np.ndarray:
    """
    Entry vertices shared by every query of a run.  Random entries are drawn
    once from the seed so a batch is reproducible.
    """
    if EntryMode(params.entry_mode) is EntryMode.FIXED:
        ids = list(dict.fromkeys(int(i) for i in params.entry_ids))
    else:
        rng = make_rng(params.seed)
        ids = rng.choice(n, size=min(params.entry_count, n), replace=False).tolist()
    return np.asarray(ids, dtype=np.int64)


# -----------------------------------------
# Traversal core, shared with the Vamana builder


class Trace(NamedTuple):
    pool: List[Tuple[float, int]]
    evaluated: List[Tuple[float, int]]
    hops: int
    distance_evals: int


def greedy_search(
    neighbors_of: Callable[[int], Sequence[int]],
    distances_of: Callable[[List[int]], np.ndarray],
    entries: Sequence[int],
    L: int,
    max_iterations: int,
) -> Trace:
    entries = list(dict.fromkeys(int(e) for e in entries))
    dists = distances_of(entries).tolist()
    evaluated = list(zip(dists, entries))
    visited = set(entries)
    pool = sorted(evaluated)[:L]
    expanded = set()
    cursor = 0
    hops = 0

    while hops < max_iterations:
        while cursor < len(pool) and pool[cursor][1] in expanded:
            cursor += 1
        if cursor >= len(pool):
            break

        v = pool[cursor][1]
        expanded.add(v)
        hops += 1

        fresh = [u for u in neighbors_of(v) if u not in visited]
        if not fresh:
            continue
        visited.update(fresh)

        for item in zip(distances_of(fresh).tolist(), fresh):
            evaluated.append(item)
            if len(pool) >= L and item >= pool[-1]:
                continue
            pos = bisect.bisect_left(pool, item)
            pool.insert(pos, item)
            if len(pool) > L:
                pool.pop()
            if pos < cursor:
                cursor = pos

    return Trace(pool, evaluated, hops, len(evaluated))


# -----------------------------------------
# Public search API


def _check_aligned(g: FixedDegreeGraph, ds: VectorDataset):
    if g.n < 1:
        raise ContractViolation("cannot search an empty graph")
    if g.n != ds.n:
        raise ContractViolation(f"graph has {g.n} vertices but dataset has {ds.n} vectors")


def _search_one(g, ds, q, params, entries) -> SearchResult:
    trace = greedy_search(
        lambda v: g.row(v).tolist(),
        lambda ids: ds.distances(np.asarray(ids, dtype=np.int64), q),
        entries,
        params.L,
        params.iteration_limit,
    )
    # fewer than k results when fewer than k vertices are reachable
    best = trace.pool[: params.k]
    ids = np.asarray([i for _, i in best], dtype=np.int64)
    dists = np.asarray([d for d, _ in best], dtype=np.float32)
    visited = len(trace.evaluated)
    return SearchResult(ids, dists, SearchStats(trace.distance_evals, trace.hops, visited))


def beam_search(g: FixedDegreeGraph, ds: VectorDataset, q, params: SearchParams) -> SearchResult:
    _check_aligned(g, ds)
    params.validate(g.n)
    q = as_queries(q, ds.d)
    if len(q) != 1:
        raise ContractViolation("beam_search takes a single query, use batch_search")
    return _search_one(g, ds, q[0], params, resolve_entries(params, g.n))


def batch_search(
    g: FixedDegreeGraph, ds: VectorDataset, queries, params: SearchParams, workers: int = 1
) -> List[SearchResult]:
    _check_aligned(g, ds)
    params.validate(g.n)
    queries = as_queries(queries, ds.d)
    if len(queries) < 1:
        raise ContractViolation("batch_search needs at least one query")
    entries = resolve_entries(params, g.n)
    return utils.parallel_map(
        lambda q: _search_one(g, ds, q, params, entries), list(queries), workers
    )


def result_ids(results: Sequence[SearchResult], k: int) -> np.ndarray:
    """Stack result IDs into an nq x k matrix, padding short rows with -1."""
    out = np.full((len(results), k), -1, dtype=np.int64)
    for i, r in enumerate(results):
        m = min(k, len(r.ids))
        out[i, :m] = r.ids[:m]
    return out
