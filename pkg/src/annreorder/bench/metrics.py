import logging as log
import math
import time
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, GroundTruth, VectorDataset
from annreorder.search import SearchParams, SearchResult, batch_search, result_ids

DEFAULT_TRIALS = 5

# a timing is suspect when the clock ticks coarser than this share of it
TIMER_RESOLUTION_LIMIT = 0.01


def _id_matrix(results, k: int) -> np.ndarray:
    if isinstance(results, np.ndarray):
        return results
    if len(results) and isinstance(results[0], SearchResult):
        return result_ids(results, k)
    return np.asarray(results)


def recall_at_k(results, gt, k: int) -> float:
    """
    Mean over queries of |returned top-k & true top-k| / k.  'results' is a
    list of SearchResult or an nq x >=k ID matrix; 'gt' a GroundTruth or
    an ID matrix.
    """
    if k < 1:
        raise ContractViolation(f"k={k} must be >= 1")
    found = _id_matrix(results, k)
    truth = gt.ids if isinstance(gt, GroundTruth) else np.asarray(gt)

    if found.ndim != 2 or truth.ndim != 2:
        raise ContractViolation("results and ground truth must be 2-D")
    if found.shape[0] != truth.shape[0]:
        raise ContractViolation(f"{found.shape[0]} results for {truth.shape[0]} ground-truth rows")
    if found.shape[1] < k or truth.shape[1] < k:
        raise ContractViolation(f"need {k} entries per row, got {found.shape[1]} and {truth.shape[1]}")
    if found.shape[0] == 0:
        raise ContractViolation("no queries to score")

    hits = 0
    for r, t in zip(found[:, :k].tolist(), truth[:, :k].tolist()):
        hits += len(set(r) & set(t))
    return hits / (found.shape[0] * k)


class QpsMeasurement(NamedTuple):
    qps: float
    qps_std: float
    timings: List[float]
    mean_latency: float
    mean_hops: float
    mean_distance_evals: float
    timer_warning: bool
    results: List[SearchResult]


def measure_qps(
    g: FixedDegreeGraph,
    ds: VectorDataset,
    queries,
    params: SearchParams,
    trials: int = DEFAULT_TRIALS,
    workers: int = 1,
) -> QpsMeasurement:
    """
    One untimed warm-up batch, then 'trials' timed batches.  Only the
    batch search itself is inside the clock.
    """
    if trials < 1:
        raise ContractViolation(f"trials={trials} must be >= 1")
    nq = len(queries)

    results = batch_search(g, ds, queries, params, workers)

    resolution = time.get_clock_info("perf_counter").resolution
    timings = []
    for _ in range(trials):
        start = time.perf_counter()
        batch_search(g, ds, queries, params, workers)
        timings.append(max(time.perf_counter() - start, resolution))

    warning = resolution > TIMER_RESOLUTION_LIMIT * min(timings)
    if warning:
        log.warning(f"timer resolution {resolution}s is coarse for a {min(timings):.6f}s batch")

    rates = np.asarray([nq / t for t in timings])
    return QpsMeasurement(
        qps=float(rates.mean()),
        qps_std=float(rates.std(ddof=1)) if trials > 1 else 0.0,
        timings=timings,
        mean_latency=float(np.mean(timings)) / nq,
        mean_hops=float(np.mean([r.stats.hops for r in results])),
        mean_distance_evals=float(np.mean([r.stats.distance_evals for r in results])),
        timer_warning=bool(warning),
        results=results,
    )


def relative_sigma(qps: float, qps_std: float) -> float:
    return qps_std / qps if qps > 0 else math.inf


def speedup_within_noise(rec, base, sigmas: float = 3.0) -> bool:
    """
    True when rec's speed-up over base is indistinguishable from 1.0 given
    the spread of both sets of trials.
    """
    speedup = rec.qps / base.qps
    sigma = math.hypot(relative_sigma(rec.qps, rec.qps_std), relative_sigma(base.qps, base.qps_std))
    return abs(1.0 - speedup) <= sigmas * sigma


def distance_sequences_equal(a: Sequence[SearchResult], b: Sequence[SearchResult]) -> Optional[int]:
    """Index of the first query whose result distances differ, or None."""
    if len(a) != len(b):
        return 0
    for i, (x, y) in enumerate(zip(a, b)):
        if not np.array_equal(x.distances, y.distances):
            return i
    return None
