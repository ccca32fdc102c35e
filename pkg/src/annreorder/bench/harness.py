"""
L sweeps over reordered copies of one index.

The baseline is the index as built.  Every reordering is applied once,
outside the clock, with entry vertices mapped through the permutation so
the traversal is the same walk under new labels.  Speed-up pairs each
reordered measurement with the baseline at the same L.
"""
import logging as log
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from annreorder.analyzer import spearman_rank_correlation
from annreorder.bench.metrics import (
    DEFAULT_TRIALS,
    distance_sequences_equal,
    measure_qps,
    recall_at_k,
)
from annreorder.exceptions import ContractViolation, DegenerateCorrelation, RecallMismatch
from annreorder.graph import (
    FixedDegreeGraph,
    GroundTruth,
    Permutation,
    VectorDataset,
    apply_permutation,
)
from annreorder.reorder import ReorderSpec, compute_permutation
from annreorder.search import SearchParams, resolve_entries

# the 16 candidate-list sizes of the standard sweep
L_GRID = (20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100, 120, 140, 160, 180)

BASELINE = "baseline"


class BenchRecord(NamedTuple):
    index: str
    dataset: str
    reorder: str
    L: int
    k: int
    recall: float
    qps: float
    qps_std: float
    speedup: float
    trials: int
    mean_latency: float
    mean_hops: float
    mean_distance_evals: float
    timer_warning: bool
    timings: Tuple[float, ...]


class SweepConfig(NamedTuple):
    L_grid: Sequence[int] = L_GRID
    k: int = 10
    trials: int = DEFAULT_TRIALS
    workers: int = 1
    strict_recall: bool = True
    index_label: str = "index"
    dataset_label: str = "dataset"


def sweep(
    g: FixedDegreeGraph,
    ds: VectorDataset,
    queries,
    gt: GroundTruth,
    search: SearchParams,
    reorder_specs: Sequence[ReorderSpec],
    cfg: SweepConfig = SweepConfig(),
) -> List[BenchRecord]:
    """
    Returns |L_grid| x (|reorder_specs| + 1) records, baseline first.
    'search' supplies the entry mode and seed; its L and k are replaced by
    the sweep's.
    """
    if not cfg.L_grid:
        raise ContractViolation("empty L grid")
    if cfg.k > min(cfg.L_grid):
        raise ContractViolation(f"k={cfg.k} exceeds the smallest L {min(cfg.L_grid)}")
    if gt.k < cfg.k or len(gt) != len(queries):
        raise ContractViolation(f"ground truth is {len(gt)}x{gt.k}, need {len(queries)}x{cfg.k}")

    entries = resolve_entries(search._replace(L=max(cfg.L_grid), k=cfg.k), g.n)
    runs = [(BASELINE, Permutation.identity(g.n))]
    for spec in reorder_specs:
        runs.append((spec.label, compute_permutation(spec, g)))

    records = []
    base = {}
    for label, perm in runs:
        pg, pds = apply_permutation(g, ds, perm)
        for L in cfg.L_grid:
            params = search._replace(L=L, k=cfg.k).with_entries(perm.forward[entries])
            m = measure_qps(pg, pds, queries, params, cfg.trials, cfg.workers)

            found = np.full((len(m.results), cfg.k), -1, dtype=np.int64)
            for i, r in enumerate(m.results):
                found[i, : len(r.ids)] = perm.inverse[r.ids]
            recall = recall_at_k(found, gt, cfg.k)

            if label == BASELINE:
                base[L] = (m, recall)
                speedup = 1.0
            else:
                base_m, base_recall = base[L]
                first = distance_sequences_equal(m.results, base_m.results)
                if first is not None:
                    msg = f"{label} at L={L}: query {first} returned different distances than the baseline"
                    if cfg.strict_recall:
                        raise RecallMismatch(msg)
                    log.warning(msg)
                speedup = m.qps / base_m.qps

            records.append(
                BenchRecord(
                    index=cfg.index_label,
                    dataset=cfg.dataset_label,
                    reorder=label,
                    L=L,
                    k=cfg.k,
                    recall=recall,
                    qps=m.qps,
                    qps_std=m.qps_std,
                    speedup=speedup,
                    trials=cfg.trials,
                    mean_latency=m.mean_latency,
                    mean_hops=m.mean_hops,
                    mean_distance_evals=m.mean_distance_evals,
                    timer_warning=m.timer_warning,
                    timings=tuple(m.timings),
                )
            )
            log.info(f"{cfg.index_label}/{cfg.dataset_label} {label} L={L}: recall {recall:.4f}, {m.qps:.1f} qps, speed-up {speedup:.3f}")

    return records


def speedups(records: Sequence[BenchRecord]) -> List[float]:
    return [r.speedup for r in records if r.reorder != BASELINE]


# -----------------------------------------
# Clustering vs speed-up


class ScatterPoint(NamedTuple):
    index: str
    dataset: str
    average_lcc: float
    mean_speedup: float
    max_speedup: float


class Scatter(NamedTuple):
    points: List[ScatterPoint]
    # None when the ranks are degenerate
    spearman: Optional[float]


def scatter_point(records: Sequence[BenchRecord], average_lcc: float) -> ScatterPoint:
    s = speedups(records)
    if not s:
        raise ContractViolation("no reordered records to summarize")
    return ScatterPoint(records[0].index, records[0].dataset, average_lcc, float(np.mean(s)), float(max(s)))


def community_scatter(points: Sequence[ScatterPoint]) -> Scatter:
    """Average LCC against mean speed-up for each (index, dataset) pair."""
    points = list(points)
    rs = None
    if len(points) >= 2:
        try:
            rs = spearman_rank_correlation(
                [p.average_lcc for p in points], [p.mean_speedup for p in points]
            )
        except DegenerateCorrelation:
            pass
    return Scatter(points, rs)
