"""
Dimensionality study: does reordering pay off more or less as vectors get
wider?  For each d, synthetic data is generated, indexed by every builder
and swept; the max and mean speed-ups are then rank-correlated with d.
"""
import logging as log
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from annreorder.analyzer import spearman_rank_correlation
from annreorder.bench.harness import SweepConfig, speedups, sweep
from annreorder.construct import BuildParams, build
from annreorder.dataset import exact_ground_truth, generate_synthetic
from annreorder.exceptions import ContractViolation, DegenerateCorrelation
from annreorder.reorder import ReorderSpec
from annreorder.search import EntryMode, SearchParams

D_GRID = (8, 16, 32, 64, 128, 256, 512, 1024)

TIE_DEGENERATE = "tie-degenerate"


class DimensionParams(NamedTuple):
    n: int = 10000
    n_queries: int = 1000
    distribution: str = "uniform"
    build: BuildParams = BuildParams()
    sweep: SweepConfig = SweepConfig()
    entry_seed: int = 0


class DimensionPoint(NamedTuple):
    d: int
    max_speedup: float
    mean_speedup: float


class DimensionRow(NamedTuple):
    builder: str
    points: List[DimensionPoint]
    # None when the correlation is tie-degenerate
    max_speedup_rs: Optional[float]
    mean_speedup_rs: Optional[float]


def _rs(xs, ys) -> Optional[float]:
    try:
        return spearman_rank_correlation(xs, ys)
    except DegenerateCorrelation:
        return None


def correlate(builder: str, points: Sequence[DimensionPoint]) -> DimensionRow:
    ds = [p.d for p in points]
    return DimensionRow(
        builder,
        list(points),
        _rs(ds, [p.max_speedup for p in points]),
        _rs(ds, [p.mean_speedup for p in points]),
    )


def dimension_sweep(
    d_grid: Sequence[int],
    seeds: Tuple[int, int],
    builders: Sequence[str],
    reorder_specs: Sequence[ReorderSpec],
    params: DimensionParams = DimensionParams(),
) -> List[DimensionRow]:
    """One row per builder with the r_s of max and of mean speed-up against d."""
    if len(d_grid) < 2:
        raise ContractViolation("a dimension sweep needs at least two dimensionalities")
    if not reorder_specs:
        raise ContractViolation("a dimension sweep needs at least one reordering")
    data_seed, query_seed = seeds

    points = {b: [] for b in builders}
    for d in d_grid:
        ds, queries = generate_synthetic(
            params.n, d, data_seed, query_seed, params.n_queries, distribution=params.distribution
        )
        gt = exact_ground_truth(ds, queries, params.sweep.k, params.sweep.workers)
        for builder in builders:
            index = build(builder, ds, params.build)
            if index.entry_ids:
                search = SearchParams(L=1, k=1, entry_mode=EntryMode.FIXED, entry_ids=index.entry_ids)
            else:
                search = SearchParams(L=1, k=1, seed=params.entry_seed)

            cfg = params.sweep._replace(index_label=builder, dataset_label=f"synthetic-d{d}")
            s = speedups(sweep(index.graph, ds, queries, gt, search, reorder_specs, cfg))
            points[builder].append(DimensionPoint(d, float(max(s)), float(np.mean(s))))
            log.info(f"d={d} {builder}: max speed-up {max(s):.3f}, mean {np.mean(s):.3f}")

    return [correlate(b, points[b]) for b in builders]


def format_rs(value: Optional[float]) -> str:
    return TIE_DEGENERATE if value is None else f"{value:.4f}"


def format_table(rows: Sequence[DimensionRow]) -> str:
    lines = [f"{'builder':<16}{'max speed-up (r_s)':>22}{'mean speed-up (r_s)':>22}"]
    for r in rows:
        lines.append(f"{r.builder:<16}{format_rs(r.max_speedup_rs):>22}{format_rs(r.mean_speedup_rs):>22}")
    return "\n".join(lines)


def table_to_dict(rows: Sequence[DimensionRow]) -> list:
    return [
        {
            "builder": r.builder,
            "max_speedup_rs": format_rs(r.max_speedup_rs) if r.max_speedup_rs is None else r.max_speedup_rs,
            "mean_speedup_rs": format_rs(r.mean_speedup_rs) if r.mean_speedup_rs is None else r.mean_speedup_rs,
            "points": [p._asdict() for p in r.points],
        }
        for r in rows
    ]
