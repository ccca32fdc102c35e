"""
Structural metrics for graph indices.

Clustering coefficients use the undirected view of the graph (u ~ v when
an edge runs either way), since triangles are an undirected notion.
"""
import json
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse.csgraph as csgraph
import scipy.stats

from annreorder.exceptions import ContractViolation, DegenerateCorrelation
from annreorder.graph import FixedDegreeGraph, Permutation
from annreorder.reorder.rcm import symmetrize

LCC_BINS = 20


# -----------------------------------------
# Clustering


def local_clustering_coefficient(g: FixedDegreeGraph, v: int) -> float:
    if not 0 <= v < g.n:
        raise ContractViolation(f"vertex {v} out of range [0, {g.n})")
    s = symmetrize(g)
    nbrs = s.indices[s.indptr[v]:s.indptr[v + 1]]
    k = nbrs.size
    if k < 2:
        return 0.0

    links = 0
    for u in nbrs:
        links += np.intersect1d(s.indices[s.indptr[u]:s.indptr[u + 1]], nbrs, assume_unique=True).size
    # every triangle edge was seen from both ends
    triangles = links // 2
    return 2 * triangles / (k * (k - 1))


def triangle_counts(g: FixedDegreeGraph) -> np.ndarray:
    s = symmetrize(g).astype(np.int64)
    return np.asarray((s @ s).multiply(s).sum(axis=1)).ravel() // 2


def lcc_per_vertex(g: FixedDegreeGraph) -> np.ndarray:
    s = symmetrize(g)
    k = np.diff(s.indptr).astype(np.int64)
    t = triangle_counts(g)
    out = np.zeros(g.n, dtype=np.float64)
    ok = k >= 2
    out[ok] = (2 * t[ok]) / (k[ok] * (k[ok] - 1))
    return out


def average_lcc(g: FixedDegreeGraph) -> float:
    # fsum is exactly rounded, so relabeling vertices cannot change the mean
    return math.fsum(lcc_per_vertex(g).tolist()) / g.n


def lcc_histogram(values: np.ndarray, bins: int = LCC_BINS) -> List[int]:
    counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    return counts.tolist()


# -----------------------------------------
# Layout


def _labels(g: FixedDegreeGraph, labeling) -> np.ndarray:
    if labeling is None:
        return np.arange(g.n, dtype=np.int64)
    if isinstance(labeling, Permutation):
        labeling = labeling.forward
    labels = np.asarray(labeling, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ContractViolation(f"labeling has {labels.size} entries for {g.n} vertices")
    return labels


def bandwidth(g: FixedDegreeGraph, labeling=None) -> int:
    """Largest label distance across an edge; 0 for an edgeless graph."""
    labels = _labels(g, labeling)
    edges = g.edges()
    if len(edges) == 0:
        return 0
    return int(np.abs(labels[edges[:, 0]] - labels[edges[:, 1]]).max())


def mean_gap(g: FixedDegreeGraph, labeling=None) -> float:
    labels = _labels(g, labeling)
    edges = g.edges()
    if len(edges) == 0:
        return 0.0
    return float(np.abs(labels[edges[:, 0]] - labels[edges[:, 1]]).mean())


def weak_components(g: FixedDegreeGraph) -> int:
    count, _ = csgraph.connected_components(symmetrize(g), directed=False)
    return int(count)


# -----------------------------------------
# Rank correlation


def spearman_rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Pearson correlation of average ranks.  Raises DegenerateCorrelation
    when either side has all-equal ranks.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ContractViolation(f"length mismatch: {xs.shape} vs {ys.shape}")
    if xs.size < 2:
        raise ContractViolation("rank correlation needs at least two points")

    rx = scipy.stats.rankdata(xs, method="average")
    ry = scipy.stats.rankdata(ys, method="average")
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateCorrelation("zero rank variance, correlation is undefined")
    r = float((dx * dy).sum()) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# -----------------------------------------
# Reports


class GraphReport(NamedTuple):
    n: int
    edge_count: int
    min_in_degree: int
    mean_in_degree: float
    max_in_degree: int
    min_out_degree: int
    mean_out_degree: float
    max_out_degree: int
    average_lcc: float
    lcc_histogram: List[int]
    bandwidth: int
    weak_components: int
    mean_gap: float
    lcc_view: str = "symmetrized"

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self._asdict(), indent=indent)


def analyze(g: FixedDegreeGraph, labeling=None) -> GraphReport:
    indeg = g.in_degrees()
    outdeg = g.out_degrees()
    lcc = lcc_per_vertex(g)
    return GraphReport(
        n=g.n,
        edge_count=g.edge_count,
        min_in_degree=int(indeg.min()),
        mean_in_degree=float(indeg.mean()),
        max_in_degree=int(indeg.max()),
        min_out_degree=int(outdeg.min()),
        mean_out_degree=float(outdeg.mean()),
        max_out_degree=int(outdeg.max()),
        average_lcc=math.fsum(lcc.tolist()) / g.n,
        lcc_histogram=lcc_histogram(lcc),
        bandwidth=bandwidth(g, labeling),
        weak_components=weak_components(g),
        mean_gap=mean_gap(g, labeling),
    )
