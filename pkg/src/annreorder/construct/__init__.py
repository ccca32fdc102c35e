from typing import NamedTuple, Optional, Tuple

from annreorder.construct.exact import build_exact_knn, random_knn_graph
from annreorder.construct.nn_descent import build_nn_descent
from annreorder.construct.params import BuildParams
from annreorder.construct.vamana import build_vamana, find_medoid
from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, VectorDataset

BUILDERS = ("exact", "nn-descent", "vamana")


class BuiltIndex(NamedTuple):
    graph: FixedDegreeGraph
    # preferred entry vertices, None when the index has no natural root
    entry_ids: Optional[Tuple[int, ...]]


def build(name: str, ds: VectorDataset, params: BuildParams) -> BuiltIndex:
    if name == "exact":
        params.validate(ds.n)
        return BuiltIndex(build_exact_knn(ds, params.k_max, params.workers), None)
    if name == "nn-descent":
        return BuiltIndex(build_nn_descent(ds, params), None)
    if name == "vamana":
        graph = build_vamana(ds, params)
        return BuiltIndex(graph, (find_medoid(ds, params.seed),))
    raise ContractViolation(f"unknown builder '{name}', expected one of {', '.join(BUILDERS)}")
