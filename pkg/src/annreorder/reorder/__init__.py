"""
Vertex reorderings.  Every strategy maps a graph to a Permutation and never
touches the topology.
"""
from typing import NamedTuple, Optional

import annreorder.utils as utils
from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, Permutation
from annreorder.reorder.degree_sort import degree_sort
from annreorder.reorder.gorder import DEFAULT_WINDOW, gorder, windowed_score
from annreorder.reorder.hub_sort import default_threshold, hub_sort
from annreorder.reorder.permfile import read_permutation, write_permutation
from annreorder.reorder.random_order import random_order
from annreorder.reorder.rcm import rcm

ALGORITHMS = ("indegree-sort", "outdegree-sort", "hub-sort", "gorder", "rcm", "random", "identity")

# the strategies a study compares against the unreordered baseline
STRATEGIES = ALGORITHMS[:-1]


class ReorderSpec(NamedTuple):
    algorithm: str
    window: int = DEFAULT_WINDOW
    # None means the mean in-degree of the graph being reordered
    hub_threshold: Optional[float] = None
    seed: int = 0

    @property
    def label(self) -> str:
        return self.algorithm

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ContractViolation(
                f"unknown reorder algorithm '{self.algorithm}', expected one of {', '.join(ALGORITHMS)}"
            )
        if self.window < 1:
            raise ContractViolation(f"gorder window {self.window} must be >= 1")
        if self.hub_threshold is not None and self.hub_threshold < 0:
            raise ContractViolation(f"hub threshold {self.hub_threshold} must be >= 0")

    def resolved(self, g: FixedDegreeGraph) -> dict:
        """Parameters as actually used on 'g', for manifests."""
        out = {"algorithm": self.algorithm}
        if self.algorithm == "gorder":
            out["window"] = self.window
        elif self.algorithm == "hub-sort":
            out["hub_threshold"] = (
                default_threshold(g) if self.hub_threshold is None else float(self.hub_threshold)
            )
            out["hub_threshold_mode"] = "mean-in-degree" if self.hub_threshold is None else "fixed"
        elif self.algorithm == "random":
            out["seed"] = self.seed
        elif self.algorithm.endswith("degree-sort"):
            out["direction"] = "descending"
        return out


IDENTITY = ReorderSpec("identity")


def compute_permutation(spec: ReorderSpec, g: FixedDegreeGraph) -> Permutation:
    spec.validate()
    with utils.timed(f"{spec.label} reordering of {g.n} vertices"):
        if spec.algorithm == "indegree-sort":
            p = degree_sort(g, "in")
        elif spec.algorithm == "outdegree-sort":
            p = degree_sort(g, "out")
        elif spec.algorithm == "hub-sort":
            p = hub_sort(g, spec.hub_threshold)
        elif spec.algorithm == "gorder":
            p = gorder(g, spec.window)
        elif spec.algorithm == "rcm":
            p = rcm(g)
        elif spec.algorithm == "random":
            p = random_order(g.n, spec.seed)
        else:
            p = Permutation.identity(g.n)

    # Permutation validates the bijection; a wrong length is the other failure
    if p.n != g.n:
        raise ContractViolation(f"{spec.label} produced {p.n} entries for {g.n} vertices")
    return p
