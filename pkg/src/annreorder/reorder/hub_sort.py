from typing import Optional

import numpy as np

from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, Permutation


def default_threshold(g: FixedDegreeGraph) -> float:
    return float(g.in_degrees().mean())


def hub_sort(g: FixedDegreeGraph, threshold: Optional[float] = None) -> Permutation:
    """
    Vertices with in-degree above the threshold move to the front.  Both
    groups keep ascending original-ID order.
    """
    if threshold is None:
        threshold = default_threshold(g)
    if threshold < 0:
        raise ContractViolation(f"hub threshold {threshold} must be >= 0")

    hubs = g.in_degrees() > threshold
    return Permutation.from_order(np.concatenate([np.nonzero(hubs)[0], np.nonzero(~hubs)[0]]))
