import numpy as np

from annreorder.exceptions import ContractViolation
from annreorder.graph import FixedDegreeGraph, Permutation


def degree_sort(g: FixedDegreeGraph, direction: str = "in") -> Permutation:
    """Highest degree first; equal degrees keep their original order."""
    if direction == "in":
        deg = g.in_degrees()
    elif direction == "out":
        deg = g.out_degrees()
    else:
        raise ContractViolation(f"degree direction must be 'in' or 'out', got '{direction}'")
    return Permutation.from_order(np.argsort(-deg, kind="stable"))
