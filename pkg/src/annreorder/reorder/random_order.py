import numpy as np

from annreorder.dataset import make_rng
from annreorder.exceptions import ContractViolation
from annreorder.graph import Permutation


def random_order(n: int, seed: int) -> Permutation:
    """Fisher-Yates shuffle driven by the Philox generator."""
    if n < 1:
        raise ContractViolation(f"n={n} must be >= 1")

    order = np.arange(n, dtype=np.int64)
    if n > 1:
        picks = make_rng(seed).integers(0, np.arange(n, 1, -1)).tolist()
        for i, j in zip(range(n - 1, 0, -1), picks):
            order[i], order[j] = order[j], order[i]
    return Permutation.from_order(order)
