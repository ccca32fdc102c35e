from typing import NamedTuple

from annreorder.exceptions import ContractViolation

DEFAULT_K_MAX = 32


class BuildParams(NamedTuple):
    k_max: int = DEFAULT_K_MAX

    # nn-descent
    sample_rate: float = 1.0
    max_iters: int = 10
    convergence_delta: float = 0.001

    # vamana
    alpha: float = 1.2
    build_beam_width: int = 64

    seed: int = 0
    workers: int = 1

    def validate(self, n: int):
        if self.k_max < 2:
            raise ContractViolation(f"k_max={self.k_max} must be >= 2")
        if self.k_max > n - 1:
            raise ContractViolation(f"k_max={self.k_max} needs at least {self.k_max + 1} vectors, got {n}")
        if not 0.0 < self.sample_rate <= 1.0:
            raise ContractViolation(f"sample_rate={self.sample_rate} must be in (0, 1]")
        if self.max_iters < 0:
            raise ContractViolation(f"max_iters={self.max_iters} must be >= 0")
        if self.convergence_delta < 0:
            raise ContractViolation(f"convergence_delta={self.convergence_delta} must be >= 0")
        if self.alpha < 1.0:
            raise ContractViolation(f"alpha={self.alpha} must be >= 1")
        if self.build_beam_width < 1:
            raise ContractViolation(f"build_beam_width={self.build_beam_width} must be >= 1")
        if self.workers < 1:
            raise ContractViolation(f"workers={self.workers} must be >= 1")

    def to_dict(self):
        return dict(self._asdict())
