"""
Domain types shared by every other module: vector datasets, fixed-degree
graph indices and vertex permutations.

All arrays held by these types are made read-only on construction so the
objects can be shared between worker threads without copying.
"""
import enum
from typing import Iterable, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from annreorder.exceptions import ContractViolation

ID_DTYPE = np.uint32
INVALID = 0xFFFFFFFF

# Ground truth and brute-force scans walk the database in blocks of this many
# rows.  Each distance is still a sum over one contiguous row, so blocking
# never changes a result bit.
SCAN_BLOCK_ROWS = 65536


class Metric(enum.Enum):
    L2 = "l2"
    INNER_PRODUCT = "ip"

    @classmethod
    def parse(cls, name) -> "Metric":
        if isinstance(name, Metric):
            return name
        key = str(name).strip().lower().replace("_", "").replace("-", "")
        if key in ("l2", "euclidean", "sqeuclidean"):
            return cls.L2
        if key in ("ip", "innerproduct", "dot", "mips"):
            return cls.INNER_PRODUCT
        raise ContractViolation(f"unknown metric '{name}'")


def _read_only(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# -----------------------------------------
# Distances


def distances_to(rows: np.ndarray, q: np.ndarray, metric: Metric) -> np.ndarray:
    """
    Distance from every row of 'rows' (m x d) to the single vector 'q'.

    L2 is squared Euclidean and inner product is the negated dot product, so
    smaller is always better.  Each value is a float32 sum over one
    contiguous row; the same (row, q) pair gives the same bits no matter how
    many rows are passed in together.
    """
    if rows.ndim != 2 or q.ndim != 1 or rows.shape[1] != q.shape[0]:
        raise ContractViolation(
            f"dimension mismatch: rows {rows.shape} vs query {q.shape}"
        )
    if metric is Metric.L2:
        diff = rows - q
        return (diff * diff).sum(axis=1, dtype=np.float32)
    return -((rows * q).sum(axis=1, dtype=np.float32))


def paired_distances(a: np.ndarray, b: np.ndarray, metric: Metric) -> np.ndarray:
    """Row-by-row distances between two m x d arrays, same arithmetic as distances_to."""
    if a.shape != b.shape or a.ndim != 2:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")
    if metric is Metric.L2:
        diff = a - b
        return (diff * diff).sum(axis=1, dtype=np.float32)
    return -((a * b).sum(axis=1, dtype=np.float32))


def distance(a, b, metric=Metric.L2) -> float:
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.ndim != 1 or a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ContractViolation("distance inputs must be finite")
    return float(distances_to(a.reshape(1, -1), b, Metric.parse(metric))[0])


# -----------------------------------------
# Vector datasets


class VectorDataset:
    def __init__(self, data, metric=Metric.L2):
        data = np.ascontiguousarray(data, dtype=np.float32)
        if data.ndim != 2:
            raise ContractViolation(f"dataset must be 2-D, got shape {data.shape}")
        n, d = data.shape
        if n < 1 or d < 1:
            raise ContractViolation(f"dataset needs n >= 1 and d >= 1, got {n}x{d}")
        if not np.isfinite(data).all():
            raise ContractViolation("dataset contains NaN or Inf components")
        if not data.flags.owndata:
            data = data.copy()
        self._data = _read_only(data)
        self._metric = Metric.parse(metric)

    def __repr__(self):
        return f"VectorDataset(n={self.n}, d={self.d}, metric={self._metric.value})"

    def __eq__(self, other):
        return (
            isinstance(other, VectorDataset)
            and self._metric is other._metric
            and np.array_equal(self._data, other._data)
        )

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @property
    def d(self) -> int:
        return self._data.shape[1]

    @property
    def metric(self) -> Metric:
        return self._metric

    @property
    def data(self) -> np.ndarray:
        return self._data

    def distances(self, ids, q) -> np.ndarray:
        return distances_to(self._data[ids], q, self._metric)

    def scan(self, q) -> np.ndarray:
        """Distances from 'q' to every database vector, in ID order."""
        out = np.empty(self.n, dtype=np.float32)
        for lo in range(0, self.n, SCAN_BLOCK_ROWS):
            hi = min(lo + SCAN_BLOCK_ROWS, self.n)
            out[lo:hi] = distances_to(self._data[lo:hi], q, self._metric)
        return out


def as_queries(queries, d: int) -> np.ndarray:
    q = np.ascontiguousarray(queries, dtype=np.float32)
    if q.ndim == 1:
        q = q.reshape(1, -1)
    if q.ndim != 2 or q.shape[1] != d:
        raise ContractViolation(f"queries must be ?x{d}, got shape {q.shape}")
    if not np.isfinite(q).all():
        raise ContractViolation("queries contain NaN or Inf components")
    return q


class GroundTruth(NamedTuple):
    ids: np.ndarray  # nq x k, int64
    distances: np.ndarray  # nq x k, float32

    @property
    def k(self) -> int:
        return self.ids.shape[1]

    def __len__(self):
        return self.ids.shape[0]


# -----------------------------------------
# Fixed-degree graphs


class FixedDegreeGraph:
    """
    n rows of k_max neighbor slots.  Row v holds deg(v) valid IDs in its
    leading slots; the rest hold INVALID.
    """

    def __init__(self, neighbors, degrees, check=True):
        neighbors = np.ascontiguousarray(neighbors, dtype=ID_DTYPE)
        degrees = np.ascontiguousarray(degrees, dtype=ID_DTYPE)
        if neighbors.ndim != 2:
            raise ContractViolation(f"neighbors must be 2-D, got {neighbors.shape}")
        if degrees.shape != (neighbors.shape[0],):
            raise ContractViolation(
                f"degrees shape {degrees.shape} does not match {neighbors.shape[0]} rows"
            )
        if not neighbors.flags.owndata:
            neighbors = neighbors.copy()
        if not degrees.flags.owndata:
            degrees = degrees.copy()
        self._neighbors = _read_only(neighbors)
        self._degrees = _read_only(degrees)
        if check:
            self.check()

    @classmethod
    def from_rows(cls, n: int, k_max: int, rows: Sequence[Iterable[int]]) -> "FixedDegreeGraph":
        if len(rows) != n:
            raise ContractViolation(f"expected {n} rows, got {len(rows)}")
        neighbors = np.full((n, k_max), INVALID, dtype=ID_DTYPE)
        degrees = np.zeros(n, dtype=ID_DTYPE)
        for v, row in enumerate(rows):
            row = list(row)
            if len(row) > k_max:
                raise ContractViolation(f"row {v} has {len(row)} entries, k_max is {k_max}")
            neighbors[v, : len(row)] = row
            degrees[v] = len(row)
        return cls(neighbors, degrees)

    def __repr__(self):
        return f"FixedDegreeGraph(n={self.n}, k_max={self.k_max}, edges={self.edge_count})"

    def __eq__(self, other):
        return (
            isinstance(other, FixedDegreeGraph)
            and np.array_equal(self._neighbors, other._neighbors)
            and np.array_equal(self._degrees, other._degrees)
        )

    @property
    def n(self) -> int:
        return self._neighbors.shape[0]

    @property
    def k_max(self) -> int:
        return self._neighbors.shape[1]

    @property
    def neighbors(self) -> np.ndarray:
        return self._neighbors

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def edge_count(self) -> int:
        return int(self._degrees.sum(dtype=np.int64))

    def valid_mask(self) -> np.ndarray:
        return np.arange(self.k_max)[None, :] < self._degrees[:, None].astype(np.int64)

    def row(self, v: int) -> np.ndarray:
        return self._neighbors[v, : self._degrees[v]]

    def out_degrees(self) -> np.ndarray:
        return self._degrees.astype(np.int64)

    def in_degrees(self) -> np.ndarray:
        targets = self._neighbors[self.valid_mask()]
        return np.bincount(targets.astype(np.int64), minlength=self.n)

    def edges(self) -> np.ndarray:
        """All edges as an E x 2 int64 array of (source, target), row-major."""
        mask = self.valid_mask()
        sources = np.broadcast_to(np.arange(self.n)[:, None], mask.shape)[mask]
        targets = self._neighbors[mask].astype(np.int64)
        return np.stack([sources, targets], axis=1)

    def edge_set(self) -> Set[Tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def adjacency_lists(self):
        return [self.row(v).astype(np.int64) for v in range(self.n)]

    def check(self):
        n, k_max = self._neighbors.shape
        if n < 1 or k_max < 1:
            raise ContractViolation(f"graph needs n >= 1 and k_max >= 1, got {n}x{k_max}")
        if n >= INVALID:
            raise ContractViolation(f"{n} vertices do not fit 32-bit IDs")

        bad = np.nonzero(self._degrees > k_max)[0]
        if bad.size:
            raise ContractViolation(f"row {bad[0]}: degree {self._degrees[bad[0]]} exceeds k_max {k_max}")

        mask = self.valid_mask()
        out_of_range = mask & (self._neighbors >= n)
        if out_of_range.any():
            v = int(np.nonzero(out_of_range.any(axis=1))[0][0])
            raise ContractViolation(f"row {v}: neighbor ID out of range [0, {n})")

        stray = ~mask & (self._neighbors != INVALID)
        if stray.any():
            v = int(np.nonzero(stray.any(axis=1))[0][0])
            raise ContractViolation(f"row {v}: slot beyond degree is not INVALID")

        loops = mask & (self._neighbors == np.arange(n, dtype=np.int64)[:, None])
        if loops.any():
            v = int(np.nonzero(loops.any(axis=1))[0][0])
            raise ContractViolation(f"row {v}: self-loop")

        ordered = np.sort(self._neighbors, axis=1)
        dup = (ordered[:, 1:] == ordered[:, :-1]) & (ordered[:, 1:] != INVALID)
        if dup.any():
            v = int(np.nonzero(dup.any(axis=1))[0][0])
            raise ContractViolation(f"row {v}: duplicate neighbor")


# -----------------------------------------
# Permutations


class Permutation:
    """forward[i] is the new ID of old vertex i; inverse undoes it."""

    def __init__(self, forward):
        forward = np.ascontiguousarray(forward, dtype=np.int64)
        if forward.ndim != 1 or forward.size < 1:
            raise ContractViolation("permutation must be a non-empty 1-D array")
        n = forward.size
        if forward.min() < 0 or forward.max() >= n:
            raise ContractViolation("permutation entries out of range")
        inverse = np.full(n, -1, dtype=np.int64)
        inverse[forward] = np.arange(n, dtype=np.int64)
        if (inverse < 0).any():
            raise ContractViolation("permutation is not a bijection")
        if not forward.flags.owndata:
            forward = forward.copy()
        self._forward = _read_only(forward)
        self._inverse = _read_only(inverse)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def from_order(cls, order) -> "Permutation":
        """order[r] is the old vertex that ends up at position r."""
        order = np.asarray(order, dtype=np.int64)
        forward = np.full(order.size, -1, dtype=np.int64)
        forward[order] = np.arange(order.size, dtype=np.int64)
        return cls(forward)

    def __repr__(self):
        return f"Permutation(n={self.n})"

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self._forward, other._forward)

    @property
    def n(self) -> int:
        return self._forward.size

    @property
    def forward(self) -> np.ndarray:
        return self._forward

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def order(self) -> np.ndarray:
        """Old vertex IDs listed by their new position."""
        return self._inverse

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._forward, np.arange(self.n)))

    def inverse_permutation(self) -> "Permutation":
        return Permutation(self._inverse)

    def compose(self, then: "Permutation") -> "Permutation":
        """Relabel with self, then with 'then'."""
        if then.n != self.n:
            raise ContractViolation(f"cannot compose permutations of {self.n} and {then.n}")
        return Permutation(then.forward[self._forward])


def apply_permutation(
    g: FixedDegreeGraph, ds: Optional[VectorDataset], p: Permutation
) -> Tuple[FixedDegreeGraph, Optional[VectorDataset]]:
    """
    Relocate vertex i to row p(i).  Neighbor IDs are relabeled and each row's
    valid slots end up left-packed in ascending order; vector rows move with
    their vertex.  The dataset may be None when only the graph is needed.
    """
    if p.n != g.n or (ds is not None and ds.n != g.n):
        raise ContractViolation(
            f"size mismatch: permutation {p.n}, graph {g.n}, dataset {ds.n if ds else '-'}"
        )

    mask = g.valid_mask()
    relabeled = np.full(g.neighbors.shape, INVALID, dtype=ID_DTYPE)
    relabeled[mask] = p.forward[g.neighbors[mask].astype(np.int64)]
    # INVALID is the largest ID, so sorting packs valid slots to the left
    relabeled.sort(axis=1)

    neighbors = np.empty_like(relabeled)
    neighbors[p.forward] = relabeled
    degrees = np.empty_like(g.degrees)
    degrees[p.forward] = g.degrees
    graph = FixedDegreeGraph(neighbors, degrees, check=False)

    if ds is None:
        return graph, None

    data = np.empty_like(ds.data)
    data[p.forward] = ds.data
    return graph, VectorDataset(data, ds.metric)
