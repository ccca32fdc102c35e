"""
Vector dataset file formats, synthetic data and exact ground truth.

fvecs / ivecs: repeated records of a little-endian int32 width followed by
that many little-endian float32 (fvecs) or int32 (ivecs) values.

raw-bin: little-endian u32 n, u32 d, then n*d float32.
"""
import logging as log
import os
import struct
from typing import NamedTuple, Optional, Tuple

import numpy as np

import annreorder.utils as utils
from annreorder.exceptions import ContractViolation, FormatError
from annreorder.graph import GroundTruth, Metric, VectorDataset, as_queries

BIN_HEADER = struct.Struct("<II")

FORMATS = ("fvecs", "ivecs", "raw-bin")


# -----------------------------------------
# vecs framing


def _read_vecs(path, dtype) -> np.ndarray:
    with open(path, "rb") as f:
        buf = f.read()

    if len(buf) < 4:
        raise FormatError("file holds no records", path=path, offset=0)

    width = struct.unpack_from("<i", buf, 0)[0]
    if width <= 0:
        raise FormatError(f"record width {width} must be positive", path=path, offset=0)

    rec_size = 4 * (width + 1)
    n_full = len(buf) // rec_size
    words = np.frombuffer(buf, dtype="<i4", count=n_full * (width + 1)).reshape(n_full, width + 1)

    bad = np.nonzero(words[:, 0] != width)[0]
    if bad.size:
        r = int(bad[0])
        raise FormatError(
            f"record width {words[r, 0]} differs from first record's {width}",
            path=path,
            offset=r * rec_size,
        )

    if len(buf) % rec_size:
        raise FormatError(
            f"truncated record: {len(buf) - n_full * rec_size} trailing bytes",
            path=path,
            offset=n_full * rec_size,
        )

    return np.ascontiguousarray(words[:, 1:]).view(dtype)


def _write_vecs(path, matrix: np.ndarray, dtype):
    matrix = np.ascontiguousarray(matrix, dtype=dtype)
    if matrix.ndim != 2 or matrix.shape[1] < 1:
        raise ContractViolation(f"cannot write a {matrix.shape} matrix as vecs records")
    n, width = matrix.shape
    out = np.empty((n, width + 1), dtype="<i4")
    out[:, 0] = width
    out[:, 1:] = matrix.view("<i4")
    with open(path, "wb") as f:
        f.write(out.tobytes())


def read_fvecs_array(path) -> np.ndarray:
    return _read_vecs(path, "<f4").astype(np.float32)


def read_fvecs(path, metric=Metric.L2) -> VectorDataset:
    data = read_fvecs_array(path)
    if not np.isfinite(data).all():
        row = int(np.nonzero(~np.isfinite(data).all(axis=1))[0][0])
        raise FormatError(
            "non-finite vector component", path=path, offset=row * 4 * (data.shape[1] + 1)
        )
    log.info(f"read {data.shape[0]}x{data.shape[1]} vectors from {path}")
    return VectorDataset(data, metric)


def write_fvecs(path, vectors):
    if isinstance(vectors, VectorDataset):
        vectors = vectors.data
    _write_vecs(path, vectors, "<f4")


def read_ivecs(path) -> np.ndarray:
    return _read_vecs(path, "<i4").astype(np.int32)


def write_ivecs(path, matrix):
    matrix = np.asarray(matrix)
    if matrix.size and (matrix.min() < np.iinfo(np.int32).min or matrix.max() > np.iinfo(np.int32).max):
        raise ContractViolation("ivecs values must fit in int32")
    _write_vecs(path, matrix.astype(np.int32), "<i4")


# -----------------------------------------
# raw-bin


def read_bin(path, metric=Metric.L2) -> VectorDataset:
    with open(path, "rb") as f:
        buf = f.read()

    if len(buf) < BIN_HEADER.size:
        raise FormatError("short header", path=path, offset=len(buf))
    n, d = BIN_HEADER.unpack_from(buf, 0)
    if n < 1 or d < 1:
        raise FormatError(f"header declares {n}x{d} vectors", path=path, offset=0)

    expected = BIN_HEADER.size + 4 * n * d
    if len(buf) != expected:
        raise FormatError(
            f"payload is {len(buf) - BIN_HEADER.size} bytes, header implies {4 * n * d}",
            path=path,
            offset=min(len(buf), expected),
        )

    data = np.frombuffer(buf, dtype="<f4", offset=BIN_HEADER.size).reshape(n, d)
    if not np.isfinite(data).all():
        row = int(np.nonzero(~np.isfinite(data).all(axis=1))[0][0])
        raise FormatError(
            "non-finite vector component", path=path, offset=BIN_HEADER.size + row * 4 * d
        )
    return VectorDataset(data.astype(np.float32), metric)


def write_bin(path, vectors):
    if isinstance(vectors, VectorDataset):
        vectors = vectors.data
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    n, d = vectors.shape
    with open(path, "wb") as f:
        f.write(BIN_HEADER.pack(n, d))
        f.write(vectors.tobytes())


# -----------------------------------------
# manifests


class DatasetManifest(NamedTuple):
    path: str
    format: str = "auto"
    metric: Metric = Metric.L2
    n: Optional[int] = None
    d: Optional[int] = None


def detect_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".fvecs":
        return "fvecs"
    if ext == ".ivecs":
        return "ivecs"
    if ext in (".bin", ".fbin"):
        return "raw-bin"
    raise ContractViolation(f"can't tell the format of '{path}', pass one explicitly")


def load_dataset(manifest: DatasetManifest) -> VectorDataset:
    fmt = manifest.format
    if fmt == "auto":
        fmt = detect_format(manifest.path)

    metric = Metric.parse(manifest.metric)
    if fmt == "fvecs":
        ds = read_fvecs(manifest.path, metric)
    elif fmt == "raw-bin":
        ds = read_bin(manifest.path, metric)
    else:
        raise ContractViolation(f"'{fmt}' is not a vector dataset format")

    if manifest.n is not None and manifest.n != ds.n:
        raise FormatError(f"declared n={manifest.n} but file holds {ds.n}", path=manifest.path)
    if manifest.d is not None and manifest.d != ds.d:
        raise FormatError(f"declared d={manifest.d} but file holds {ds.d}", path=manifest.path)
    return ds


# -----------------------------------------
# synthetic data


def make_rng(seed: int) -> np.random.Generator:
    # Philox is counter based, so streams are identical on every platform
    return np.random.Generator(np.random.Philox(seed))


def _draw(rng, n, d, distribution, normalize):
    if distribution == "uniform":
        out = rng.random((n, d), dtype=np.float32)
    elif distribution == "gaussian":
        out = rng.standard_normal((n, d), dtype=np.float32)
    else:
        raise ContractViolation(f"unknown distribution '{distribution}'")

    if normalize:
        norms = np.sqrt((out * out).sum(axis=1, dtype=np.float32))
        norms[norms == 0] = 1
        out /= norms[:, None]
    return out


def generate_synthetic(
    n: int,
    d: int,
    seed: int,
    query_seed: int,
    n_queries: int,
    metric=Metric.L2,
    distribution="uniform",
    normalize=False,
    allow_same_seed=False,
) -> Tuple[VectorDataset, np.ndarray]:
    """
    i.i.d. components, uniform in [0, 1) by default.  Queries come from
    their own stream so they are not drawn from the database.
    """
    if n < 1 or d < 1 or n_queries < 1:
        raise ContractViolation(f"need n, d, n_queries >= 1, got {n}, {d}, {n_queries}")
    if seed == query_seed and not allow_same_seed:
        raise ContractViolation(f"query seed must differ from data seed ({seed})")

    data = _draw(make_rng(seed), n, d, distribution, normalize)
    queries = _draw(make_rng(query_seed), n_queries, d, distribution, normalize)
    return VectorDataset(data, metric), queries


# -----------------------------------------
# ground truth


def exact_ground_truth(ds: VectorDataset, queries, k: int, workers: int = 1) -> GroundTruth:
    if not 1 <= k <= ds.n:
        raise ContractViolation(f"k={k} must be in [1, {ds.n}]")
    queries = as_queries(queries, ds.d)

    def one(q):
        dist = ds.scan(q)
        # stable sort: equal distances stay in ascending ID order
        order = np.argsort(dist, kind="stable")[:k]
        return order, dist[order]

    with utils.timed(f"ground truth for {len(queries)} queries, k={k}"):
        rows = utils.parallel_map(one, list(queries), workers)

    ids = np.stack([r[0] for r in rows]).astype(np.int64)
    dists = np.stack([r[1] for r in rows]).astype(np.float32)
    return GroundTruth(ids, dists)


def save_ground_truth(gt: GroundTruth, ids_path, dist_path=None):
    write_ivecs(ids_path, gt.ids)
    if dist_path is not None and gt.distances is not None:
        write_fvecs(dist_path, gt.distances)


def load_ground_truth(ids_path, dist_path=None) -> GroundTruth:
    ids = read_ivecs(ids_path).astype(np.int64)
    if (ids < 0).any():
        raise FormatError("negative vertex ID in ground truth", path=ids_path)
    dists = None
    if dist_path is not None:
        dists = read_fvecs_array(dist_path)
        if dists.shape != ids.shape:
            raise FormatError(
                f"distance matrix {dists.shape} does not match IDs {ids.shape}", path=dist_path
            )
    return GroundTruth(ids, dists)
