"""
Permutation files: "PERM", version u32, n u32, then n u32 forward entries,
all little-endian.
"""
import struct

import numpy as np

from annreorder.exceptions import FormatError
from annreorder.graph import Permutation

MAGIC = b"PERM"
VERSION = 1
HEADER = struct.Struct("<4sII")


def format_permutation(p: Permutation) -> bytes:
    return HEADER.pack(MAGIC, VERSION, p.n) + p.forward.astype("<u4").tobytes()


def write_permutation(p: Permutation, path):
    with open(path, "wb") as f:
        f.write(format_permutation(p))


def parse_permutation(buf: bytes, path=None) -> Permutation:
    if len(buf) < HEADER.size:
        raise FormatError("short header", path=path, offset=len(buf))
    magic, version, n = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", path=path, offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path=path, offset=4)
    if n < 1:
        raise FormatError("empty permutation", path=path, offset=8)
    expected = HEADER.size + 4 * n
    if len(buf) != expected:
        raise FormatError(f"file is {len(buf)} bytes, header implies {expected}", path=path, offset=min(len(buf), expected))

    forward = np.frombuffer(buf, dtype="<u4", count=n, offset=HEADER.size).astype(np.int64)
    if forward.max() >= n:
        i = int(np.argmax(forward >= n))
        raise FormatError(f"entry {forward[i]} out of range [0, {n})", path=path, offset=HEADER.size + 4 * i)
    counts = np.bincount(forward, minlength=n)
    if (counts != 1).any():
        value = int(np.nonzero(counts > 1)[0][0])
        i = int(np.nonzero(forward == value)[0][1])
        raise FormatError(f"entry {value} repeats, not a bijection", path=path, offset=HEADER.size + 4 * i)
    return Permutation(forward)


def read_permutation(path) -> Permutation:
    with open(path, "rb") as f:
        return parse_permutation(f.read(), path)
