"""
Graph adapter: turn externally built topologies into FixedDegreeGraph
without changing a single edge.

Canonical formats:

  adjlist-text  "ID: n1 n2 ...", one line per vertex, ascending IDs, blank
                lines ignored; vertices with no line get degree 0.
  csr-bin       "CSRX", version u32, n u32, edge_count u32, then n+1 u64
                offsets and edge_count u32 targets.
  fixed-bin     "FDGX", version u32, n u32, k_max u32, then n*k_max u32
                slots (INVALID padding) and n u32 degrees.

All binary fields are little-endian.  Other layouts plug in through
register_front_end(); a front end yields (n, rows) and is re-emitted as
adjlist-text.
"""
import logging as log
import struct
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from annreorder.exceptions import ContractViolation, FormatError, TopologyError
from annreorder.graph import ID_DTYPE, INVALID, FixedDegreeGraph

VERSION = 1
HEADER = struct.Struct("<4sIII")
FIXED_MAGIC = b"FDGX"
CSR_MAGIC = b"CSRX"

FORMATS = ("adjlist-text", "csr-bin", "fixed-bin")


class Row(NamedTuple):
    vertex: int
    neighbors: List[int]
    # where the row came from, for error messages
    line: Optional[int] = None
    offset: Optional[int] = None


class IngestResult(NamedTuple):
    graph: FixedDegreeGraph
    dropped_edges: int
    truncated_rows: int


# -----------------------------------------
# Building a graph from rows


def _reject(msg, path, row: Row):
    raise TopologyError(f"vertex {row.vertex}: {msg}", path=path, offset=row.offset, line=row.line)


def graph_from_rows(
    n: int, rows: Sequence[Row], k_cap: Optional[int] = None, truncate=False, path=None
) -> IngestResult:
    """
    Row v of the result is v's neighbor list in the order given.  Lists
    longer than k_cap are an error unless 'truncate' is set, in which case
    the first k_cap entries are kept and the dropped edges are reported.
    """
    if n < 1:
        raise FormatError("graph has no vertices", path=path)

    seen_vertices = set()
    for row in rows:
        if not 0 <= row.vertex < n:
            _reject(f"ID out of range [0, {n})", path, row)
        if row.vertex in seen_vertices:
            _reject("listed twice", path, row)
        seen_vertices.add(row.vertex)

        seen = set()
        for u in row.neighbors:
            if not 0 <= u < n:
                _reject(f"neighbor {u} out of range [0, {n})", path, row)
            if u == row.vertex:
                _reject("self-loop", path, row)
            if u in seen:
                _reject(f"duplicate edge to {u}", path, row)
            seen.add(u)

    max_degree = max((len(r.neighbors) for r in rows), default=0)
    if k_cap is None:
        k_cap = max(1, max_degree)
    if k_cap < 1:
        raise ContractViolation(f"k_cap={k_cap} must be >= 1")

    neighbors = np.full((n, k_cap), INVALID, dtype=ID_DTYPE)
    degrees = np.zeros(n, dtype=ID_DTYPE)
    dropped = 0
    truncated = 0
    for row in rows:
        kept = row.neighbors
        if len(kept) > k_cap:
            if not truncate:
                _reject(f"degree {len(kept)} exceeds k_cap {k_cap}", path, row)
            dropped += len(kept) - k_cap
            truncated += 1
            kept = kept[:k_cap]
        neighbors[row.vertex, : len(kept)] = kept
        degrees[row.vertex] = len(kept)

    if dropped:
        log.warning(f"truncated {truncated} rows to {k_cap} slots, dropping {dropped} edges")

    return IngestResult(FixedDegreeGraph(neighbors, degrees, check=False), dropped, truncated)


def rows_of(g: FixedDegreeGraph) -> List[Row]:
    return [Row(v, g.row(v).tolist()) for v in range(g.n)]


# -----------------------------------------
# adjlist-text


def parse_adjlist(text: str, n: Optional[int] = None, path=None) -> Tuple[int, List[Row]]:
    rows = []
    previous = -1
    max_id = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        try:
            if not sep:
                raise ValueError
            v = int(head.strip())
            nbrs = [int(t) for t in tail.split()]
        except ValueError:
            raise FormatError(f"expected 'ID: n1 n2 ...', got '{line.strip()}'", path=path, line=lineno)
        if v <= previous:
            raise FormatError(f"vertex {v} is not in ascending order", path=path, line=lineno)
        previous = v
        max_id = max([max_id, v] + nbrs)
        rows.append(Row(v, nbrs, line=lineno))

    if n is None:
        n = max_id + 1
    return n, rows


def format_adjlist(g: FixedDegreeGraph) -> str:
    lines = []
    for v in range(g.n):
        nbrs = " ".join(str(u) for u in g.row(v).tolist())
        lines.append(f"{v}: {nbrs}".rstrip())
    return "\n".join(lines) + "\n"


def write_adjlist(g: FixedDegreeGraph, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_adjlist(g))


# -----------------------------------------
# csr-bin


def parse_csr(buf: bytes, path=None) -> Tuple[int, List[Row]]:
    if len(buf) < HEADER.size:
        raise FormatError("short header", path=path, offset=len(buf))
    magic, version, n, edge_count = HEADER.unpack_from(buf, 0)
    if magic != CSR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CSR_MAGIC!r}", path=path, offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path=path, offset=4)

    offsets_at = HEADER.size
    targets_at = offsets_at + 8 * (n + 1)
    expected = targets_at + 4 * edge_count
    if len(buf) != expected:
        raise FormatError(
            f"file is {len(buf)} bytes, header implies {expected}", path=path, offset=min(len(buf), expected)
        )

    offsets = np.frombuffer(buf, dtype="<u8", count=n + 1, offset=offsets_at).astype(np.int64)
    if offsets[0] != 0:
        raise FormatError("first offset is not 0", path=path, offset=offsets_at)
    steps = np.diff(offsets)
    if (steps < 0).any():
        i = int(np.nonzero(steps < 0)[0][0]) + 1
        raise FormatError("offsets decrease", path=path, offset=offsets_at + 8 * i)
    if offsets[-1] != edge_count:
        raise FormatError(
            f"last offset {offsets[-1]} != edge count {edge_count}", path=path, offset=offsets_at + 8 * n
        )

    targets = np.frombuffer(buf, dtype="<u4", count=edge_count, offset=targets_at).astype(np.int64)
    rows = [
        Row(v, targets[offsets[v]:offsets[v + 1]].tolist(), offset=targets_at + 4 * int(offsets[v]))
        for v in range(n)
    ]
    return n, rows


def format_csr(g: FixedDegreeGraph) -> bytes:
    degrees = g.degrees.astype(np.int64)
    offsets = np.zeros(g.n + 1, dtype="<u8")
    offsets[1:] = np.cumsum(degrees)
    targets = g.neighbors[g.valid_mask()].astype("<u4")
    header = HEADER.pack(CSR_MAGIC, VERSION, g.n, int(offsets[-1]))
    return header + offsets.tobytes() + targets.tobytes()


def write_csr(g: FixedDegreeGraph, path):
    with open(path, "wb") as f:
        f.write(format_csr(g))


# -----------------------------------------
# fixed-bin


def format_fixed(g: FixedDegreeGraph) -> bytes:
    header = HEADER.pack(FIXED_MAGIC, VERSION, g.n, g.k_max)
    return header + g.neighbors.astype("<u4").tobytes() + g.degrees.astype("<u4").tobytes()


def serialize(g: FixedDegreeGraph, path):
    with open(path, "wb") as f:
        f.write(format_fixed(g))


def parse_fixed(buf: bytes, path=None) -> FixedDegreeGraph:
    if len(buf) < HEADER.size:
        raise FormatError("short header", path=path, offset=len(buf))
    magic, version, n, k_max = HEADER.unpack_from(buf, 0)
    if magic != FIXED_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {FIXED_MAGIC!r}", path=path, offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path=path, offset=4)
    if n < 1 or k_max < 1:
        raise FormatError(f"header declares n={n}, k_max={k_max}", path=path, offset=8)

    slots_at = HEADER.size
    degrees_at = slots_at + 4 * n * k_max
    expected = degrees_at + 4 * n
    if len(buf) != expected:
        raise FormatError(
            f"file is {len(buf)} bytes, header implies {expected}", path=path, offset=min(len(buf), expected)
        )

    neighbors = np.frombuffer(buf, dtype="<u4", count=n * k_max, offset=slots_at).reshape(n, k_max)
    degrees = np.frombuffer(buf, dtype="<u4", count=n, offset=degrees_at)

    bad = np.nonzero(degrees > k_max)[0]
    if bad.size:
        v = int(bad[0])
        raise TopologyError(f"vertex {v}: degree {degrees[v]} exceeds k_max {k_max}", path=path, offset=degrees_at + 4 * v)

    mask = np.arange(k_max)[None, :] < degrees[:, None].astype(np.int64)
    stray = ~mask & (neighbors != INVALID)
    if stray.any():
        v, s = (int(x[0]) for x in np.nonzero(stray))
        raise TopologyError(f"vertex {v}: slot {s} beyond degree is not INVALID", path=path, offset=slots_at + 4 * (v * k_max + s))

    rows = [Row(v, neighbors[v, : degrees[v]].astype(np.int64).tolist(), offset=slots_at + 4 * v * k_max) for v in range(n)]
    result = graph_from_rows(n, rows, k_cap=k_max, path=path)
    return result.graph


# -----------------------------------------
# Front ends for other layouts

FrontEnd = Callable[[str], Tuple[int, List[Row]]]
_front_ends: Dict[str, FrontEnd] = {}


def register_front_end(name: str, parse: FrontEnd):
    if name in FORMATS:
        raise ContractViolation(f"'{name}' is a canonical format")
    _front_ends[name] = parse


def front_ends():
    return sorted(_front_ends)


def _parse_edgelist(path) -> Tuple[int, List[Row]]:
    """'u v' per line, '#' comments; a vertex's edges keep file order."""
    lists: Dict[int, List[int]] = {}
    first_line: Dict[int, int] = {}
    max_id = -1
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            try:
                if len(fields) != 2:
                    raise ValueError
                u, v = int(fields[0]), int(fields[1])
            except ValueError:
                raise FormatError(f"expected 'u v', got '{line}'", path=path, line=lineno)
            if u < 0 or v < 0:
                raise TopologyError(f"negative vertex ID in '{line}'", path=path, line=lineno)
            lists.setdefault(u, []).append(v)
            first_line.setdefault(u, lineno)
            max_id = max(max_id, u, v)
    rows = [Row(u, lists[u], line=first_line[u]) for u in sorted(lists)]
    return max_id + 1, rows


register_front_end("edgelist-text", _parse_edgelist)


# -----------------------------------------
# Entry points


def detect_format(path) -> str:
    with open(path, "rb") as f:
        head = f.read(4)
    if head == FIXED_MAGIC:
        return "fixed-bin"
    if head == CSR_MAGIC:
        return "csr-bin"
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for line in f:
            if line.strip() and not line.lstrip().startswith("#"):
                return "adjlist-text" if ":" in line else "edgelist-text"
    return "adjlist-text"


def read_rows(path, fmt: str, n: Optional[int] = None) -> Tuple[int, List[Row]]:
    if fmt == "adjlist-text":
        with open(path, "r", encoding="utf-8") as f:
            return parse_adjlist(f.read(), n, path)
    if fmt == "csr-bin":
        with open(path, "rb") as f:
            return parse_csr(f.read(), path)
    if fmt == "fixed-bin":
        with open(path, "rb") as f:
            g = parse_fixed(f.read(), path)
        return g.n, rows_of(g)
    if fmt in _front_ends:
        return _front_ends[fmt](path)
    raise ContractViolation(f"unknown graph format '{fmt}'")


def ingest(
    path, fmt: str = "auto", k_cap: Optional[int] = None, truncate=False, n: Optional[int] = None
) -> IngestResult:
    """
    Load a graph file.  'n' overrides the vertex count of text formats, and
    k_cap defaults to the file's own k_max (fixed-bin) or its largest degree.
    """
    if fmt == "auto":
        fmt = detect_format(path)

    if fmt == "fixed-bin" and k_cap is None:
        with open(path, "rb") as f:
            return IngestResult(parse_fixed(f.read(), path), 0, 0)

    file_n, rows = read_rows(path, fmt, n)
    if n is not None and n != file_n:
        raise FormatError(f"declared n={n} but file describes {file_n} vertices", path=path)
    result = graph_from_rows(file_n, rows, k_cap, truncate, path)
    log.info(f"ingested {fmt} graph {path}: n={result.graph.n}, edges={result.graph.edge_count}")
    return result


def convert_front_end(path, fmt: str, out_path):
    """Re-emit a front-end format as canonical adjlist-text."""
    n, rows = read_rows(path, fmt)
    write_adjlist(graph_from_rows(n, rows, path=path).graph, out_path)


def write_graph(g: FixedDegreeGraph, path, fmt: str = "fixed-bin"):
    if fmt == "fixed-bin":
        serialize(g, path)
    elif fmt == "csr-bin":
        write_csr(g, path)
    elif fmt == "adjlist-text":
        write_adjlist(g, path)
    else:
        raise ContractViolation(f"cannot write graph format '{fmt}'")


def load_graph(path, fmt: str = "auto") -> FixedDegreeGraph:
    return ingest(path, fmt).graph
