import struct

import numpy as np

from annreorder.adapter import (
    CSR_MAGIC,
    HEADER,
    VERSION,
    convert_front_end,
    detect_format,
    format_adjlist,
    format_csr,
    format_fixed,
    front_ends,
    ingest,
    load_graph,
    register_front_end,
    write_graph,
)
from annreorder.assertions import assert_arrays_equal, assert_equal, assert_raises
from annreorder.exceptions import ContractViolation, FormatError, TopologyError
from annreorder.graph import INVALID, FixedDegreeGraph
from annreorder.test_utils import random_graph


def write_text(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def write_bytes(path, buf):
    with open(path, "wb") as f:
        f.write(buf)


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def csr_bytes(n, offsets, targets):
    return (
        HEADER.pack(CSR_MAGIC, VERSION, n, len(targets))
        + np.asarray(offsets, dtype="<u8").tobytes()
        + np.asarray(targets, dtype="<u4").tobytes()
    )


def expect_error(fn, exc_type=FormatError, offset=None, line=None):
    try:
        fn()
    except exc_type as e:
        if offset is not None:
            assert_equal(e.offset, offset, str(e))
        if line is not None:
            assert_equal(e.line, line, str(e))
        return
    raise AssertionError(f"expected {exc_type.__name__}")


TRIANGLE_ROWS = [[1, 2], [0], [0]]


# -----------------------------------------
# canonical formats


def t_adjlist_small(fix):
    with fix.temp_dir() as td:
        write_text(td.file("g.txt"), "0: 1 2\n1: 0\n\n2: 0\n")
        result = ingest(td.file("g.txt"), "adjlist-text", k_cap=4)
        assert_equal(result.graph, FixedDegreeGraph.from_rows(3, 4, TRIANGLE_ROWS))
        assert_equal((result.dropped_edges, result.truncated_rows), (0, 0))
        assert_arrays_equal(result.graph.neighbors[1], [0, INVALID, INVALID, INVALID])


def t_csr_matches_adjlist(fix):
    with fix.temp_dir() as td:
        write_bytes(td.file("g.csr"), csr_bytes(3, [0, 2, 3, 4], [1, 2, 0, 0]))
        assert_equal(detect_format(td.file("g.csr")), "csr-bin")
        g = ingest(td.file("g.csr"), k_cap=4).graph
        assert_equal(g, FixedDegreeGraph.from_rows(3, 4, TRIANGLE_ROWS))


def t_single_vertex_layout(fix):
    g = FixedDegreeGraph.from_rows(1, 3, [[]])
    expected = struct.pack("<4sIII", b"FDGX", 1, 1, 3) + b"\xff" * 12 + b"\0" * 4
    assert_equal(format_fixed(g), expected)
    with fix.temp_dir() as td:
        write_graph(g, td.file("g.bin"))
        assert_equal(read_bytes(td.file("g.bin")), expected)
        assert_equal(load_graph(td.file("g.bin")), g)


def t_row_order_kept(fix):
    with fix.temp_dir() as td:
        write_text(td.file("g.txt"), "0: 2 1\n1: 2 0\n")
        g = ingest(td.file("g.txt")).graph
        assert_arrays_equal(g.row(0), [2, 1])
        assert_arrays_equal(g.row(1), [2, 0])
        # vertex 2 has no line of its own
        assert_equal((g.n, int(g.degrees[2])), (3, 0))


def t_byte_round_trips(fix):
    g = random_graph(200, 12, fix.seed + 3)
    with fix.temp_dir() as td:
        for fmt, encode in (("fixed-bin", format_fixed), ("csr-bin", format_csr)):
            path = td.file(f"g.{fmt}")
            write_bytes(path, encode(g))
            back = ingest(path, fmt).graph
            assert_equal(encode(back), encode(g), fmt)

        path = td.file("g.txt")
        write_graph(g, path, "adjlist-text")
        back = ingest(path, "adjlist-text", k_cap=g.k_max, n=g.n).graph
        assert_equal(back, g)
        assert_equal(format_adjlist(back), format_adjlist(g))


def t_formats_agree_on_edges(fix):
    g = random_graph(150, 9, 4, min_degree=1)
    with fix.temp_dir() as td:
        for fmt in ("fixed-bin", "csr-bin", "adjlist-text"):
            write_graph(g, td.file("g"), fmt)
            assert_equal(detect_format(td.file("g")), fmt)
            assert_equal(load_graph(td.file("g")).edge_set(), g.edge_set(), fmt)
        assert_raises(lambda: write_graph(g, td.file("g"), "graphml"), ContractViolation)


# -----------------------------------------
# damage and bad topology


def t_bad_magic(fix):
    g = FixedDegreeGraph.from_rows(2, 1, [[1], [0]])
    with fix.temp_dir() as td:
        buf = bytearray(format_fixed(g))
        buf[0:4] = b"FDGY"
        write_bytes(td.file("g.bin"), bytes(buf))
        expect_error(lambda: ingest(td.file("g.bin"), "fixed-bin"), offset=0)

        write_bytes(td.file("g.bin"), format_fixed(g)[:-2])
        expect_error(lambda: ingest(td.file("g.bin"), "fixed-bin"), offset=len(format_fixed(g)) - 2)


def t_fixed_damage(fix):
    g = FixedDegreeGraph.from_rows(2, 2, [[1], [0]])
    slots_at = HEADER.size
    degrees_at = slots_at + 4 * 4
    with fix.temp_dir() as td:
        buf = bytearray(format_fixed(g))
        struct.pack_into("<I", buf, degrees_at + 4, 3)
        write_bytes(td.file("g.bin"), bytes(buf))
        expect_error(lambda: ingest(td.file("g.bin")), TopologyError, offset=degrees_at + 4)

        buf = bytearray(format_fixed(g))
        struct.pack_into("<I", buf, slots_at + 4, 0)
        write_bytes(td.file("g.bin"), bytes(buf))
        expect_error(lambda: ingest(td.file("g.bin")), TopologyError, offset=slots_at + 4)

        buf = bytearray(format_fixed(g))
        struct.pack_into("<I", buf, slots_at, 0)
        write_bytes(td.file("g.bin"), bytes(buf))
        expect_error(lambda: ingest(td.file("g.bin")), TopologyError)


def t_csr_damage(fix):
    with fix.temp_dir() as td:
        write_bytes(td.file("g.csr"), csr_bytes(3, [1, 2, 3, 4], [1, 2, 0, 0]))
        expect_error(lambda: ingest(td.file("g.csr"), "csr-bin"), offset=HEADER.size)

        write_bytes(td.file("g.csr"), csr_bytes(3, [0, 3, 2, 4], [1, 2, 0, 0]))
        expect_error(lambda: ingest(td.file("g.csr"), "csr-bin"), offset=HEADER.size + 16)

        write_bytes(td.file("g.csr"), csr_bytes(3, [0, 2, 3, 4], [1, 2, 0, 2]))
        expect_error(lambda: ingest(td.file("g.csr"), "csr-bin"), TopologyError)


def t_adjlist_damage(fix):
    with fix.temp_dir() as td:
        cases = [
            ("0: 0\n", TopologyError, 1),
            ("0: 1 1\n1: 0\n", TopologyError, 1),
            ("0: 1\n1: 0\n1: 0\n", FormatError, 3),
            ("1: 0\n0: 1\n", FormatError, 2),
            ("0: 1\nzero: 1\n", FormatError, 2),
            ("0 1\n", FormatError, 1),
        ]
        for text, exc_type, line in cases:
            write_text(td.file("g.txt"), text)
            expect_error(lambda: ingest(td.file("g.txt"), "adjlist-text"), exc_type, line=line)

        write_text(td.file("g.txt"), "0: 5\n")
        expect_error(lambda: ingest(td.file("g.txt"), "adjlist-text", n=3), TopologyError, line=1)


def t_degree_cap(fix):
    with fix.temp_dir() as td:
        write_text(td.file("g.txt"), "0: 1 2 3\n1: 0\n2: 3 0 1\n3:\n")
        expect_error(lambda: ingest(td.file("g.txt"), k_cap=2), TopologyError, line=1)

        result = ingest(td.file("g.txt"), k_cap=2, truncate=True)
        assert_equal((result.dropped_edges, result.truncated_rows), (2, 2))
        assert_arrays_equal(result.graph.row(0), [1, 2])
        assert_arrays_equal(result.graph.row(2), [3, 0])
        result.graph.check()


# -----------------------------------------
# front ends


def t_edgelist_front_end(fix):
    assert "edgelist-text" in front_ends()
    with fix.temp_dir() as td:
        write_text(td.file("g.el"), "# source target\n0 2\n2 0\n0 1  # second edge of 0\n")
        assert_equal(detect_format(td.file("g.el")), "edgelist-text")
        g = ingest(td.file("g.el")).graph
        assert_arrays_equal(g.row(0), [2, 1])
        assert_arrays_equal(g.row(2), [0])
        assert_equal(int(g.degrees[1]), 0)

        convert_front_end(td.file("g.el"), "edgelist-text", td.file("g.txt"))
        with open(td.file("g.txt"), encoding="utf-8") as f:
            assert_equal(f.read(), "0: 2 1\n1:\n2: 0\n")

        write_text(td.file("bad.el"), "0 1 2\n")
        expect_error(lambda: ingest(td.file("bad.el"), "edgelist-text"), line=1)


def t_front_end_registry(fix):
    assert_raises(lambda: register_front_end("csr-bin", lambda path: (0, [])), ContractViolation)
    with fix.temp_dir() as td:
        write_text(td.file("g"), "x")
        assert_raises(lambda: ingest(td.file("g"), "graphml"), ContractViolation)


def register(tests):
    tests.register_batch(
        "/adapter/",
        [
            ("adjlist/small", t_adjlist_small),
            ("adjlist/row-order-kept", t_row_order_kept),
            ("adjlist/damage", t_adjlist_damage),
            ("adjlist/degree-cap", t_degree_cap),
            ("csr/matches-adjlist", t_csr_matches_adjlist),
            ("csr/damage", t_csr_damage),
            ("fixed/single-vertex-layout", t_single_vertex_layout),
            ("fixed/bad-magic", t_bad_magic),
            ("fixed/damage", t_fixed_damage),
            ("byte-round-trips", t_byte_round_trips),
            ("formats-agree-on-edges", t_formats_agree_on_edges),
            ("front-end/edgelist", t_edgelist_front_end),
            ("front-end/registry", t_front_end_registry),
        ],
    )
