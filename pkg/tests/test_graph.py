"""Graph storage tests: parsing, normalization, transposition, binary IO."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperball.graph import (CsrGraph, GraphFormatError, GraphParseError,
                             NodeWeights, load_edge_list, load_weights,
                             read_binary, transpose, write_binary)

from conftest import random_graph


def text_graph(text: str) -> CsrGraph:
    return load_edge_list(io.StringIO(text))


class TestLoadEdgeList:
    def test_basic(self):
        g = text_graph("0 1\n1 2\n")
        assert (g.n, g.m) == (3, 2)
        assert list(g.successors_of(0)) == [1]

    def test_tab_separated(self):
        g = text_graph("0\t1\n1\t2\n")
        assert (g.n, g.m) == (3, 2)

    def test_declared_node_count(self):
        g = text_graph("#nodes 4\n")
        assert (g.n, g.m) == (4, 0)

    def test_duplicates_collapse(self):
        g = text_graph("0 1\n0 1\n1 0\n")
        assert g.m == 2

    def test_self_loops_kept(self):
        g = text_graph("0 0\n0 1\n")
        assert list(g.successors_of(0)) == [0, 1]

    def test_successors_sorted(self):
        g = text_graph("0 5\n0 2\n0 4\n#nodes 6\n")
        assert list(g.successors_of(0)) == [2, 4, 5]

    def test_comments_and_blanks_ignored(self):
        g = text_graph("# a comment\n\n0 1\n")
        assert (g.n, g.m) == (2, 1)

    def test_malformed_line_reports_number(self):
        with pytest.raises(GraphParseError, match="line 2"):
            text_graph("0 1\n0\n")

    def test_non_integer_reports_number(self):
        with pytest.raises(GraphParseError, match="line 3"):
            text_graph("0 1\n1 2\nx y\n")

    def test_negative_id_rejected(self):
        with pytest.raises(GraphParseError, match="line 1"):
            text_graph("-1 2\n")

    def test_id_beyond_declared_n_rejected(self):
        with pytest.raises(ValueError, match="declared"):
            text_graph("#nodes 2\n0 5\n")

    def test_empty_input(self):
        g = text_graph("")
        assert (g.n, g.m) == (0, 0)


class TestTranspose:
    def test_path(self):
        g = text_graph("0 1\n1 2\n")
        gt = transpose(g)
        assert list(gt.successors_of(1)) == [0]
        assert list(gt.successors_of(2)) == [1]
        assert list(gt.successors_of(0)) == []

    def test_symmetric_graph_fixed(self):
        g = text_graph("0 1\n1 0\n1 2\n2 1\n")
        assert transpose(g) == g

    def test_involution_and_degrees(self, rng):
        g = random_graph(rng, 1000, 3.0)
        gt = transpose(g)
        assert gt.n == g.n and gt.m == g.m
        assert transpose(gt) == g
        # In-degree sequence of g is the out-degree sequence of transpose.
        indeg = np.bincount(g.successors, minlength=g.n)
        assert np.array_equal(gt.out_degrees, indeg)

    @given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)),
                    max_size=120))
    @settings(max_examples=60, deadline=None)
    def test_involution_property(self, edges):
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        g = CsrGraph.from_edges(src, dst, n=31)
        assert transpose(transpose(g)) == g
        assert int(g.out_degrees.sum()) == g.m


class TestBinary:
    def test_round_trip(self, rng):
        g = random_graph(rng, 500, 4.0)
        buf = io.BytesIO()
        write_binary(g, buf)
        assert read_binary(io.BytesIO(buf.getvalue())) == g

    def test_file_size_formula(self, rng):
        # Header is magic(4) + n u64 + m u64, then offsets and successors.
        g = random_graph(rng, 1000, 5.0)
        buf = io.BytesIO()
        write_binary(g, buf)
        assert len(buf.getvalue()) == 20 + 8 * (g.n + 1) + 8 * g.m

    def test_bad_magic(self):
        g = text_graph("0 1\n")
        buf = io.BytesIO()
        write_binary(g, buf)
        data = bytearray(buf.getvalue())
        data[1] = ord("X")
        with pytest.raises(GraphFormatError):
            read_binary(io.BytesIO(bytes(data)))

    def test_truncation(self):
        g = text_graph("0 1\n1 2\n")
        buf = io.BytesIO()
        write_binary(g, buf)
        with pytest.raises(GraphFormatError):
            read_binary(io.BytesIO(buf.getvalue()[:-4]))

    def test_offset_monotonicity_enforced(self):
        g = text_graph("0 1\n1 2\n")
        buf = io.BytesIO()
        write_binary(g, buf)
        data = bytearray(buf.getvalue())
        # Corrupt offsets[1] to be larger than m.
        data[20 + 8:20 + 16] = (99).to_bytes(8, "little")
        with pytest.raises(GraphFormatError):
            read_binary(io.BytesIO(bytes(data)))

    def test_load_determinism(self, tmp_path):
        text = "2 0\n0 1\n1 2\n0 2\n"
        out1 = tmp_path / "a.bin"
        out2 = tmp_path / "b.bin"
        write_binary(text_graph(text), out1)
        write_binary(text_graph(text), out2)
        assert out1.read_bytes() == out2.read_bytes()

    def test_mmap_mode(self, tmp_path, rng):
        g = random_graph(rng, 200, 3.0)
        path = tmp_path / "g.bin"
        write_binary(g, path)
        mapped = read_binary(path, mmap=True)
        assert mapped == g
        # Successor lists come straight out of the mapping.
        assert list(mapped.successors_of(5)) == list(g.successors_of(5))


class TestFromEdges:
    def test_id_validation(self):
        with pytest.raises(ValueError):
            CsrGraph.from_edges([0, 7], [1, 1], n=3)
        with pytest.raises(ValueError):
            CsrGraph.from_edges([-1], [0])

    def test_immutable(self):
        g = text_graph("0 1\n")
        with pytest.raises(ValueError):
            g.offsets[0] = 5


class TestWeights:
    def test_parse(self):
        w = load_weights(io.StringIO("0\t3\n2\t5\n"), n=4)
        assert list(w.values) == [3, 1, 5, 1]
        assert w.max_weight == 5
        assert w.total == 10

    def test_invalid_weight(self):
        with pytest.raises(ValueError):
            load_weights(io.StringIO("0 0\n"), n=2)

    def test_node_out_of_range(self):
        with pytest.raises(ValueError):
            load_weights(io.StringIO("9 2\n"), n=3)

    def test_malformed_line(self):
        with pytest.raises(GraphParseError, match="line 1"):
            load_weights(io.StringIO("0 1 2\n"), n=2)

    def test_ones(self):
        w = NodeWeights.ones(5)
        assert w.total == 5 and w.max_weight == 1
