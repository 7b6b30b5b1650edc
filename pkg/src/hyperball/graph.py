"""Immutable directed graphs in compressed-sparse-row form.

Nodes are dense integers 0..n-1. Successor lists are sorted ascending with
duplicate arcs removed; self-loops are kept. The on-disk binary layout is
fixed-width little-endian so a mapped file can be scanned without a decode
pass: magic "CSR1", n u64, m u64, (n+1) u64 offsets, m u64 successors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BINARY_MAGIC = b"CSR1"
HEADER_BYTES = 20


class GraphParseError(ValueError):
    """Malformed edge-list text; message carries the offending line number."""


class GraphFormatError(ValueError):
    """Malformed binary graph file."""


class CsrGraph:
    """Offsets + successor arrays; immutable and safe for concurrent reads."""

    __slots__ = ("n", "m", "offsets", "successors")

    def __init__(self, offsets: np.ndarray, successors: np.ndarray):
        offsets = np.asarray(offsets, dtype=np.int64)
        successors = np.asarray(successors, dtype=np.int64)
        if offsets.ndim != 1 or offsets.shape[0] < 1:
            raise ValueError("offsets must be a 1-d array of length n + 1")
        n = offsets.shape[0] - 1
        m = successors.shape[0]
        if offsets[0] != 0 or offsets[-1] != m or np.any(np.diff(offsets) < 0):
            raise ValueError("offsets must grow monotonically from 0 to m")
        if m and (successors.min() < 0 or successors.max() >= n):
            raise ValueError("successor id out of range")
        self.n = n
        self.m = m
        self.offsets = offsets
        self.successors = successors
        for arr in (self.offsets, self.successors):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, src, dst, n: int | None = None) -> "CsrGraph":
        """Build a normalized graph from parallel source/target id arrays.

        n defaults to 1 + the largest id seen; duplicate arcs collapse,
        successor lists come out sorted.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if src.size and (src.min() < 0 or dst.min() < 0):
            raise ValueError("node ids must be non-negative")
        seen = int(max(src.max(), dst.max())) + 1 if src.size else 0
        if n is None:
            n = seen
        elif seen > n:
            raise ValueError(f"node id {seen - 1} >= declared node count {n}")
        if src.size:
            order = np.lexsort((dst, src))
            src = src[order]
            dst = dst[order]
            keep = np.ones(src.shape[0], dtype=bool)
            keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            src = src[keep]
            dst = dst[keep]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(offsets, dst)

    def successors_of(self, v: int) -> np.ndarray:
        return self.successors[self.offsets[v]:self.offsets[v + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CsrGraph):
            return NotImplemented
        return (self.n == other.n and self.m == other.m
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.successors, other.successors))

    def __repr__(self) -> str:
        return f"CsrGraph(n={self.n}, m={self.m})"


_NODES_HEADER = "#nodes"


def load_edge_list(source) -> CsrGraph:
    """Parse "u v" lines (tab or space separated, 0-based ids) into a graph.

    Lines starting with '#' are comments; a "#nodes N" comment declares the
    node count, otherwise it is 1 + the largest id seen. Duplicate arcs are
    collapsed and self-loops kept.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh)
    declared_n = None
    srcs: list[int] = []
    dsts: list[int] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if fields and fields[0] == "nodes":
                if len(fields) != 2 or not fields[1].isdigit():
                    raise GraphParseError(
                        f"line {lineno}: malformed #nodes header: {line!r}")
                declared_n = int(fields[1])
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphParseError(
                f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphParseError(
                f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphParseError(f"line {lineno}: negative node id in {line!r}")
        srcs.append(u)
        dsts.append(v)
    return CsrGraph.from_edges(np.array(srcs, dtype=np.int64),
                               np.array(dsts, dtype=np.int64), n=declared_n)


def transpose(g: CsrGraph) -> CsrGraph:
    """Graph with every arc reversed; an involution on normalized graphs."""
    if g.m == 0:
        return CsrGraph(np.zeros(g.n + 1, dtype=np.int64),
                        np.zeros(0, dtype=np.int64))
    src_of_arc = np.repeat(np.arange(g.n, dtype=np.int64), g.out_degrees)
    order = np.argsort(g.successors, kind="stable")
    new_succ = src_of_arc[order]
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(g.successors, minlength=g.n), out=offsets[1:])
    return CsrGraph(offsets, new_succ)


def write_binary(g: CsrGraph, sink) -> None:
    """Write the fixed-width binary layout; deterministic for equal graphs."""
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as fh:
            write_binary(g, fh)
        return
    sink.write(BINARY_MAGIC)
    sink.write(struct.pack("<QQ", g.n, g.m))
    sink.write(g.offsets.astype("<u8").tobytes())
    sink.write(g.successors.astype("<u8").tobytes())


def read_binary(source, mmap: bool = False) -> CsrGraph:
    """Read a binary graph; mmap=True maps the arrays instead of copying."""
    if isinstance(source, (str, Path)):
        if mmap:
            return _read_binary_mmap(Path(source))
        with open(source, "rb") as fh:
            return read_binary(fh)
    data = source.read()
    if len(data) < HEADER_BYTES or data[:4] != BINARY_MAGIC:
        raise GraphFormatError("bad graph magic")
    n, m = struct.unpack("<QQ", data[4:HEADER_BYTES])
    expected = HEADER_BYTES + 8 * (n + 1) + 8 * m
    if len(data) != expected:
        raise GraphFormatError(
            f"file length {len(data)} != expected {expected} for n={n}, m={m}")
    offsets = np.frombuffer(data, dtype="<u8", count=n + 1,
                            offset=HEADER_BYTES).astype(np.int64)
    successors = np.frombuffer(data, dtype="<u8", count=m,
                               offset=HEADER_BYTES + 8 * (n + 1)).astype(np.int64)
    try:
        return CsrGraph(offsets, successors)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def _read_binary_mmap(path: Path) -> CsrGraph:
    size = path.stat().st_size
    with open(path, "rb") as fh:
        head = fh.read(HEADER_BYTES)
    if len(head) < HEADER_BYTES or head[:4] != BINARY_MAGIC:
        raise GraphFormatError("bad graph magic")
    n, m = struct.unpack("<QQ", head[4:])
    expected = HEADER_BYTES + 8 * (n + 1) + 8 * m
    if size != expected:
        raise GraphFormatError(
            f"file length {size} != expected {expected} for n={n}, m={m}")
    offsets = np.memmap(path, dtype="<u8", mode="r", offset=HEADER_BYTES,
                        shape=(n + 1,))
    successors = np.memmap(path, dtype="<u8", mode="r",
                           offset=HEADER_BYTES + 8 * (n + 1), shape=(m,))
    # int64 views keep the numba kernels happy; on little-endian hosts the
    # reinterpretation is free and still backed by the mapping.
    try:
        return CsrGraph(offsets.view(np.int64), successors.view(np.int64))
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


@dataclass(frozen=True)
class NodeWeights:
    """Positive integer node weights in [1, max_weight]."""

    values: np.ndarray
    max_weight: int
    total: int

    @classmethod
    def from_values(cls, values) -> "NodeWeights":
        values = np.asarray(values, dtype=np.int64)
        if values.size and values.min() < 1:
            raise ValueError("node weights must be >= 1")
        values.setflags(write=False)
        return cls(values, int(values.max()) if values.size else 1,
                   int(values.sum()))

    @classmethod
    def ones(cls, n: int) -> "NodeWeights":
        return cls.from_values(np.ones(n, dtype=np.int64))

    def __len__(self) -> int:
        return self.values.shape[0]


def load_weights(source, n: int | None = None) -> NodeWeights:
    """Parse "node<TAB>weight" lines; missing nodes default to weight 1."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_weights(fh, n=n)
    pairs: dict[int, int] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphParseError(
                f"line {lineno}: expected 'node weight', got {line!r}")
        try:
            node, weight = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphParseError(
                f"line {lineno}: non-integer field in {line!r}") from None
        if node < 0:
            raise GraphParseError(f"line {lineno}: negative node id")
        pairs[node] = weight
    if n is None:
        n = 1 + max(pairs) if pairs else 0
    values = np.ones(n, dtype=np.int64)
    for node, weight in pairs.items():
        if node >= n:
            raise ValueError(f"weight given for node {node} >= n = {n}")
        values[node] = weight
    return NodeWeights.from_values(values)
