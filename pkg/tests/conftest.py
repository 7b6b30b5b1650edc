"""Shared graph builders and reference helpers for the test suite."""

from collections import deque

import numpy as np
import pytest

from hyperball import CsrGraph


def random_graph(rng: np.random.Generator, n: int, avg_degree: float) -> CsrGraph:
    """Uniform random directed graph with about n*avg_degree arcs."""
    m = int(round(n * avg_degree))
    if n == 0 or m == 0:
        return CsrGraph(np.zeros(n + 1, dtype=np.int64),
                        np.zeros(0, dtype=np.int64))
    src = rng.integers(0, n, size=m)
    dst = rng.integers(0, n, size=m)
    return CsrGraph.from_edges(src, dst, n=n)


def random_dag(rng: np.random.Generator, n: int, avg_degree: float) -> CsrGraph:
    m = int(round(n * avg_degree))
    if n < 2 or m == 0:
        return CsrGraph(np.zeros(n + 1, dtype=np.int64),
                        np.zeros(0, dtype=np.int64))
    src = rng.integers(0, n, size=2 * m)
    dst = rng.integers(0, n, size=2 * m)
    forward = src < dst
    return CsrGraph.from_edges(src[forward], dst[forward], n=n)


def disconnected_graph(rng: np.random.Generator, n: int,
                       avg_degree: float) -> CsrGraph:
    """Two islands with no arcs between them (plus possible isolated nodes)."""
    half = n // 2
    parts = []
    for lo, hi in ((0, half), (half, n)):
        size = hi - lo
        m = int(round(size * avg_degree))
        if size > 0 and m > 0:
            parts.append(lo + rng.integers(0, size, size=(2, m)))
    if not parts:
        return CsrGraph(np.zeros(n + 1, dtype=np.int64),
                        np.zeros(0, dtype=np.int64))
    arcs = np.hstack(parts)
    return CsrGraph.from_edges(arcs[0], arcs[1], n=n)


def path_graph(k: int) -> CsrGraph:
    src = np.arange(k - 1, dtype=np.int64)
    return CsrGraph.from_edges(src, src + 1, n=k)


def cycle_graph(k: int) -> CsrGraph:
    src = np.arange(k, dtype=np.int64)
    return CsrGraph.from_edges(src, (src + 1) % k, n=k)


def star_graph(k: int) -> CsrGraph:
    """Center 0 pointing at k leaves."""
    src = np.zeros(k, dtype=np.int64)
    dst = np.arange(1, k + 1, dtype=np.int64)
    return CsrGraph.from_edges(src, dst, n=k + 1)


def complete_graph(k: int) -> CsrGraph:
    src, dst = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    keep = src != dst
    return CsrGraph.from_edges(src[keep], dst[keep], n=k)


def successor_lists(g: CsrGraph) -> list[list[int]]:
    return [list(g.successors_of(v)) for v in range(g.n)]


def py_bfs_distances(succ: list[list[int]], source: int) -> dict[int, int]:
    """Plain-python BFS, the low-tech reference the fast paths answer to."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
