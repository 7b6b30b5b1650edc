"""Exact ground truth for every supported centrality, one BFS per node.

Distances *to* x are forward BFS distances from x on the transpose; the
transposition goes through the same code path the estimation engine uses,
so the two directions cannot drift apart. Sums are accumulated per node in
strictly ascending distance with the same float operations as the engine's
telescoping path, which makes the two independent computations comparable
bit for bit, not just approximately.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .centrality import DiscountSpec
from .graph import CsrGraph, NodeWeights, transpose

DEFAULT_BUDGET = 10_000_000_000  # n*m ceiling; n BFS passes cost O(n(n+m))


class BudgetExceededError(RuntimeError):
    """Refusal to start an exact computation that would run for too long."""


@dataclass
class ExactCentralities:
    """Exact per-node sums, shaped like a converged CentralityAccumulator."""

    sum_dist: np.ndarray
    sum_recip: np.ndarray
    coreach: np.ndarray
    discounted: dict[str, np.ndarray] = field(default_factory=dict)
    converged: bool = True


def exact_all(g: CsrGraph, discounts: Sequence[DiscountSpec] = (),
              weights: NodeWeights | None = None,
              budget: int | None = DEFAULT_BUDGET,
              workers: int = 1) -> ExactCentralities:
    """Exact incoming-distance sums for every node of g.

    Refuses (BudgetExceededError) when n*m exceeds the budget; pass
    budget=None to override. Sources are independent, so workers > 1
    splits them across threads with disjoint result slots; results do not
    depend on the worker count.
    """
    n = g.n
    cost = n * g.m
    if budget is not None and cost > budget:
        raise BudgetExceededError(
            f"exact computation needs {n} BFS passes over {g.m} arcs "
            f"(n*m = {cost:.2e} > budget {budget:.2e}); raise the budget "
            f"to force it")
    if weights is not None and len(weights) != n:
        raise ValueError(f"weights length {len(weights)} != node count {n}")
    w = (weights or NodeWeights.ones(n)).values.astype(np.float64)

    gt = transpose(g)
    result = ExactCentralities(
        sum_dist=np.zeros(n, dtype=np.float64),
        sum_recip=np.zeros(n, dtype=np.float64),
        coreach=np.zeros(n, dtype=np.float64),
        discounted={spec.name: np.zeros(n, dtype=np.float64)
                    for spec in discounts})

    workers = max(1, min(workers, n or 1))
    if workers == 1:
        _exact_sources(gt, w, discounts, result, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_exact_sources, gt, w, discounts, result,
                                   int(lo), int(hi))
                       for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            for future in futures:
                future.result()
    return result


def _exact_sources(gt: CsrGraph, w: np.ndarray,
                   discounts: Sequence[DiscountSpec],
                   out: ExactCentralities, lo: int, hi: int) -> None:
    """BFS from sources [lo, hi) on the transposed graph into out's slots."""
    n = gt.n
    dist = np.empty(n, dtype=np.int64)
    fifo = np.empty(n, dtype=np.int64)
    for x in range(lo, hi):
        ecc = _kernels.bfs_distances(gt.offsets, gt.successors, x, dist, fifo)
        counts = np.empty(ecc + 1, dtype=np.float64)
        _kernels.distance_weight_histogram(dist, w, ecc, counts)
        out.coreach[x] = counts.sum()
        sd = 0.0
        sr = 0.0
        for t in range(1, ecc + 1):
            c = counts[t]
            if c == 0.0:
                continue
            sd += t * c
            sr += c / t
        out.sum_dist[x] = sd
        out.sum_recip[x] = sr
        for spec in discounts:
            acc = 0.0
            for t in range(1, ecc + 1):
                c = counts[t]
                if c == 0.0:
                    continue
                acc += spec.contribution(t, c)
            out.discounted[spec.name][x] = acc


@dataclass
class ComparisonReport:
    """Per-node errors of an estimate against exact values, plus quartiles.

    rel_errors is NaN where the exact value is 0; those nodes are reported
    through abs_errors instead (NaN elsewhere). Quartile/mean/std summarize
    the relative errors only.
    """

    rel_errors: np.ndarray
    abs_errors: np.ndarray
    q1: float
    median: float
    q3: float
    mean: float
    std: float
    n_zero_exact: int

    def summary_items(self) -> list[tuple[str, float]]:
        return [("q1", self.q1), ("median", self.median), ("q3", self.q3),
                ("mean", self.mean), ("std", self.std),
                ("zero_exact", float(self.n_zero_exact))]


def compare(estimated: np.ndarray, exact: np.ndarray) -> ComparisonReport:
    """Relative errors |est - exact| / exact with zero-exact nodes set aside."""
    estimated = np.asarray(estimated, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    if estimated.shape != exact.shape:
        raise ValueError(
            f"shape mismatch: {estimated.shape} vs {exact.shape}")
    nonzero = exact != 0
    rel = np.full(exact.shape, np.nan)
    np.divide(np.abs(estimated - exact), np.abs(exact), out=rel,
              where=nonzero)
    abs_err = np.full(exact.shape, np.nan)
    abs_err[~nonzero] = np.abs(estimated[~nonzero])
    finite = rel[nonzero]
    if finite.size:
        q1, median, q3 = np.quantile(finite, [0.25, 0.5, 0.75])
        mean = float(finite.mean())
        std = float(finite.std(ddof=1)) if finite.size > 1 else 0.0
    else:
        q1 = median = q3 = mean = std = float("nan")
    return ComparisonReport(rel_errors=rel, abs_errors=abs_err,
                            q1=float(q1), median=float(median), q3=float(q3),
                            mean=mean, std=std,
                            n_zero_exact=int((~nonzero).sum()))
