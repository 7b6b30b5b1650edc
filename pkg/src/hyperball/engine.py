"""Iterative ball-growth engine over per-node mergeable counters.

One counter per node is seeded with the node itself (or its weight
replicas); each iteration replaces every counter with the union of its own
value and its successors' values, so after t iterations counter v holds the
ball of radius t around v. The loop stops exactly when no counter changes —
any earlier cutoff can be arbitrarily wrong on adversarial graphs.

Run the engine on the transpose when the quantity of interest is distances
*to* each node (the usual convention for centralities); run it on the graph
itself for outgoing distances.

Two counter backends share the same iteration machinery:

- "probabilistic": HyperLogLog register rows (the production path). During
  a run registers are held one byte wide for speed; the bit-packed
  CounterArray form is used for checkpoints and any at-rest state.
- "exact": one bitset per node holding the true ball, making every
  estimate exact. This turns the engine into a breadth-first oracle for
  validation, and is the reference the probabilistic path is tested against.

Within an iteration the node range is split into contiguous chunks handled
by worker threads. Every write is owned by exactly one worker and no
cross-node reduction order exists, so results are bit-identical for any
worker count.
"""

from __future__ import annotations

import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from . import _kernels
from .graph import CsrGraph, NodeWeights
from .hll import (POW2NEG, CounterArray, CounterParams, alpha, hash_items,
                  register_values)

CHECKPOINT_MAGIC = b"HBCK"
CHECKPOINT_VERSION = 1

BACKEND_PROBABILISTIC = "probabilistic"
BACKEND_EXACT = "exact"
_BACKEND_ALIASES = {"hll": BACKEND_PROBABILISTIC}


class ConvergenceError(RuntimeError):
    """Safety-cap overrun; reports the iteration and open counter count."""

    def __init__(self, t: int, num_changed: int):
        super().__init__(
            f"max_iterations reached at t={t} with {num_changed} counters "
            f"still changing")
        self.t = t
        self.num_changed = num_changed


class BallObserver:
    """Contract for per-iteration ball-size consumers.

    on_step(t, old, new) fires once per iteration with the estimate arrays
    before and after the step; entry v is the (v, t) notification, and
    new[v] - old[v] estimates the number of nodes at distance exactly t
    from v. Nodes skipped as stable get old[v] == new[v]. on_converged
    fires once, after the final iteration, with the settled estimates.
    Both arrays must be treated as read-only.
    """

    def on_step(self, t: int, old_estimates: np.ndarray,
                new_estimates: np.ndarray) -> None:
        pass

    def on_converged(self, final_estimates: np.ndarray) -> None:
        pass


@dataclass
class HyperBallConfig:
    params: CounterParams = field(default_factory=lambda: CounterParams(b=6))
    weights: NodeWeights | None = None
    backend: str = BACKEND_PROBABILISTIC
    workers: int = 1
    max_iterations: int | None = None
    skip_stable_nodes: bool = True
    progress: IO[str] | None = None

    def __post_init__(self) -> None:
        self.backend = _BACKEND_ALIASES.get(self.backend, self.backend)
        if self.backend not in (BACKEND_PROBABILISTIC, BACKEND_EXACT):
            raise ValueError(f"unknown counter backend {self.backend!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _replica_items(n: int, weights: NodeWeights | None):
    """(node id, replica index) pairs seeding the counters.

    Unweighted nodes contribute the single item (v, 1); a node of weight w
    contributes (v, 1) .. (v, w), so its initial ball estimates w.
    """
    if weights is None:
        nodes = np.arange(n, dtype=np.uint64)
        replicas = np.ones(n, dtype=np.uint64)
        return nodes, replicas
    w = weights.values
    if len(weights) != n:
        raise ValueError(f"weights length {len(weights)} != node count {n}")
    if n and w.min() < 1:
        raise ValueError("node weights must be >= 1")
    nodes = np.repeat(np.arange(n, dtype=np.int64), w).astype(np.uint64)
    starts = np.concatenate(([0], np.cumsum(w)[:-1]))
    replicas = (np.arange(w.sum(), dtype=np.int64)
                - np.repeat(starts, w) + 1).astype(np.uint64)
    return nodes, replicas


def _check_weighted_width(params: CounterParams, weights: NodeWeights) -> None:
    """Fail fast when registers are provably too narrow for the replica count.

    A stream of W items drives register values up to about log2(W), so the
    register ceiling 2^width - 1 must cover log2(total weight). Totals
    beyond 2^32 therefore need width 6 (width 5 saturates at 31).
    """
    total = max(int(weights.total), 2)
    needed = math.log2(total)
    if params.saturation < math.ceil(needed):
        raise ValueError(
            f"register_width={params.register_width} saturates at "
            f"{params.saturation}, below log2(total weight) = {needed:.1f}; "
            f"register_width 6 (or wider) is required for this weighting")


class _ProbabilisticBackend:
    """Byte-wide HLL register rows plus the constants the kernel needs."""

    kind = BACKEND_PROBABILISTIC

    def __init__(self, n: int, params: CounterParams,
                 cur: np.ndarray | None = None):
        self.params = params
        p = params.p
        self.cur = np.zeros((n, p), dtype=np.uint8) if cur is None else cur
        self.nxt = np.empty_like(self.cur)
        self.alpha_p2 = alpha(p) * p * p
        self.lc_cut = 2.5 * p
        self.p_float = float(p)

    def seed(self, weights: NodeWeights | None, est: np.ndarray) -> None:
        n = self.cur.shape[0]
        nodes, replicas = _replica_items(n, weights)
        hashes = hash_items(nodes, replicas, self.params.seed)
        idx, rho = register_values(hashes, self.params)
        _kernels.scatter_max(self.cur, nodes.astype(np.int64), idx, rho)
        if n:
            _kernels.estimate_register_rows(
                self.cur, 0, n, POW2NEG, self.alpha_p2, self.lc_cut,
                self.p_float, est)

    def union_range(self, lo, hi, offsets, successors, changed_prev,
                    changed_now, est, new_est, skip_stable) -> int:
        return _kernels.hll_union_range(
            lo, hi, offsets, successors, self.cur, self.nxt, changed_prev,
            changed_now, est, new_est, POW2NEG, self.alpha_p2, self.lc_cut,
            self.p_float, skip_stable)

    def swap(self) -> None:
        self.cur, self.nxt = self.nxt, self.cur

    def counters(self) -> CounterArray:
        return CounterArray.from_dense(self.cur, self.params)


class _ExactBackend:
    """True ball sets, one packed bitset row per node; estimates are exact."""

    kind = BACKEND_EXACT

    def __init__(self, n: int, params: CounterParams,
                 weights: NodeWeights | None,
                 cur: np.ndarray | None = None):
        self.params = params
        self.n = n
        self.row_bytes = (n + 7) // 8
        self.cur = (np.zeros((n, self.row_bytes), dtype=np.uint8)
                    if cur is None else cur)
        self.nxt = np.empty_like(self.cur)
        self.weights = (weights or NodeWeights.ones(n)).values

    def seed(self, weights: NodeWeights | None, est: np.ndarray) -> None:
        n = self.n
        if n == 0:
            return
        v = np.arange(n)
        self.cur[v, v >> 3] |= (0x80 >> (v & 7)).astype(np.uint8)
        est[:] = self.weights.astype(np.float64)

    def union_range(self, lo, hi, offsets, successors, changed_prev,
                    changed_now, est, new_est, skip_stable) -> int:
        return _kernels.bitset_union_range(
            lo, hi, offsets, successors, self.cur, self.nxt, changed_prev,
            changed_now, est, new_est, self.weights, skip_stable)

    def swap(self) -> None:
        self.cur, self.nxt = self.nxt, self.cur

    def ball_members(self, v: int) -> np.ndarray:
        bits = np.unpackbits(self.cur[v])[:self.n]
        return np.flatnonzero(bits)


class HyperBallState:
    """Mutable engine state: counter rows, change flags and cached estimates.

    At the end of iteration t, slot v holds the counter of the radius-t
    ball around v, est[v] its cached size estimate, and changed_prev[v]
    records whether v's counter moved during that iteration.
    """

    def __init__(self, backend, config: HyperBallConfig, n: int):
        self.backend = backend
        self.config = config
        self.n = n
        self.t = 0
        self.num_changed = n
        self.changed_prev = np.ones(n, dtype=np.bool_)
        self.changed_now = np.zeros(n, dtype=np.bool_)
        self.est = np.zeros(n, dtype=np.float64)
        self.new_est = np.zeros(n, dtype=np.float64)

    def estimates(self) -> np.ndarray:
        """Current per-node ball-size estimates (a copy)."""
        return self.est.copy()

    def register_matrix(self) -> np.ndarray:
        """Read-only view of the working counter rows (tests, diagnostics)."""
        view = self.backend.cur.view()
        view.setflags(write=False)
        return view

    def counters(self) -> CounterArray:
        """Bit-packed snapshot of the current counters (probabilistic only)."""
        if self.backend.kind != BACKEND_PROBABILISTIC:
            raise ValueError("packed counters exist only for the "
                             "probabilistic backend")
        return self.backend.counters()

    # -- checkpointing ------------------------------------------------------

    def save(self, path) -> None:
        """Serialize both counter buffers plus flags and cached estimates."""
        be = self.backend
        if be.kind == BACKEND_PROBABILISTIC:
            blob_cur = CounterArray.from_dense(be.cur, be.params).to_blob()
            # The update buffer is scratch (fully rewritten before any read),
            # so its blob is stored empty and rebuilt blank on load.
            blob_nxt = CounterArray(self.n, be.params).to_blob()
            kind = 0
        else:
            blob_cur = be.cur.tobytes()
            blob_nxt = b""
            kind = 1
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<HBQQQ", CHECKPOINT_VERSION, kind,
                                 self.n, self.t, self.num_changed))
            fh.write(struct.pack("<BBQ", be.params.b,
                                 be.params.register_width,
                                 be.params.seed & ((1 << 64) - 1)))
            for blob in (blob_cur, blob_nxt):
                fh.write(struct.pack("<Q", len(blob)))
                fh.write(blob)
            fh.write(self.changed_prev.tobytes())
            fh.write(self.est.tobytes())
            if be.kind == BACKEND_EXACT:
                fh.write(be.weights.tobytes())


def load_state(path, config: HyperBallConfig | None = None) -> HyperBallState:
    """Rebuild a saved state; iteration resumes exactly where it stopped."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError("bad checkpoint magic")
    version, kind, n, t, num_changed = struct.unpack("<HBQQQ", data[4:31])
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    b, width, seed = struct.unpack("<BBQ", data[31:41])
    params = CounterParams(b=b, register_width=width, seed=seed)
    pos = 41
    blobs = []
    for _ in range(2):
        (length,) = struct.unpack("<Q", data[pos:pos + 8])
        pos += 8
        blobs.append(data[pos:pos + length])
        pos += length
    changed_prev = np.frombuffer(data, dtype=np.bool_, count=n,
                                 offset=pos).copy()
    pos += n
    est = np.frombuffer(data, dtype=np.float64, count=n, offset=pos).copy()
    pos += 8 * n
    if kind == 0:
        arr = CounterArray.from_blob(blobs[0])
        dense = arr.to_dense() if n else np.zeros((0, params.p), np.uint8)
        backend = _ProbabilisticBackend(n, params, cur=dense)
        weights = None
    else:
        weights_arr = np.frombuffer(data, dtype=np.int64, count=n, offset=pos)
        weights = NodeWeights.from_values(weights_arr.copy())
        row_bytes = (n + 7) // 8
        cur = np.frombuffer(blobs[0], dtype=np.uint8).reshape(
            n, row_bytes).copy()
        backend = _ExactBackend(n, params, weights, cur=cur)
    if config is None:
        config = HyperBallConfig(
            params=params, weights=weights,
            backend=BACKEND_PROBABILISTIC if kind == 0 else BACKEND_EXACT)
    state = HyperBallState(backend, config, n)
    state.t = t
    state.num_changed = num_changed
    state.changed_prev = changed_prev
    state.est = est
    return state


def initialize(g: CsrGraph, config: HyperBallConfig) -> HyperBallState:
    """Seed one counter per node with the node itself (or its replicas).

    After initialization est[v] estimates the radius-0 ball: 1 for
    unweighted runs, the node weight for weighted ones.
    """
    n = g.n
    if config.weights is not None:
        if len(config.weights) != n:
            raise ValueError(
                f"weights length {len(config.weights)} != node count {n}")
        _check_weighted_width(config.params, config.weights)
    if config.backend == BACKEND_PROBABILISTIC:
        backend = _ProbabilisticBackend(n, config.params)
    else:
        backend = _ExactBackend(n, config.params, config.weights)
    state = HyperBallState(backend, config, n)
    backend.seed(config.weights, state.est)
    return state


def _worker_bounds(offsets: np.ndarray, workers: int) -> np.ndarray:
    """Arc-balanced contiguous node ranges, one per worker."""
    n = offsets.shape[0] - 1
    m = int(offsets[-1])
    targets = np.linspace(0, m, workers + 1)
    bounds = np.searchsorted(offsets, targets).astype(np.int64)
    bounds[0] = 0
    bounds[-1] = n
    return np.maximum.accumulate(bounds)


def iterate(g: CsrGraph, state: HyperBallState,
            observers: Iterable[BallObserver] = ()) -> int:
    """One synchronous ball-growth step; returns how many counters changed.

    Observers are notified with (t, old, new) where new[v] - old[v]
    estimates the number of nodes at distance exactly t from v.
    """
    cfg = state.config
    backend = state.backend
    n = state.n
    t_next = state.t + 1
    if n == 0:
        nch = 0
    else:
        workers = min(cfg.workers, n)
        args = (g.offsets, g.successors, state.changed_prev,
                state.changed_now, state.est, state.new_est,
                cfg.skip_stable_nodes)
        if workers == 1:
            nch = backend.union_range(0, n, *args)
        else:
            bounds = _worker_bounds(g.offsets, workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(backend.union_range, int(lo), int(hi), *args)
                    for lo, hi in zip(bounds[:-1], bounds[1:])
                    if hi > lo
                ]
                nch = sum(f.result() for f in futures)
    for obs in observers:
        obs.on_step(t_next, state.est, state.new_est)
    backend.swap()
    state.est, state.new_est = state.new_est, state.est
    state.changed_prev, state.changed_now = (state.changed_now,
                                             state.changed_prev)
    state.t = t_next
    state.num_changed = nch
    return nch


def run(g: CsrGraph, config: HyperBallConfig,
        observers: Iterable[BallObserver] = ()) -> HyperBallState:
    """Initialize and iterate until no counter changes its value.

    Raises ConvergenceError if config.max_iterations is hit first (a safety
    valve only: bounded, monotone registers guarantee termination).
    """
    state = initialize(g, config)
    return resume(g, state, observers)


def resume(g: CsrGraph, state: HyperBallState,
           observers: Iterable[BallObserver] = ()) -> HyperBallState:
    """Continue a (possibly checkpointed) run to convergence."""
    cfg = state.config
    observers = list(observers)
    if state.n > 0:
        while True:
            started = time.perf_counter()
            nch = iterate(g, state, observers)
            if cfg.progress is not None:
                elapsed_ms = (time.perf_counter() - started) * 1000.0
                cfg.progress.write(
                    f"t={state.t} changed={nch} elapsed_ms={elapsed_ms:.0f}\n")
            if nch == 0:
                break
            if (cfg.max_iterations is not None
                    and state.t >= cfg.max_iterations):
                raise ConvergenceError(state.t, nch)
    else:
        state.num_changed = 0
    for obs in observers:
        obs.on_converged(state.est)
    return state
