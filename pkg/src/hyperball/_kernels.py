"""Numba inner loops for counter estimation, ball propagation and BFS.

Every kernel is nogil so worker threads scale to physical cores, and every
write is row-local: a kernel invoked on [lo, hi) touches only rows lo..hi-1
of its output arrays. That property is what makes results bit-identical
regardless of how the node range is partitioned across workers.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def estimate_register_row(regs, row, pow2neg, alpha_p2, lc_cut, p_float):
    """Cardinality estimate of one register row (ascending-index sum order).

    Returns the raw harmonic-mean estimator alpha_p * p^2 / sum(2^-M[j]),
    replaced by the linear-counting value p*ln(p/V) in the small range
    (raw <= 2.5p with V > 0 zero registers).
    """
    s = 0.0
    zeros = 0
    p = regs.shape[1]
    for j in range(p):
        r = regs[row, j]
        s += pow2neg[r]
        if r == 0:
            zeros += 1
    e = alpha_p2 / s
    if e <= lc_cut and zeros > 0:
        e = p_float * np.log(p_float / zeros)
    return e


@njit(nogil=True, cache=True)
def estimate_register_rows(regs, lo, hi, pow2neg, alpha_p2, lc_cut, p_float, out):
    for v in range(lo, hi):
        out[v] = estimate_register_row(regs, v, pow2neg, alpha_p2, lc_cut, p_float)


@njit(nogil=True, cache=True)
def scatter_max(regs, rows, idx, rho):
    """regs[rows[i], idx[i]] = max(old, rho[i]) for every item i."""
    for i in range(rows.shape[0]):
        v = rows[i]
        j = idx[i]
        r = rho[i]
        if r > regs[v, j]:
            regs[v, j] = r


@njit(nogil=True, cache=True)
def max_into_row(regs, row, idx, rho):
    """Fold hashed items (idx, rho) into a single register row; True if grown."""
    changed = False
    for i in range(idx.shape[0]):
        j = idx[i]
        r = rho[i]
        if r > regs[row, j]:
            regs[row, j] = r
            changed = True
    return changed


@njit(nogil=True, cache=True)
def hll_union_range(lo, hi, offsets, successors, cur, nxt, changed_prev,
                    changed_now, est, new_est, pow2neg, alpha_p2, lc_cut,
                    p_float, skip_stable):
    """One ball-growth step for nodes [lo, hi) over HLL register rows.

    nxt[v] = register-wise max of cur[v] and cur[w] over successors w.
    A node is recomputed only when it or one of its successors changed in
    the previous step; skipped nodes provably keep their registers, so the
    row is copied and the cached estimate reused. Returns the number of
    counters in the range whose registers changed.
    """
    p = cur.shape[1]
    nch = 0
    for v in range(lo, hi):
        active = changed_prev[v]
        if not active:
            for k in range(offsets[v], offsets[v + 1]):
                if changed_prev[successors[k]]:
                    active = True
                    break
        if skip_stable and not active:
            for j in range(p):
                nxt[v, j] = cur[v, j]
            changed_now[v] = False
            new_est[v] = est[v]
            continue
        for j in range(p):
            nxt[v, j] = cur[v, j]
        for k in range(offsets[v], offsets[v + 1]):
            w = successors[k]
            for j in range(p):
                x = cur[w, j]
                if x > nxt[v, j]:
                    nxt[v, j] = x
        changed = False
        for j in range(p):
            if nxt[v, j] != cur[v, j]:
                changed = True
                break
        changed_now[v] = changed
        if changed:
            nch += 1
            new_est[v] = estimate_register_row(nxt, v, pow2neg, alpha_p2,
                                               lc_cut, p_float)
        else:
            new_est[v] = est[v]
    return nch


@njit(nogil=True, cache=True)
def weighted_popcount_row(bits, row, weights):
    """Sum of node weights over set bits of one bitset row (MSB-first bytes)."""
    total = np.int64(0)
    nb = bits.shape[1]
    for i in range(nb):
        val = bits[row, i]
        if val:
            base = i * 8
            for k in range(8):
                if val & (0x80 >> k):
                    total += weights[base + k]
    return total


@njit(nogil=True, cache=True)
def bitset_union_range(lo, hi, offsets, successors, cur, nxt, changed_prev,
                       changed_now, est, new_est, weights, skip_stable):
    """Exact-set twin of hll_union_range: bitwise-OR rows, weighted popcount.

    Estimates are exact integers (sums of int64 weights) so the engine run
    becomes a breadth-first oracle when this backend is selected.
    """
    nb = cur.shape[1]
    nch = 0
    for v in range(lo, hi):
        active = changed_prev[v]
        if not active:
            for k in range(offsets[v], offsets[v + 1]):
                if changed_prev[successors[k]]:
                    active = True
                    break
        if skip_stable and not active:
            for i in range(nb):
                nxt[v, i] = cur[v, i]
            changed_now[v] = False
            new_est[v] = est[v]
            continue
        for i in range(nb):
            nxt[v, i] = cur[v, i]
        for k in range(offsets[v], offsets[v + 1]):
            w = successors[k]
            for i in range(nb):
                nxt[v, i] |= cur[w, i]
        changed = False
        for i in range(nb):
            if nxt[v, i] != cur[v, i]:
                changed = True
                break
        changed_now[v] = changed
        if changed:
            nch += 1
            new_est[v] = float(weighted_popcount_row(nxt, v, weights))
        else:
            new_est[v] = est[v]
    return nch


@njit(nogil=True, cache=True)
def bfs_distances(offsets, successors, source, dist, fifo):
    """Single-source BFS; fills dist (unreached = -1), returns eccentricity."""
    n = dist.shape[0]
    for i in range(n):
        dist[i] = -1
    dist[source] = 0
    fifo[0] = source
    head = 0
    tail = 1
    ecc = 0
    while head < tail:
        v = fifo[head]
        head += 1
        dv = dist[v]
        if dv > ecc:
            ecc = dv
        for k in range(offsets[v], offsets[v + 1]):
            w = successors[k]
            if dist[w] < 0:
                dist[w] = dv + 1
                fifo[tail] = w
                tail += 1
    return ecc


@njit(nogil=True, cache=True)
def distance_weight_histogram(dist, weights, ecc, out):
    """out[t] = sum of weights of nodes at distance exactly t (t <= ecc)."""
    for t in range(ecc + 1):
        out[t] = 0
    for v in range(dist.shape[0]):
        d = dist[v]
        if d >= 0:
            out[d] += weights[v]
