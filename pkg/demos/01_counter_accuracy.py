"""Mergeable counters 101: feed items, estimate, merge, check the math.

Sweeps the register count p, measures the empirical spread of the
estimator over repeated seeds, and compares it with the guaranteed
1.06/sqrt(p) ceiling.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from hyperball import CounterArray, CounterParams, standard_deviation_bound
from hyperball.hll import hash_items

TRUE_SIZE = 50_000
SEEDS = 60

items = np.arange(TRUE_SIZE, dtype=np.uint64)
replicas = np.zeros(TRUE_SIZE, dtype=np.uint64)

print(f"estimating a set of {TRUE_SIZE} distinct items, {SEEDS} seeds\n")
print(f"{'p':>6} {'memory/counter':>15} {'mean est':>12} "
      f"{'empirical rsd':>14} {'bound 1.06/sqrt(p)':>19}")
for b in (4, 6, 8, 12):
    p = 1 << b
    estimates = []
    for seed in range(SEEDS):
        params = CounterParams(b=b, seed=seed)
        counter = CounterArray(1, params)
        counter.add_hashed(0, hash_items(items, replicas, seed))
        estimates.append(counter.estimate_size(0))
    estimates = np.array(estimates)
    rsd = estimates.std(ddof=1) / TRUE_SIZE
    params = CounterParams(b=b)
    print(f"{p:>6} {params.row_bytes:>13} B {estimates.mean():>12.1f} "
          f"{rsd:>13.2%} {standard_deviation_bound(p):>18.2%}")

# Merging two counters estimates the union of what they saw.
params = CounterParams(b=12, seed=7)
left = CounterArray(1, params)
right = CounterArray(1, params)
left.add_hashed(0, hash_items(np.arange(0, 30_000, dtype=np.uint64),
                              np.zeros(30_000, np.uint64), 7))
right.add_hashed(0, hash_items(np.arange(20_000, 60_000, dtype=np.uint64),
                               np.zeros(40_000, np.uint64), 7))
print(f"\nleft ~ {left.estimate_size(0):.0f}, "
      f"right ~ {right.estimate_size(0):.0f} (true 30000 / 40000)")
left.union_into(0, right, 0)
print(f"after union_into: ~ {left.estimate_size(0):.0f} (true union 60000)")
