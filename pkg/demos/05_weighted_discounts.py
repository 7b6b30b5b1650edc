"""Node weights and discount functions: the generalized gain centralities.

Weights make every sum count w(y) instead of 1 per coreaching node
(implemented by seeding each counter with w(v) replica items). Discounts
swap the 1/d kernel of harmonic centrality for any non-increasing f(d):
presets for 1/d, 1/log2(d+1), 1/d^2, constant 1, or an explicit table.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from hyperball import (CentralityAccumulator, CounterParams, CsrGraph,
                       DiscountSpec, HyperBallConfig, NodeWeights, transpose)
from hyperball.centrality import finalize_discounted, finalize_harmonic
from hyperball.engine import run
from hyperball.oracle import exact_all

# A chain of hubs: 0 <- 1 <- 2 <- ... with weights growing down the chain.
n = 12
g = CsrGraph.from_edges(np.arange(1, n), np.arange(0, n - 1), n=n)
weights = NodeWeights.from_values(1 + np.arange(n) % 4)

specs = [
    DiscountSpec.preset("harmonic"),
    DiscountSpec.preset("log"),
    DiscountSpec.preset("quad"),
    DiscountSpec.preset("const"),
    DiscountSpec.from_table([1.0, 1.0, 0.5], tail=0.0, name="cutoff3"),
]

acc = CentralityAccumulator(n, specs)
config = HyperBallConfig(params=CounterParams(b=10, seed=2),
                         backend="exact", weights=weights)
run(transpose(g), config, [acc])

print("node 0 sees the whole weighted chain; discounts taper its gain:\n")
print(f"{'discount':>10} {'node 0':>10} {'node 5':>10}")
for spec in specs:
    values = finalize_discounted(acc, spec.name)
    print(f"{spec.name:>10} {values[0]:>10.3f} {values[5]:>10.3f}")

# The harmonic discount is literally harmonic centrality, and a constant
# discount counts the coreaching weight (minus the node itself).
assert np.array_equal(finalize_discounted(acc, "harmonic"),
                      finalize_harmonic(acc))
exact = exact_all(g, specs, weights=weights)
assert np.array_equal(finalize_discounted(acc, "const"),
                      exact.coreach - weights.values)
print("\nidentities hold: harmonic == 1/d discount, "
      "const == coreaching weight beyond self")
