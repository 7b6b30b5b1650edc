"""Estimate closeness / harmonic / Lin on a random graph, then check them.

The estimation pass runs on the transpose (centralities here depend on
incoming distances), an accumulator folds the per-distance deltas into
sums on the fly, and the BFS oracle provides exact values to compare
against.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from hyperball import (CentralityAccumulator, CounterParams, CsrGraph,
                       HyperBallConfig, transpose)
from hyperball.centrality import (finalize_closeness, finalize_harmonic,
                                  finalize_lin)
from hyperball.engine import run
from hyperball.oracle import compare, exact_all

gen = np.random.default_rng(99)
n = 2000
g = CsrGraph.from_edges(gen.integers(0, n, 6 * n),
                        gen.integers(0, n, 6 * n), n=n)
print(f"graph: n={g.n}, m={g.m}")

acc = CentralityAccumulator(g.n)
config = HyperBallConfig(params=CounterParams(b=12, seed=1), workers=2,
                         progress=sys.stderr)
run(transpose(g), config, [acc])

exact = exact_all(g)

for name, got, want in [
    ("closeness", finalize_closeness(acc), finalize_closeness(exact)),
    ("harmonic", finalize_harmonic(acc), finalize_harmonic(exact)),
    ("lin", finalize_lin(acc), finalize_lin(exact)),
    ("coreach", acc.coreach, exact.coreach),
]:
    report = compare(got, want)
    print(f"{name:>10}: median rel err {report.median:.3%}, "
          f"q3 {report.q3:.3%}")

top = np.argsort(finalize_harmonic(exact))[::-1][:5]
print("\nmost central nodes (exact harmonic):")
for v in top:
    print(f"  node {v}: harmonic exact {finalize_harmonic(exact)[v]:.1f}, "
          f"estimated {finalize_harmonic(acc)[v]:.1f}")
