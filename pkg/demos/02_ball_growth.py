"""Watch balls grow: one counter per node, one union sweep per distance.

Runs the engine step by step on a small graph with both backends and
prints the per-node ball-size estimates after every iteration. The exact
backend stores true node sets, so its numbers are the ground truth the
probabilistic counters approximate.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from hyperball import CounterParams, CsrGraph, HyperBallConfig
from hyperball.engine import initialize, iterate

# Two triangles bridged by one arc, plus a pendant node.
#   0 -> 1 -> 2 -> 0,   2 -> 3,   3 -> 4 -> 5 -> 3,   5 -> 6
edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6)]
g = CsrGraph.from_edges([e[0] for e in edges], [e[1] for e in edges], n=7)

for backend in ("exact", "probabilistic"):
    config = HyperBallConfig(params=CounterParams(b=10, seed=4),
                             backend=backend)
    state = initialize(g, config)
    print(f"\n{backend} backend")
    print("  t=0:", np.array2string(state.est, precision=2))
    while True:
        changed = iterate(g, state)
        print(f"  t={state.t}:", np.array2string(state.est, precision=2),
              f"({changed} counters changed)")
        if changed == 0:
            break

# The final estimate per node is the size of its reachable set; running
# on the transpose instead would count the nodes that reach it.
