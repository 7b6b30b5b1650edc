"""Approximate geometric centralities on directed graphs.

The package grows, for every node simultaneously, the ball of nodes within
distance t using one mergeable HyperLogLog counter per node; telescoping
differences of consecutive ball sizes turn into closeness, harmonic, Lin's
and discounted-gain centralities in a handful of bytes per node. An exact
bitset backend and a per-node BFS oracle provide two independent ground
truths for validation.
"""

from .centrality import (CentralityAccumulator, DiscountSpec,
                         finalize_closeness, finalize_discounted,
                         finalize_harmonic, finalize_lin,
                         multi_run_aggregate, read_centralities_tsv,
                         write_centralities_tsv)
from .engine import (BACKEND_EXACT, BACKEND_PROBABILISTIC, BallObserver,
                     ConvergenceError, HyperBallConfig, HyperBallState,
                     initialize, iterate, load_state, resume, run)
from .graph import (CsrGraph, GraphFormatError, GraphParseError, NodeWeights,
                    load_edge_list, load_weights, read_binary, transpose,
                    write_binary)
from .hll import (BlobFormatError, CounterArray, CounterParams, hash_item,
                  hash_items, rho_plus, standard_deviation_bound)
from .oracle import (BudgetExceededError, ComparisonReport, ExactCentralities,
                     compare, exact_all)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_EXACT",
    "BACKEND_PROBABILISTIC",
    "BallObserver",
    "BlobFormatError",
    "BudgetExceededError",
    "CentralityAccumulator",
    "ComparisonReport",
    "ConvergenceError",
    "CounterArray",
    "CounterParams",
    "CsrGraph",
    "DiscountSpec",
    "ExactCentralities",
    "GraphFormatError",
    "GraphParseError",
    "HyperBallConfig",
    "HyperBallState",
    "NodeWeights",
    "compare",
    "exact_all",
    "finalize_closeness",
    "finalize_discounted",
    "finalize_harmonic",
    "finalize_lin",
    "hash_item",
    "hash_items",
    "initialize",
    "iterate",
    "load_edge_list",
    "load_state",
    "load_weights",
    "multi_run_aggregate",
    "read_binary",
    "read_centralities_tsv",
    "resume",
    "rho_plus",
    "run",
    "standard_deviation_bound",
    "transpose",
    "write_binary",
    "write_centralities_tsv",
    "__version__",
]
