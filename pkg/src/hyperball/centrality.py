"""Telescoping accumulation of ball-size deltas into centrality scores.

The number of nodes at distance exactly t from v is the difference between
consecutive ball sizes, so running sums of t*delta, delta/t and f(t)*delta
yield the distance sum, the reciprocal-distance sum and arbitrary
discounted sums in one pass, one float per node per sum. Finalizers turn
those sums into closeness, harmonic, Lin's and discounted-gain scores with
the usual conventions for nodes nothing else can reach.

Per node, contributions are accumulated in strictly ascending t, so results
are reproducible bit for bit regardless of worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import BallObserver

PRESET_DISCOUNTS = ("harmonic", "logarithmic", "quadratic", "constant")


@dataclass(frozen=True)
class DiscountSpec:
    """Non-increasing discount f over positive integer distances.

    Presets: harmonic 1/t, logarithmic 1/log2(t+1), quadratic 1/t^2 and
    constant 1. Table specs supply explicit values f(1), f(2), ... plus a
    mandatory tail value used beyond the table (refusing to guess a tail
    silently is deliberate: the sums are infinite-horizon).
    """

    kind: str
    name: str = ""
    table: tuple[float, ...] | None = None
    tail: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in PRESET_DISCOUNTS + ("table",):
            raise ValueError(f"unknown discount kind {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.kind)
        if self.kind == "table":
            if not self.table:
                raise ValueError("table discount needs at least one value")
            if self.tail is None:
                raise ValueError(
                    "table discount needs an explicit tail value for "
                    "distances beyond the table")
            seq = tuple(self.table) + (self.tail,)
            if any(x < 0 for x in seq):
                raise ValueError("discount values must be non-negative")
            if any(a < b for a, b in zip(seq, seq[1:])):
                raise ValueError("discount values must be non-increasing")

    @classmethod
    def preset(cls, name: str) -> "DiscountSpec":
        aliases = {"log": "logarithmic", "quad": "quadratic",
                   "const": "constant"}
        kind = aliases.get(name, name)
        if kind not in PRESET_DISCOUNTS:
            raise ValueError(f"unknown discount preset {name!r}")
        return cls(kind=kind, name=name)

    @classmethod
    def from_table(cls, values: Sequence[float], tail: float,
                   name: str = "table") -> "DiscountSpec":
        return cls(kind="table", name=name, table=tuple(float(v) for v in values),
                   tail=float(tail))

    def value(self, t: int) -> float:
        """f(t) for integer distance t >= 1."""
        if t < 1:
            raise ValueError("discounts are defined for distances t >= 1")
        if self.kind == "harmonic":
            return 1.0 / t
        if self.kind == "logarithmic":
            return 1.0 / np.log2(t + 1.0)
        if self.kind == "quadratic":
            return 1.0 / (float(t) * float(t))
        if self.kind == "constant":
            return 1.0
        if t <= len(self.table):
            return self.table[t - 1]
        return self.tail

    def contribution(self, t: int, count):
        """f(t) * count, as the float operation every consumer must share.

        The harmonic case divides instead of multiplying by 1/t so that a
        harmonic discount accumulates bit-identically to the reciprocal
        -distance sum (the two differ in the last ulp otherwise).
        """
        if t < 1:
            raise ValueError("discounts are defined for distances t >= 1")
        if self.kind == "harmonic":
            return count / t
        return self.value(t) * count


class CentralityAccumulator(BallObserver):
    """Per-node running sums fed by ball-size deltas.

    sum_dist[x]  ~ sum over y of d(y, x)          (weighted: w(y) d(y, x))
    sum_recip[x] ~ sum over y != x of 1 / d(y, x)
    discounted[name][x] ~ sum over y != x of f(d(y, x))
    coreach[x]   ~ total weight of {y : d(y, x) < finite}, x included.

    Negative raw deltas (possible in principle where the estimator switches
    regimes) are clamped to zero: a negative count of nodes at distance t
    is meaningless.
    """

    def __init__(self, n: int, discounts: Sequence[DiscountSpec] = ()):
        self.n = n
        self.sum_dist = np.zeros(n, dtype=np.float64)
        self.sum_recip = np.zeros(n, dtype=np.float64)
        self.discounts = list(discounts)
        names = [spec.name for spec in self.discounts]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate discount names: {names}")
        self.discounted = {spec.name: np.zeros(n, dtype=np.float64)
                           for spec in self.discounts}
        self.coreach = np.zeros(n, dtype=np.float64)
        self.converged = False

    # BallObserver contract ------------------------------------------------

    def on_step(self, t: int, old_estimates: np.ndarray,
                new_estimates: np.ndarray) -> None:
        delta = np.maximum(new_estimates - old_estimates, 0.0)
        self.accumulate(t, delta)

    def on_converged(self, final_estimates: np.ndarray) -> None:
        self.coreach = final_estimates.astype(np.float64).copy()
        self.converged = True

    # direct accumulation (the same op the observer path funnels into) ------

    def accumulate(self, t: int, delta: np.ndarray) -> None:
        """Fold the estimated count of nodes at distance exactly t."""
        if t <= 0:
            raise ValueError(f"distance t must be >= 1, got {t}")
        self.sum_dist += t * delta
        self.sum_recip += delta / t
        for spec in self.discounts:
            self.discounted[spec.name] += spec.contribution(t, delta)


def finalize_closeness(acc) -> np.ndarray:
    """1 / sum of finite distances; 0 for nodes nothing else coreaches."""
    sums = acc.sum_dist
    out = np.zeros_like(sums)
    np.divide(1.0, sums, out=out, where=sums > 0)
    return out


def finalize_harmonic(acc) -> np.ndarray:
    """Sum of reciprocal distances; unreachable pairs contribute 0."""
    return acc.sum_recip.copy()


def finalize_lin(acc) -> np.ndarray:
    """coreach^2 / distance sum; 1 for nodes nothing else coreaches."""
    sums = acc.sum_dist
    out = np.ones_like(sums)
    np.divide(acc.coreach * acc.coreach, sums, out=out, where=sums > 0)
    return out


def finalize_discounted(acc, name: str) -> np.ndarray:
    """The accumulated discounted-gain sum for one discount spec."""
    return acc.discounted[name].copy()


def multi_run_aggregate(runs: Sequence[np.ndarray]):
    """Per-node mean and sample standard deviation across repeated runs.

    Returns (mean, std); std is None for a single run.
    """
    if not runs:
        raise ValueError("need at least one run")
    lengths = {len(r) for r in runs}
    if len(lengths) != 1:
        raise ValueError(f"runs have mismatched lengths: {sorted(lengths)}")
    stacked = np.vstack([np.asarray(r, dtype=np.float64) for r in runs])
    mean = stacked.mean(axis=0)
    if stacked.shape[0] < 2:
        return mean, None
    return mean, stacked.std(axis=0, ddof=1)


# -- TSV output ------------------------------------------------------------

def format_float(x: float) -> str:
    return format(float(x), ".9g")


def write_centralities_tsv(sink, columns: dict[str, np.ndarray],
                           header_comments: Sequence[str] = ()) -> None:
    """One row per node: node id then each column at 9 significant digits."""
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            write_centralities_tsv(fh, columns, header_comments)
        return
    names = list(columns)
    sizes = {arr.shape[0] for arr in columns.values()}
    if len(sizes) > 1:
        raise ValueError("columns have mismatched lengths")
    n = sizes.pop() if sizes else 0
    for line in header_comments:
        sink.write(f"# {line}\n")
    sink.write("# columns\tnode\t" + "\t".join(names) + "\n")
    if n == 0:
        return
    rendered = [np.char.mod("%.9g", np.asarray(columns[c], dtype=np.float64))
                for c in names]
    for v in range(n):
        sink.write(str(v))
        for col in rendered:
            sink.write("\t")
            sink.write(col[v])
        sink.write("\n")


def read_centralities_tsv(source):
    """Parse a centrality TSV back into (comment lines, column dict)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            return read_centralities_tsv(fh)
    comments: list[str] = []
    names: list[str] | None = None
    rows: list[list[float]] = []
    for raw in source:
        line = raw.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("columns\t"):
                names = body.split("\t")[2:]
            else:
                comments.append(body)
            continue
        rows.append([float(x) for x in line.split("\t")[1:]])
    if names is None:
        raise ValueError("missing '# columns' header line")
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return comments, {name: data[:, i] for i, name in enumerate(names)}
