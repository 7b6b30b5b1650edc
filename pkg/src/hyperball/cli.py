"""Command-line front end: convert, run, exact, compare.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 refusal of an
over-budget exact computation. Diagnostics go to stderr as key=value lines;
result files are TSVs whose header comments record the manifest needed to
reproduce them byte for byte (fields that cannot change the results, like
the worker count, are deliberately left out of the header).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import centrality as ct
from . import engine, oracle
from .graph import (CsrGraph, GraphFormatError, GraphParseError,
                    load_edge_list, load_weights, read_binary, transpose,
                    write_binary)
from .hll import BlobFormatError, CounterParams, standard_deviation_bound

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BUDGET = 3


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hyperball",
                     description="Approximate geometric centralities via "
                                 "mergeable counter arrays")
    sub = parser.add_subparsers(dest="command", required=True)

    p_convert = sub.add_parser("convert",
                               help="edge-list text to binary graph")
    p_convert.add_argument("input", help="edge-list file ('u v' per line)")
    p_convert.add_argument("output", help="binary graph to write")

    p_run = sub.add_parser("run", help="estimate centralities")
    p_run.add_argument("graph", help="binary graph file")
    p_run.add_argument("-o", "--output", required=True, help="TSV to write")
    p_run.add_argument("--log2m", type=int, default=6,
                       help="log2 of registers per counter (default 6)")
    p_run.add_argument("--register-width", type=int, default=5,
                       help="bits per register (default 5)")
    p_run.add_argument("--seed", type=int, default=0,
                       help="hash seed of the first run (default 0)")
    p_run.add_argument("--runs", type=int, default=1,
                       help="independent runs with seeds seed, seed+1, ...")
    p_run.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker threads (default: available cores)")
    p_run.add_argument("--weights", default=None,
                       help="node weights file ('node weight' per line)")
    p_run.add_argument("--discount", action="append", default=[],
                       metavar="SPEC",
                       help="harmonic|log|quad|const|table:<path>; repeatable")
    p_run.add_argument("--direction", choices=("negative", "positive"),
                       default="negative",
                       help="negative = incoming distances (runs on the "
                            "transpose, default); positive = outgoing")
    p_run.add_argument("--max-iterations", type=int, default=None)

    p_exact = sub.add_parser("exact", help="exact centralities via BFS")
    p_exact.add_argument("graph", help="binary graph file")
    p_exact.add_argument("-o", "--output", required=True)
    p_exact.add_argument("--weights", default=None)
    p_exact.add_argument("--discount", action="append", default=[],
                         metavar="SPEC")
    p_exact.add_argument("--direction", choices=("negative", "positive"),
                         default="negative")
    p_exact.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                         help="worker threads (default: available cores)")
    p_exact.add_argument("--budget", type=float,
                         default=float(oracle.DEFAULT_BUDGET),
                         help="refuse when n*m exceeds this (default 1e10)")

    p_cmp = sub.add_parser("compare", help="per-node errors of an estimate")
    p_cmp.add_argument("estimated", help="TSV from 'run'")
    p_cmp.add_argument("exact", help="TSV from 'exact'")
    p_cmp.add_argument("-o", "--output", required=True)
    p_cmp.add_argument("--column", default="harmonic",
                       help="centrality column to compare (default harmonic)")
    return parser


def _parse_discounts(tokens) -> list[ct.DiscountSpec]:
    specs = []
    for token in tokens:
        if token.startswith("table:"):
            path = token[len("table:"):]
            specs.append(_load_discount_table(path, name=token))
        else:
            specs.append(ct.DiscountSpec.preset(token))
    return specs


def _load_discount_table(path, name: str) -> ct.DiscountSpec:
    values = []
    tail = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if fields[0] == "tail":
                if len(fields) != 2:
                    raise GraphParseError(
                        f"line {lineno}: expected 'tail <value>'")
                tail = float(fields[1])
            elif len(fields) == 1:
                values.append(float(fields[0]))
            else:
                raise GraphParseError(
                    f"line {lineno}: expected one value per line")
    if tail is None:
        raise ValueError(
            f"discount table {path} is missing a 'tail <value>' line; the "
            f"discount must be defined for every distance")
    return ct.DiscountSpec.from_table(values, tail, name=name)


def transpose_cache_path(graph_path: Path) -> Path:
    if graph_path.suffix == ".bin":
        return graph_path.with_suffix(".t.bin")
    return graph_path.with_name(graph_path.name + ".t.bin")


def load_transposed(graph_path: Path, g: CsrGraph) -> CsrGraph:
    """Transpose of g, cached beside the input and rebuilt when stale."""
    cache = transpose_cache_path(graph_path)
    if cache.exists() and cache.stat().st_mtime >= graph_path.stat().st_mtime:
        try:
            return read_binary(cache)
        except GraphFormatError:
            pass  # stale or corrupt cache: rebuild below
    gt = transpose(g)
    write_binary(gt, cache)
    return gt


def _manifest_line(command: str, items: list[tuple[str, str]]) -> str:
    body = " ".join(f"{k}={v}" for k, v in items)
    return f"manifest command={command} {body}"


def parse_manifest(tsv_path) -> dict[str, str]:
    """Recover the manifest key=value pairs from a result file's header."""
    with open(tsv_path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.startswith("#"):
                break
            body = raw[1:].strip()
            if body.startswith("manifest "):
                return dict(item.split("=", 1)
                            for item in body[len("manifest "):].split(" "))
    raise ValueError(f"no manifest header in {tsv_path}")


def manifest_argv(tsv_path, output) -> list[str]:
    """Rebuild the argv that reproduces a result file from its manifest."""
    manifest = parse_manifest(tsv_path)
    command = manifest.pop("command")
    argv = [command, manifest.pop("graph"), "-o", str(output)]
    flags = {"direction": "--direction", "log2m": "--log2m",
             "register_width": "--register-width", "seed": "--seed",
             "runs": "--runs", "budget": "--budget"}
    for key, flag in flags.items():
        if key in manifest:
            argv.extend([flag, manifest[key]])
    if manifest.get("weights", "-") != "-":
        argv.extend(["--weights", manifest["weights"]])
    if manifest.get("discounts", "-") != "-":
        for token in manifest["discounts"].split(","):
            argv.extend(["--discount", token])
    return argv


def _diag(stream, **kv) -> None:
    stream.write(" ".join(f"{k}={v}" for k, v in kv.items()) + "\n")


def cmd_convert(args, err) -> int:
    g = load_edge_list(args.input)
    write_binary(g, args.output)
    _diag(err, command="convert", nodes=g.n, arcs=g.m, output=args.output)
    return EXIT_OK


def cmd_run(args, err) -> int:
    if args.runs < 1:
        raise _UsageError("--runs must be >= 1")
    graph_path = Path(args.graph)
    g = read_binary(graph_path)
    weights = None
    if args.weights is not None:
        weights = load_weights(args.weights, n=g.n)
    discounts = _parse_discounts(args.discount)
    if args.direction == "negative":
        work_graph = load_transposed(graph_path, g)
    else:
        work_graph = g
    params = CounterParams(b=args.log2m, register_width=args.register_width)
    _diag(err, command="run", nodes=g.n, arcs=g.m, p=params.p,
          theoretical_rsd=f"{standard_deviation_bound(params.p):.6g}")

    per_run: dict[str, list[np.ndarray]] = {}
    for r in range(args.runs):
        seed = args.seed + r
        config = engine.HyperBallConfig(
            params=CounterParams(b=args.log2m,
                                 register_width=args.register_width,
                                 seed=seed),
            weights=weights, workers=args.threads,
            max_iterations=args.max_iterations, progress=err)
        acc = ct.CentralityAccumulator(g.n, discounts)
        started = time.perf_counter()
        state = engine.run(work_graph, config, [acc])
        _diag(err, run=r, seed=seed, iterations=state.t,
              elapsed_ms=f"{(time.perf_counter() - started) * 1000:.0f}")
        columns = {
            "closeness": ct.finalize_closeness(acc),
            "harmonic": ct.finalize_harmonic(acc),
            "lin": ct.finalize_lin(acc),
            "coreach": acc.coreach,
        }
        for spec in discounts:
            columns[f"discount:{spec.name}"] = ct.finalize_discounted(
                acc, spec.name)
        for name, arr in columns.items():
            per_run.setdefault(name, []).append(arr)

    out_columns: dict[str, np.ndarray] = {}
    std_columns: dict[str, np.ndarray] = {}
    for name, arrays in per_run.items():
        mean, std = ct.multi_run_aggregate(arrays)
        out_columns[name] = mean
        if std is not None:
            std_columns[f"std:{name}"] = std
    out_columns.update(std_columns)

    manifest = _manifest_line("run", [
        ("graph", args.graph), ("direction", args.direction),
        ("log2m", str(args.log2m)),
        ("register_width", str(args.register_width)),
        ("seed", str(args.seed)), ("runs", str(args.runs)),
        ("weights", args.weights if args.weights is not None else "-"),
        ("discounts", ",".join(args.discount) if args.discount else "-"),
    ])
    rsd = f"theoretical_rsd {standard_deviation_bound(params.p):.9g}"
    ct.write_centralities_tsv(args.output, out_columns, [manifest, rsd])
    return EXIT_OK


def cmd_exact(args, err) -> int:
    graph_path = Path(args.graph)
    g = read_binary(graph_path)
    weights = None
    if args.weights is not None:
        weights = load_weights(args.weights, n=g.n)
    discounts = _parse_discounts(args.discount)
    if args.direction == "positive":
        # exact_all computes incoming distances, so positive needs the
        # transpose, mirroring what `run` does for negative.
        work_graph = load_transposed(graph_path, g)
    else:
        work_graph = g
    started = time.perf_counter()
    exact = oracle.exact_all(work_graph, discounts, weights,
                             budget=int(args.budget), workers=args.threads)
    _diag(err, command="exact", nodes=g.n, arcs=g.m,
          elapsed_ms=f"{(time.perf_counter() - started) * 1000:.0f}")
    columns = {
        "closeness": ct.finalize_closeness(exact),
        "harmonic": ct.finalize_harmonic(exact),
        "lin": ct.finalize_lin(exact),
        "coreach": exact.coreach,
    }
    for spec in discounts:
        columns[f"discount:{spec.name}"] = exact.discounted[spec.name]
    manifest = _manifest_line("exact", [
        ("graph", args.graph), ("direction", args.direction),
        ("weights", args.weights if args.weights is not None else "-"),
        ("discounts", ",".join(args.discount) if args.discount else "-"),
        ("budget", str(int(args.budget))),
    ])
    ct.write_centralities_tsv(args.output, columns, [manifest])
    return EXIT_OK


def cmd_compare(args, err) -> int:
    _, est_cols = ct.read_centralities_tsv(args.estimated)
    _, exact_cols = ct.read_centralities_tsv(args.exact)
    if args.column not in est_cols or args.column not in exact_cols:
        raise _UsageError(
            f"column {args.column!r} missing from one of the inputs")
    est = est_cols[args.column]
    exact = exact_cols[args.column]
    if est.shape != exact.shape:
        raise GraphFormatError(
            f"node counts differ: {est.shape[0]} vs {exact.shape[0]}")
    report = oracle.compare(est, exact)
    summary = " ".join(f"{k}={ct.format_float(v)}"
                       for k, v in report.summary_items())
    _diag(err, command="compare", column=args.column, **dict(
        (k, ct.format_float(v)) for k, v in report.summary_items()))
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# compare column={args.column} estimated={args.estimated} "
                 f"exact={args.exact}\n")
        fh.write(f"# summary {summary}\n")
        fh.write("# columns\tnode\texact\testimate\trel_error\tabs_error\n")
        for v in range(est.shape[0]):
            rel = report.rel_errors[v]
            ab = report.abs_errors[v]
            fh.write(f"{v}\t{ct.format_float(exact[v])}"
                     f"\t{ct.format_float(est[v])}"
                     f"\t{'' if np.isnan(rel) else ct.format_float(rel)}"
                     f"\t{'' if np.isnan(ab) else ct.format_float(ab)}\n")
    return EXIT_OK


_COMMANDS = {
    "convert": cmd_convert,
    "run": cmd_run,
    "exact": cmd_exact,
    "compare": cmd_compare,
}


def main(argv=None, err=None) -> int:
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, err)
    except _UsageError as exc:
        err.write(f"error: usage: {exc}\n")
        return EXIT_USAGE
    except oracle.BudgetExceededError as exc:
        err.write(f"error: budget: {exc}\n")
        return EXIT_BUDGET
    except (GraphParseError, GraphFormatError, BlobFormatError) as exc:
        err.write(f"error: data: {exc}\n")
        return EXIT_DATA
    except FileNotFoundError as exc:
        err.write(f"error: data: {exc}\n")
        return EXIT_DATA
    except ValueError as exc:
        err.write(f"error: usage: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
