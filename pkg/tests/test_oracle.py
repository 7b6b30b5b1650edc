"""Exact-oracle tests: hand values, scipy cross-check, engine agreement."""

import numpy as np
import pytest
import scipy.sparse
import scipy.sparse.csgraph

from hyperball import CounterParams, CsrGraph, NodeWeights, transpose
from hyperball.centrality import (CentralityAccumulator, DiscountSpec,
                                  finalize_closeness, finalize_harmonic,
                                  finalize_lin)
from hyperball.engine import HyperBallConfig, run
from hyperball.oracle import (BudgetExceededError, compare, exact_all)

from conftest import complete_graph, cycle_graph, path_graph, random_graph


def scipy_distance_matrix(g: CsrGraph) -> np.ndarray:
    """Independent all-pairs distances (scipy BFS); dist[i, j] = d(i -> j)."""
    mat = scipy.sparse.csr_matrix(
        (np.ones(g.m), g.successors, g.offsets), shape=(g.n, g.n))
    return scipy.sparse.csgraph.shortest_path(mat, method="D",
                                              unweighted=True)


class TestExactAllHandValues:
    def test_path(self):
        ex = exact_all(path_graph(3))
        assert list(finalize_closeness(ex)) == [0.0, 1.0, 1.0 / 3.0]
        assert list(finalize_harmonic(ex)) == [0.0, 1.0, 1.5]
        assert list(finalize_lin(ex)) == [1.0, 4.0, 3.0]
        assert list(ex.coreach) == [1.0, 2.0, 3.0]

    def test_cycle(self):
        ex = exact_all(cycle_graph(5))
        assert np.all(ex.sum_dist == 10.0)
        assert np.all(ex.sum_recip == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4))

    def test_unit_weights_reduce(self, rng):
        g = random_graph(rng, 80, 2.0)
        plain = exact_all(g)
        weighted = exact_all(g, weights=NodeWeights.ones(g.n))
        assert np.array_equal(plain.sum_dist, weighted.sum_dist)
        assert np.array_equal(plain.sum_recip, weighted.sum_recip)
        assert np.array_equal(plain.coreach, weighted.coreach)

    def test_vertex_transitive_graphs_are_uniform(self):
        for g in (cycle_graph(7), complete_graph(6)):
            ex = exact_all(g)
            assert np.all(ex.sum_dist == ex.sum_dist[0])
            assert np.all(ex.sum_recip == ex.sum_recip[0])
            assert np.all(ex.coreach == ex.coreach[0])


class TestAgainstScipy:
    @pytest.mark.parametrize("trial", range(4))
    def test_sums_match_scipy(self, rng, trial):
        g = random_graph(rng, 150, 2.0 + trial)
        dist = scipy_distance_matrix(g)
        ex = exact_all(g, [DiscountSpec.preset("log")])
        for x in range(g.n):
            d = dist[:, x]
            finite = np.isfinite(d) & (d > 0)
            assert ex.sum_dist[x] == d[finite].sum()
            assert ex.sum_recip[x] == pytest.approx((1.0 / d[finite]).sum())
            assert ex.coreach[x] == np.isfinite(d).sum()
            want_log = (1.0 / np.log2(d[finite] + 1.0)).sum()
            assert ex.discounted["log"][x] == pytest.approx(want_log)

    def test_weighted_sums_match_scipy(self, rng):
        g = random_graph(rng, 120, 2.5)
        w = rng.integers(1, 11, g.n)
        dist = scipy_distance_matrix(g)
        ex = exact_all(g, weights=NodeWeights.from_values(w))
        for x in range(0, g.n, 3):
            d = dist[:, x]
            finite = np.isfinite(d) & (d > 0)
            assert ex.sum_dist[x] == (w[finite] * d[finite]).sum()
            assert ex.sum_recip[x] == pytest.approx(
                (w[finite] / d[finite]).sum())
            assert ex.coreach[x] == w[np.isfinite(d)].sum()


class TestEngineAgreement:
    def test_exact_backend_agrees_bit_for_bit(self, rng):
        specs = [DiscountSpec.preset("log"), DiscountSpec.preset("const")]
        for trial in range(6):
            g = random_graph(rng, int(rng.integers(2, 250)),
                             float(rng.uniform(0.5, 4.0)))
            acc = CentralityAccumulator(g.n, specs)
            cfg = HyperBallConfig(params=CounterParams(b=4), backend="exact")
            run(transpose(g), cfg, [acc])
            ex = exact_all(g, specs)
            assert np.array_equal(acc.sum_dist, ex.sum_dist)
            assert np.array_equal(acc.sum_recip, ex.sum_recip)
            assert np.array_equal(acc.coreach, ex.coreach)
            for name in ("log", "const"):
                assert np.array_equal(acc.discounted[name],
                                      ex.discounted[name])
            assert np.array_equal(finalize_lin(acc), finalize_lin(ex))


class TestBudget:
    def test_refusal_reports_cost(self, rng):
        g = random_graph(rng, 100, 3.0)
        with pytest.raises(BudgetExceededError, match="budget"):
            exact_all(g, budget=10)

    def test_override(self, rng):
        g = random_graph(rng, 50, 2.0)
        ex = exact_all(g, budget=None)
        assert ex.coreach.shape == (50,)


class TestWorkers:
    @pytest.mark.parametrize("workers", [2, 5])
    def test_worker_count_is_invisible(self, rng, workers):
        g = random_graph(rng, 300, 2.5)
        specs = [DiscountSpec.preset("log")]
        w = NodeWeights.from_values(rng.integers(1, 5, g.n))
        serial = exact_all(g, specs, weights=w)
        threaded = exact_all(g, specs, weights=w, workers=workers)
        assert np.array_equal(serial.sum_dist, threaded.sum_dist)
        assert np.array_equal(serial.sum_recip, threaded.sum_recip)
        assert np.array_equal(serial.coreach, threaded.coreach)
        assert np.array_equal(serial.discounted["log"],
                              threaded.discounted["log"])


class TestCompare:
    def test_identical_is_zero(self):
        exact = np.array([1.0, 2.0, 3.0])
        report = compare(exact.copy(), exact)
        assert np.all(report.rel_errors == 0.0)
        assert report.median == 0.0

    def test_uniform_inflation(self):
        exact = np.array([1.0, 2.0, 4.0, 8.0])
        report = compare(1.1 * exact, exact)
        assert np.allclose(report.rel_errors, 0.1)
        assert report.q1 == pytest.approx(0.1)
        assert report.q3 == pytest.approx(0.1)
        assert report.std == pytest.approx(0.0, abs=1e-12)

    def test_zero_exact_reported_separately(self):
        report = compare(np.array([0.5, 2.0]), np.array([0.0, 2.0]))
        assert np.isnan(report.rel_errors[0])
        assert report.abs_errors[0] == 0.5
        assert report.n_zero_exact == 1
        assert report.rel_errors[1] == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compare(np.zeros(2), np.zeros(3))

    def test_quartiles_match_numpy(self, rng):
        exact = rng.uniform(1.0, 5.0, 101)
        est = exact * rng.uniform(0.9, 1.1, 101)
        report = compare(est, exact)
        rel = np.abs(est - exact) / exact
        q1, med, q3 = np.quantile(rel, [0.25, 0.5, 0.75])
        assert report.q1 == q1 and report.median == med and report.q3 == q3


class TestSingleRunAccuracy:
    def test_harmonic_median_error_single_run(self):
        # One p=4096 run against the oracle: the median per-node relative
        # error of harmonic centrality stays within twice the single
        # -counter deviation of 1.62%.
        gen = np.random.default_rng(909)
        n = 3000
        g = CsrGraph.from_edges(gen.integers(0, n, 2 * n),
                                gen.integers(0, n, 2 * n), n=n)
        acc = CentralityAccumulator(g.n)
        cfg = HyperBallConfig(params=CounterParams(b=12, seed=77))
        run(transpose(g), cfg, [acc])
        ex = exact_all(g)
        report = compare(finalize_harmonic(acc), finalize_harmonic(ex))
        assert report.median <= 2 * 0.0162
