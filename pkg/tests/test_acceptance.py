"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

The desk-preset experiment runs once per output directory through the real
CLI entry point; criteria 7 and 8 share those invocations.
"""

import time

import numpy as np
import pytest

import graphdisc.discriminability as disc
from graphdisc.cli import main
from graphdisc.filters import FirFilter, apply_fir, freq_response
from graphdisc.gnn import Nonlinearity
from graphdisc.graphs import generate_geometric_graph, laplacian, normalize_support
from graphdisc.spectral import eig_sym, split_subspace
from graphdisc.training import init_model, model_backward


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"{criterion}: {detail}"


def make_graph_setup(n, neighbors, k, seed):
    g = generate_geometric_graph(n, neighbors, seed=seed)
    spec = eig_sym(normalize_support(laplacian(g)))
    return spec, split_subspace(spec, k)


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    """Two CLI invocations of `run --preset desk --seed 7`."""
    dirs = []
    start = time.perf_counter()
    for name in ("desk_a", "desk_b"):
        out = tmp_path_factory.mktemp(name)
        code = main(["run", "--preset", "desk", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        dirs.append(out)
    return dirs, time.perf_counter() - start


def read_summary(path):
    rows = {}
    for line in path.read_text().strip().split("\n")[1:]:
        subspace, model, mean, ci, n_graphs = line.split(",")
        rows[(subspace, model)] = float(mean)
    return rows


class TestCriterion1SpectralEquivalence:
    def test_gft_of_filter_output(self):
        start = time.perf_counter()
        rng = np.random.default_rng(2024)
        worst = 0.0
        for trial in range(100):
            n = int(rng.integers(8, 51))
            g = generate_geometric_graph(n, min(5, n - 1),
                                         seed=int(rng.integers(0, 2 ** 62)))
            s = normalize_support(laplacian(g))
            spec = eig_sym(s)
            f = FirFilter(rng.uniform(-1, 1, int(rng.integers(1, 6))))
            x = rng.standard_normal(n)
            lhs = spec.eigenvectors.T @ apply_fir(f, s, x)
            rhs = freq_response(f, spec.eigenvalues) * (spec.eigenvectors.T @ x)
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(x))
        elapsed = time.perf_counter() - start
        report("1 (spectral equivalence)",
               worst <= 1e-9 and elapsed < 10.0,
               f"worst residual {worst:.2e} over 100 triples in {elapsed:.1f} s")


class TestCriterion2Theorem1:
    def test_no_counterexamples(self):
        start = time.perf_counter()
        counterexamples = 0
        for graph_idx in range(10):
            spec, split = make_graph_setup(20, 5, 4, seed=300 + graph_idx)
            rng = np.random.default_rng(400 + graph_idx)
            gnn = disc.verifier_gnn(spec, 4, Nonlinearity.tanh(), rng=rng)
            rep = disc.verify_theorem1(spec, split, gnn.bank, gnn.sigma,
                                       100, rng)
            counterexamples += rep.counterexamples
        elapsed = time.perf_counter() - start
        report("2 (theorem 1 property suite)",
               counterexamples == 0 and elapsed < 30.0,
               f"{counterexamples} counterexamples in 1000 pairs / 10 graphs, "
               f"{elapsed:.1f} s")


class TestCriterion3Theorem2:
    def test_identity_agreement(self):
        agreements = trials = 0
        for graph_idx in range(5):
            spec, split = make_graph_setup(20, 5, 4, seed=500 + graph_idx)
            rng = np.random.default_rng(600 + graph_idx)
            gnn = disc.verifier_gnn(spec, 4, Nonlinearity.identity(), rng=rng)
            rep = disc.verify_theorem2_forward(spec, split, gnn, 100, rng)
            agreements += rep.agreements
            trials += rep.trials
        report("3a (theorem 2, identity regime)",
               trials == 500 and agreements == trials,
               f"{agreements}/{trials} verdict agreements")

    def test_leaky_constructed_pairs(self):
        worst = 0.0
        deviations = 0.0
        for graph_idx in range(5):
            spec, split = make_graph_setup(20, 5, 4, seed=700 + graph_idx)
            rng = np.random.default_rng(800 + graph_idx)
            gnn = disc.verifier_gnn(spec, 4, Nonlinearity.leaky_rectifier(0.1),
                                    rng=rng)
            for _ in range(10):
                x, y = disc.constant_secant_pair(split, gnn, spec, rng)
                scale = np.linalg.norm(x - y)
                verdict = disc.pair_in_d_phi(split, gnn, spec, x, y, 1e-8)
                assert verdict.in_d_h and verdict.in_d_phi
                worst = max(worst, verdict.residual_low_gnn / scale)
                srep = disc.secant_report(gnn, spec, x, y, 4)
                deviations = max(deviations, float(np.max(srep.max_deviation)))
        report("3b (theorem 2, constant-secant pairs)",
               worst <= 1e-9,
               f"worst relative residual {worst:.2e}, "
               f"worst secant deviation {deviations:.2e} over 50 pairs")

    def test_tanh_discrimination_rate(self):
        discriminated = trials = 0
        for graph_idx in range(10):
            spec, split = make_graph_setup(20, 5, 4, seed=900 + graph_idx)
            rng = np.random.default_rng(1000 + graph_idx)
            gnn = disc.verifier_gnn(spec, 4, Nonlinearity.tanh(), rng=rng)
            rep = disc.verify_theorem2_forward(spec, split, gnn, 100, rng)
            discriminated += rep.discriminated
            trials += rep.trials
        rate = discriminated / trials
        report("3c (theorem 2, tanh discrimination)",
               trials == 1000 and rate >= 0.99,
               f"{discriminated}/{trials} pairs discriminated ({rate:.1%})")


class TestCriterion4Corollary1:
    def test_verdict_agreement(self):
        mismatches = trials = 0
        for graph_idx in range(5):
            spec, split = make_graph_setup(20, 5, 4, seed=1100 + graph_idx)
            rng = np.random.default_rng(1200 + graph_idx)
            gnn = disc.all_zero_high_gnn(spec, 4, Nonlinearity.tanh(),
                                         n_filters=3, rng=rng)
            rep = disc.verify_corollary1(spec, split, gnn.bank, gnn.sigma,
                                         100, rng)
            mismatches += rep.verdict_mismatches
            trials += rep.trials
        report("4 (corollary 1)",
               trials == 500 and mismatches == 0,
               f"{mismatches} verdict mismatches in {trials} mixed trials")


class TestCriterion5Corollary2:
    def test_strictness_and_probe(self):
        witnesses_per_graph = []
        probe_total = probe_above = 0
        for graph_idx in range(10):
            spec, split = make_graph_setup(20, 5, 4, seed=1300 + graph_idx)
            rng = np.random.default_rng(1400 + graph_idx)
            gnn = disc.verifier_gnn(spec, 4, Nonlinearity.tanh(), rng=rng)
            rep = disc.verify_corollary2(spec, split, gnn, 200, rng,
                                         probe_draws=20)
            assert rep.subset_violations == 0
            witnesses_per_graph.append(rep.strictness_witnesses)
            probe_total += rep.probe_draws
            probe_above += rep.probe_above_threshold
        rate = probe_above / probe_total
        report("5 (corollary 2)",
               min(witnesses_per_graph) >= 1 and rate >= 0.95,
               f"witnesses per graph min {min(witnesses_per_graph)}, "
               f"probe residual > 1e-6 on {probe_above}/{probe_total} draws")


class TestCriterion6Gradients:
    def test_finite_difference_check(self):
        start = time.perf_counter()
        rng = np.random.default_rng(4242)
        worst = 0.0
        for trial in range(20):
            n = int(rng.integers(5, 21))
            g = generate_geometric_graph(n, min(3, n - 1), seed=trial)
            s = normalize_support(laplacian(g))
            sigma = [Nonlinearity.tanh(), Nonlinearity.identity(),
                     Nonlinearity.leaky_rectifier(0.2)][trial % 3]
            model = init_model(int(rng.integers(1, 5)), int(rng.integers(1, 4)),
                               sigma, use_nonlinearity=(trial % 4 != 0),
                               seed=trial)
            x = rng.standard_normal((4, n))
            y = np.sign(rng.standard_normal((4, n)))
            il_weight = 0.01 if trial % 2 else 0.0
            result = model_backward(model, s, x, y, il_weight)

            h = 1e-5
            for arr, grad in ((model.taps, result.grad_taps),
                              (model.readout, result.grad_readout)):
                flat, gflat = arr.reshape(-1), grad.reshape(-1)
                for i in range(flat.size):
                    keep = flat[i]
                    flat[i] = keep + h
                    up = model_backward(model, s, x, y, il_weight).objective
                    flat[i] = keep - h
                    down = model_backward(model, s, x, y, il_weight).objective
                    flat[i] = keep
                    fd = (up - down) / (2 * h)
                    scale = max(abs(fd), abs(gflat[i]), 1e-6)
                    worst = max(worst, abs(fd - gflat[i]) / scale)
        elapsed = time.perf_counter() - start
        report("6 (gradient correctness)",
               worst <= 1e-4 and elapsed < 60.0,
               f"worst relative error {worst:.2e} over 20 configs "
               f"in {elapsed:.1f} s")


class TestCriterion7DeskExperiment:
    def test_high_gap_and_low_full_parity(self, desk_runs):
        (first, _), elapsed = desk_runs
        means = read_summary(first / "summary.csv")
        high_gap = means[("high", "filter_bank")] / means[("high", "gnn")] - 1
        low_gap = abs(means[("low", "filter_bank")] / means[("low", "gnn")] - 1)
        full_gap = abs(means[("full", "filter_bank")] / means[("full", "gnn")] - 1)
        passed = (high_gap >= 0.25 and low_gap <= 0.15 and full_gap <= 0.15
                  and elapsed / 2 < 15 * 60)
        report("7 (desk-scale reproduction)", passed,
               f"high gap {high_gap:+.1%} (floor 25%), low {low_gap:.1%}, "
               f"full {full_gap:.1%} (cap 15%), {elapsed/2:.0f} s per run")


class TestCriterion8Determinism:
    def test_byte_identical_summary(self, desk_runs):
        (first, second), _ = desk_runs
        a = (first / "summary.csv").read_bytes()
        b = (second / "summary.csv").read_bytes()
        report("8 (determinism)", a == b,
               f"summary.csv byte-identical across invocations ({len(a)} bytes)")
