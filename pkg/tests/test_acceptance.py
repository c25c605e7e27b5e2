"""Acceptance criteria 1 to 11. Each test records one PASS/FAIL line, shown in the terminal summary."""

import json
import math
import time
from itertools import combinations

import numpy as np
import pytest
from conftest import record_criterion
from scipy.stats import binom

from tailforge import campaigns, cli
from tailforge.bounds import bound_app_randinduced, bound_app_subgraph
from tailforge.generators import (
    PatternGraph,
    SubgraphModel,
    analyze_density,
    gen_additive_quadruples,
    gen_ap,
    gen_complete,
    gen_schur,
)
from tailforge.hypergraph import Hypergraph, degree_profile, delta, mu_profile
from tailforge.oracle import conditional_mu_oracle
from tailforge.sampler import TailModel, mc_tail, mc_tails


def _check(number, passed, detail):
    record_criterion(number, bool(passed), detail)
    assert passed, detail


def _campaign(name, **sizes):
    start = time.perf_counter()
    result = campaigns.run_campaign(name, 0, 1, **sizes)
    return result, time.perf_counter() - start


def test_criterion_01_generator_counts():
    start = time.perf_counter()
    ap, schur, quad = gen_ap(10, 3), gen_schur(10), gen_additive_quadruples(4)
    elapsed = time.perf_counter() - start
    ap_oracle = sum(max(0, 10 - 2 * d) for d in range(1, 10))
    schur_oracle = sum(1 for x, y, z in combinations(range(1, 11), 3) if x + y == z)
    quad_oracle = sum(1 for a, b, c, d in combinations(range(1, 5), 4) if a + d == b + c)
    got = (ap.num_edges, schur.num_edges, quad.num_edges)
    ok = got == (20, 20, 1) == (ap_oracle, schur_oracle, quad_oracle) and elapsed < 1.0
    _check(1, ok, f"edges ap/schur/quad = {got}, oracles agree, {elapsed:.3f}s")


def test_criterion_02_parameters():
    rng = np.random.default_rng([0, 2])
    worst, failures = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(3, 15))
        k = int(rng.integers(2, min(4, n) + 1))
        pool = list(combinations(range(1, n + 1), k))
        picks = rng.choice(len(pool), size=min(len(pool), int(rng.integers(1, 30))), replace=False)
        H = Hypergraph(n, [pool[i] for i in picks], weights=rng.uniform(0.1, 2.0, len(picks)).tolist(), L=2.0)
        p = float(rng.uniform(0.05, 0.95))
        mp = mu_profile(H, p)
        mu, mu_j = conditional_mu_oracle(H, p)
        errs = [abs(mp.mu - mu)] + [abs(a - b) for a, b in zip(mp.mu_j, mu_j)]
        worst = max(worst, max(e / max(1.0, abs(v)) for e, v in zip(errs, [mu, *mu_j])))
        deltas = [delta(H, j) for j in range(1, k + 1)]
        failures += any(a < b for a, b in zip(deltas, deltas[1:]))
        unit = Hypergraph(n, H.edges, k=k)
        failures += mu_profile(unit, 1.0).mu_j != tuple(float(d) for d in deltas)
    ok = worst <= 1e-12 and failures == 0
    _check(2, ok, f"50 hypergraphs, worst relative error {worst:.2e}, structural failures {failures}")


def test_criterion_03_chernoff():
    res, elapsed = _campaign("chernoff")
    ok = res["cases"] == 200 and res["violation_count"] == 0 and elapsed < 60
    _check(3, ok, f"{res['cases']} instances, {res['violation_count']} violations, {elapsed:.1f}s")


def test_criterion_04_disjoint_occurrence():
    res, elapsed = _campaign("bk")
    exactly_m = res["stats"]["exactly_m_cases"]
    ok = res["cases"] == 10_000 and res["violation_count"] == 0 and exactly_m > 0 and elapsed < 300
    _check(4, ok, f"{res['cases']} collections ({exactly_m} exactly-m), {res['violation_count']} violations, "
                  f"{elapsed:.1f}s")


def test_criterion_05_sparsifier():
    res, elapsed = _campaign("sparsifier")
    small = res["stats"]["small_cases"]
    ok = res["cases"] == 1000 and res["violation_count"] == 0 and small > 0
    _check(5, ok, f"{res['cases']} cases, {small} checked exhaustively for maximality, "
                  f"{res['violation_count']} violations, {elapsed:.1f}s")


def test_criterion_06_decomposition():
    res, elapsed = _campaign("decomposition")
    qualified = res["stats"]["qualified_runs"]
    ok = qualified >= 1000 and res["violation_count"] == 0
    _check(6, ok, f"{qualified} qualified runs of {res['cases']}, {res['violation_count']} violations, "
                  f"{elapsed:.1f}s")


def test_criterion_07_bound_validity():
    res, elapsed = _campaign("bounds")
    applicable = res["stats"]["applicable"]
    informative = res["stats"]["informative"]
    ok = res["violation_count"] == 0 and elapsed < 600 and all(applicable.values())
    summary = ", ".join(f"{k} {informative[k]}/{applicable[k]}" for k in sorted(applicable))
    _check(7, ok, f"{res['violation_count']} violations, informative/applicable: {summary}, {elapsed:.1f}s")


def test_criterion_08_exponent_shape():
    start = time.perf_counter()
    ratios, worst_balance, inapplicable = [], 0.0, 0
    for n in (1000, 10_000):
        H = gen_ap(n, 3)
        prof = degree_profile(H)
        for p in np.geomspace(1.0 / n, 0.5, 8):
            rep = bound_app_randinduced(H, float(p), 1.0, profile=prof)
            if not rep.applicable:
                inapplicable += 1
                continue
            mp = mu_profile(H, float(p))
            psi = min(mp.mu, math.sqrt(mp.mu) * (1 - math.log(p)))
            ratios.append(-rep.log_bound / psi / rep.constants["c_final"])
            # balance with alpha = 1/2: mu_1 / max{mu^(1/2), 1} <= A p^(1/2)
            worst_balance = max(worst_balance, mp.mu_j[0] / max(math.sqrt(mp.mu), 1.0) / math.sqrt(p))
    elapsed = time.perf_counter() - start
    spread = max(abs(r - 1) for r in ratios)
    ok = inapplicable == 0 and spread < 1e-9 and worst_balance <= 2.0 and elapsed < 60
    _check(8, ok, f"exponent / (c * min(mu, mu^(1/2) log(e/p))) within {spread:.1e} of 1 on 16 points, "
                  f"balance constant A = {worst_balance:.4f} at alpha = 1/2, {elapsed:.1f}s")


def test_criterion_09_complete_exclusion():
    refused = all(bound_app_randinduced(gen_complete(N, 3), 0.3, 1.0).status == "not_applicable"
                  for N in (40, 60, 80))
    p, eps = 0.3, 0.5
    rates, exact_rates, agree = [], [], True
    for N in (40, 60, 80):
        mu = math.comb(N, 3) * p**3
        est = mc_tail(TailModel(gen_complete(N, 3), "binomial", p, seed=2), (1 + eps) * mu, 20_000, level=0.999)
        # X >= (1+eps)mu exactly when at least m vertices survive
        m = next(m for m in range(N + 1) if math.comb(m, 3) >= (1 + eps) * mu * (1 - 1e-12))
        exact = float(binom.sf(m - 1, N, p))
        agree &= est.ci_lo <= exact <= est.ci_hi
        rates.append(-math.log(est.estimate) / (N * p))
        exact_rates.append(-math.log(exact) / (N * p))
    ratio = max(rates) / min(rates)
    ok = refused and agree and ratio <= 2.0
    _check(9, ok, f"refused for N in 40/60/80, -log Pr / (Np) = {[round(r, 4) for r in rates]} "
                  f"(exact {[round(r, 4) for r in exact_rates]}), max/min {ratio:.2f}")


def test_criterion_10_subgraph_counts():
    compared, violations = 0, 0
    for name in ("K1,2", "K3"):
        for p in (0.05, 0.1):
            model = SubgraphModel(PatternGraph.parse(name), 14, "edge")
            mu = model.mean(p)
            epss = (0.5, 1.0, 2.0)
            ests = mc_tails(TailModel(model, "graph-binomial", p, seed=10), [(1 + e) * mu for e in epss],
                            1_000_000)
            for eps, est in zip(epss, ests):
                for mode in ("small", "sg", "large", "large-balanced"):
                    kwargs = {"t": eps * mu} if mode == "sg" else {"eps": eps}
                    rep = bound_app_subgraph(name, 14, p, mode=mode, **kwargs)
                    if rep.applicable:
                        compared += 1
                        violations += est.ci_lo > rep.bound
    k3, matching = analyze_density(PatternGraph.parse("K3")), analyze_density(PatternGraph.parse("2K2"))
    density_ok = (k3.strictly_balanced and abs(k3.beta - 1) < 1e-12 and k3.s == 2
                  and matching.two_balanced and not matching.strictly_balanced)
    ok = violations == 0 and compared > 0 and density_ok
    _check(10, ok, f"{compared} applicable bounds vs 10^6-trial MC, {violations} violations, "
                   f"density classifications {'match' if density_ok else 'differ'}")


def test_criterion_11_reproducibility(tmp_path, capsys):
    outputs = []
    for threads in (1, 8, 1):
        path = tmp_path / f"verify_{threads}_{len(outputs)}.json"
        code = cli.main(["verify", "--seed", "0", "--threads", str(threads), "--out", str(path)])
        capsys.readouterr()
        outputs.append((code, path.read_bytes()))
    same = outputs[0][1] == outputs[1][1] == outputs[2][1]
    ok = same and all(code == 0 for code, _ in outputs)
    violations = json.loads(outputs[0][1])["violation_count"]
    _check(11, ok, f"full verify byte-identical across two runs and threads 1 vs 8: {same}, "
                   f"exit codes {[c for c, _ in outputs]}, violations {violations}")
