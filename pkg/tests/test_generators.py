import math
import time
from itertools import combinations

import numpy as np
import pytest

from tailforge.generators import (
    PatternGraph,
    SubgraphModel,
    analyze_density,
    count_copies,
    gen_additive_quadruples,
    gen_ap,
    gen_complete,
    gen_ell_sum,
    gen_linear_system,
    gen_rs_sums,
    gen_schur,
    model_mu_bounds,
)
from tailforge.hypergraph import delta, validate_P


def brute_ap(n, k):
    out = set()
    for combo in combinations(range(1, n + 1), k):
        gaps = {b - a for a, b in zip(combo, combo[1:])}
        if len(gaps) == 1:
            out.add(combo)
    return out


def brute_schur(n):
    return {(x, y, z) for x, y, z in combinations(range(1, n + 1), 3) if x + y == z}


def brute_quadruples(n):
    out = set()
    for quad in combinations(range(1, n + 1), 4):
        a, b, c, d = quad
        if a + d == b + c or a + b == c + d or a + c == b + d:
            out.add(quad)
    return out


def edge_set(H):
    return set(H.edges)


class TestArithmeticProgressions:
    @pytest.mark.parametrize("n,k", [(10, 3), (3, 3), (17, 4), (12, 5), (2, 3)])
    def test_matches_enumeration(self, n, k):
        H = gen_ap(n, k)
        assert edge_set(H) == brute_ap(n, k)
        assert H.num_edges == sum(max(0, n - (k - 1) * d) for d in range(1, n + 1))

    def test_known_count(self):
        assert gen_ap(10, 3).num_edges == 20
        assert gen_ap(3, 3).edges == ((1, 2, 3),)

    def test_pair_degree_bounded(self):
        assert max(delta(gen_ap(n, 3), 2) for n in range(3, 31)) == 3


class TestSums:
    def test_schur_counts(self):
        for n in range(3, 25):
            H = gen_schur(n)
            assert edge_set(H) == brute_schur(n)
            assert H.num_edges == sum((z - 1) // 2 for z in range(3, n + 1))
        assert gen_schur(10).num_edges == 20
        assert gen_schur(3).edges == ((1, 2, 3),)

    def test_ell_sum_one_is_schur(self):
        for n in (5, 11, 16):
            assert edge_set(gen_ell_sum(n, 1)) == edge_set(gen_schur(n))

    def test_ell_sum_two(self):
        want = {tuple(sorted((x, y, z))) for x, y, z in
                ((x, y, z) for x in range(1, 13) for y in range(1, 13) for z in range(1, 13))
                if x < y and x + y == 2 * z and len({x, y, z}) == 3}
        assert edge_set(gen_ell_sum(12, 2)) == want

    def test_quadruples(self):
        assert gen_additive_quadruples(4).edges == ((1, 2, 3, 4),)
        for n in (6, 9, 12):
            assert edge_set(gen_additive_quadruples(n)) == brute_quadruples(n)

    def test_quadruple_degrees(self):
        H = gen_additive_quadruples(20)
        assert H.k == 4
        assert delta(H, 3) <= 3 < delta(H, 2)

    def test_rs_sums(self):
        for n in (7, 12):
            assert edge_set(gen_rs_sums(n, 1, 2)) == edge_set(gen_schur(n))
            assert edge_set(gen_rs_sums(n, 2, 2)) == edge_set(gen_additive_quadruples(n))
        with pytest.raises(ValueError):
            gen_rs_sums(5, 1, 1)


class TestLinearSystems:
    def test_schur_equation(self):
        assert edge_set(gen_linear_system(10, [[1, 1, -1]])) == edge_set(gen_schur(10))

    def test_quadruple_equation(self):
        assert edge_set(gen_linear_system(11, [[1, 1, -1, -1]])) == edge_set(gen_additive_quadruples(11))

    def test_rank_deficient_rejected(self):
        with pytest.raises(ValueError):
            gen_linear_system(8, [[1, 1, -1, 0], [2, 2, -2, 0]])

    def test_no_solutions(self):
        assert gen_linear_system(5, [[1, 1, 1]]).num_edges == 0


@pytest.mark.parametrize("family", [
    lambda n: gen_ap(n, 3), lambda n: gen_ap(n, 4), gen_schur, gen_additive_quadruples,
    lambda n: gen_ell_sum(n, 2),
], ids=["ap3", "ap4", "schur", "quadruples", "ell_sum2"])
def test_families_are_nested(family):
    for n in range(4, 30):
        assert edge_set(family(n)) <= edge_set(family(n + 1))


@pytest.mark.parametrize("family,q", [
    (lambda n: gen_ap(n, 3), 2), (lambda n: gen_ap(n, 4), 2), (gen_schur, 2), (gen_additive_quadruples, 3),
], ids=["ap3", "ap4", "schur", "quadruples"])
def test_degree_cap_constant_in_n(family, q):
    D = delta(family(30), q)
    for n in range(5, 31):
        H = family(n)
        checks = validate_P(H, H.k, 1.0, n, q=q, D=D)
        assert all(c["pass"] for c in checks)


def test_generation_is_fast():
    start = time.perf_counter()
    gen_ap(10, 3), gen_schur(10), gen_additive_quadruples(4)
    assert time.perf_counter() - start < 1.0


class TestDensity:
    def test_triangle(self):
        rep = analyze_density(PatternGraph.parse("K3"))
        assert rep.strictly_balanced and rep.balanced and rep.two_balanced
        assert rep.beta == pytest.approx(1.0)
        assert rep.s == 2

    def test_single_edge(self):
        rep = analyze_density(PatternGraph.parse("K2"))
        assert rep.balanced and rep.strictly_balanced
        assert rep.s == 1

    def test_perfect_matching(self):
        rep = analyze_density(PatternGraph.parse("2K2"))
        assert rep.two_balanced
        assert not rep.strictly_balanced
        assert rep.balanced

    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
    def test_stars_strictly_balanced(self, r):
        rep = analyze_density(PatternGraph.parse(f"K1,{r}"))
        assert rep.strictly_balanced
        assert rep.beta > 0

    @pytest.mark.parametrize("name", ["K3", "K4", "C4", "P4", "2K2", "K1,3", "C5"])
    def test_flag_implications(self, name):
        rep = analyze_density(PatternGraph.parse(name))
        assert not rep.strictly_balanced or rep.balanced
        assert not rep.strictly_two_balanced or rep.two_balanced
        assert (rep.beta > 1e-12) == rep.strictly_balanced

    def test_cap(self):
        with pytest.raises(ValueError):
            analyze_density(PatternGraph.parse("K9"))


class TestSubgraphModel:
    def test_triangle_edge_setup(self):
        m = SubgraphModel(PatternGraph.parse("K3"), 12, "edge")
        assert (m.k, m.q, m.ell, m.N) == (3, 2, 1, 144)
        assert m.copies == math.comb(12, 3)
        p = 0.2
        assert m.mu_j_bound(1, p) == pytest.approx((12 - 2) * p**2)
        assert m.mu_j_bound(3, p) == pytest.approx(1.0)
        assert m.mu_j_bound(1, 0.0) == 0.0

    def test_vertex_setup(self):
        m = SubgraphModel(PatternGraph.parse("K3"), 10, "vertex")
        assert (m.k, m.q, m.ell, m.N) == (3, 3, 2, 10)

    def test_star_q(self):
        m = SubgraphModel(PatternGraph.parse("K1,2"), 10, "edge")
        assert m.q == m.e - m.pattern.min_degree + 1 == 2

    def test_mu_bounds_dominate_exact(self):
        for name in ("K3", "K1,2", "C4"):
            m = SubgraphModel(PatternGraph.parse(name), 9, "edge")
            for j in range(1, m.e + 1):
                assert m.mu_j_bound(j, 0.3) >= m.mu_j_exact_edge(j, 0.3) - 1e-12

    def test_edge_setup_matches_copy_hypergraph(self):
        from tailforge.hypergraph import mu_profile

        for name in ("K3", "K1,2"):
            m = SubgraphModel(PatternGraph.parse(name), 7, "edge")
            H = m.exposure_hypergraph()
            assert H.num_edges == m.copies
            mp = mu_profile(H, 0.4)
            assert mp.mu == pytest.approx(m.mean(0.4))
            for j in range(1, m.e + 1):
                assert mp.at(j) <= m.mu_j_bound(j, 0.4) + 1e-12

    def test_model_mu_bounds(self):
        m = SubgraphModel(PatternGraph.parse("K3"), 8, "edge")
        prof = model_mu_bounds(m, p=0.5)
        assert prof.mu == pytest.approx(math.comb(8, 3) * 0.125)
        assert len(prof.mu_j) == 3

    def test_isolated_vertices_rejected(self):
        with pytest.raises(ValueError):
            SubgraphModel(PatternGraph(3, ((0, 1),)), 5)


def test_triangle_count_matches_trace():
    rng = np.random.default_rng(11)
    pattern = PatternGraph.parse("K3")
    for n in (6, 15, 30):
        upper = np.triu(rng.random((n, n)) < 0.3, 1)
        adj = upper | upper.T
        A = adj.astype(np.int64)
        assert count_copies(pattern, adj) == np.trace(A @ A @ A) // 6


def test_cherry_count_matches_degrees():
    rng = np.random.default_rng(12)
    upper = np.triu(rng.random((20, 20)) < 0.25, 1)
    adj = upper | upper.T
    deg = adj.sum(axis=1)
    assert count_copies(PatternGraph.parse("K1,2"), adj) == int(sum(d * (d - 1) // 2 for d in deg))


def test_complete_hypergraph():
    H = gen_complete(6, 3)
    assert H.num_edges == 20 and delta(H, 1) == 10
