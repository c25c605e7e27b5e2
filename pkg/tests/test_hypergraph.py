import json
import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailforge.generators import gen_ap, gen_complete
from tailforge.hypergraph import (
    Hypergraph,
    degree_profile,
    delta,
    expected_weight,
    gamma,
    mu_profile,
    validate_P,
)
from tailforge.oracle import conditional_mu_oracle


@st.composite
def hypergraphs(draw, max_n=8, max_k=4, weighted=False):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, min(max_k, n)))
    pool = [c for size in range(1, k + 1) for c in combinations(range(1, n + 1), size)]
    edges = draw(st.lists(st.sampled_from(pool), unique=True, max_size=16))
    weights = None
    if weighted and edges:
        weights = draw(st.lists(st.floats(0, 3, allow_nan=False), min_size=len(edges), max_size=len(edges)))
    return Hypergraph(n, edges, weights=weights, k=k, L=3.0 if weighted else None)


def brute_delta(H, j):
    best = 0
    for U in combinations(range(1, H.n + 1), j):
        best = max(best, sum(set(U) <= set(e) for e in H.edges))
    return best


class TestConstruction:
    def test_edges_are_canonical(self):
        H = Hypergraph(5, [(3, 1, 2), (4, 5)])
        assert H.edges == ((1, 2, 3), (4, 5))
        assert H.k == 3

    @pytest.mark.parametrize(
        "edges", [[(1, 1, 2)], [(1, 2), (2, 1)], [(0, 1)], [(1, 9)]], ids=["repeat", "duplicate", "zero", "high"]
    )
    def test_invalid_edges_rejected(self, edges):
        with pytest.raises(ValueError):
            Hypergraph(5, edges)

    def test_weight_cap_enforced(self):
        with pytest.raises(ValueError):
            Hypergraph(3, [(1, 2)], weights=[2.0], L=1.0)
        with pytest.raises(ValueError):
            Hypergraph(3, [(1, 2)], weights=[-1.0])

    def test_edge_size_cap_enforced(self):
        with pytest.raises(ValueError):
            Hypergraph(4, [(1, 2, 3)], k=2)

    def test_json_round_trip(self):
        H = Hypergraph(6, [(1, 2, 3), (2, 4)], weights=[0.5, 2.0], k=3, L=2.0)
        data = json.loads(H.to_json())
        assert data == {"n": 6, "k": 3, "L": 2.0, "edges": [[1, 2, 3], [2, 4]], "weights": [0.5, 2.0]}
        assert Hypergraph.from_json(H.to_json()) == H

    def test_empty_hypergraph_is_legal(self):
        H = Hypergraph(4, [], k=3)
        assert H.num_edges == 0
        assert delta(H, 2) == 0
        assert mu_profile(H, 0.5).mu == 0.0


class TestGamma:
    def test_ap_pair(self):
        H = gen_ap(10, 3)
        idx = gamma(H, (1, 3))
        assert [H.edge(i) for i in idx] == [(1, 2, 3), (1, 3, 5)]

    def test_no_superset_edge(self):
        assert gamma(gen_ap(10, 3), (1, 10)).size == 0

    def test_complete_pair(self):
        H = gen_complete(5, 3)
        assert sorted(H.edge(i) for i in gamma(H, (1, 2))) == [(1, 2, 3), (1, 2, 4), (1, 2, 5)]

    def test_out_of_range_label(self):
        with pytest.raises(ValueError):
            gamma(gen_ap(10, 3), (0,))
        with pytest.raises(ValueError):
            gamma(gen_ap(10, 3), (11,))

    @given(hypergraphs(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_gamma_antimonotone(self, H, data):
        U = data.draw(st.lists(st.integers(1, H.n), min_size=1, max_size=3, unique=True))
        extra = data.draw(st.integers(1, H.n))
        wider = set(U) | {extra}
        assert set(gamma(H, sorted(wider)).tolist()) <= set(gamma(H, sorted(U)).tolist())


class TestDelta:
    def test_ap_values(self):
        H = gen_ap(10, 3)
        assert delta(H, 2) == 3
        assert delta(H, 1) == 8
        assert delta(H, 3) == 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            delta(gen_ap(10, 3), 4)

    @given(hypergraphs())
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_and_is_nonincreasing(self, H):
        values = [delta(H, j) for j in range(1, H.k + 1)]
        assert values == [brute_delta(H, j) for j in range(1, H.k + 1)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        for j, d in enumerate(values, start=1):
            assert d <= H.num_edges
            if any(len(e) >= j for e in H.edges):
                assert d >= 1

    def test_profile_selects_q(self):
        prof = degree_profile(gen_ap(10, 3), D=3)
        assert prof.deltas == (8, 3, 1)
        assert prof.q == 2


class TestMuProfile:
    def test_single_edge(self):
        mp = mu_profile(Hypergraph(2, [(1, 2)]), 0.5)
        assert (mp.mu, mp.mu_j) == (0.25, (0.5, 1.0))

    def test_complete_mean(self):
        for n, k, p in [(7, 3, 0.3), (9, 4, 0.6)]:
            assert mu_profile(gen_complete(n, k), p).mu == pytest.approx(math.comb(n, k) * p**k, rel=1e-12)

    @given(hypergraphs(weighted=True))
    @settings(max_examples=40, deadline=None)
    def test_p_one_gives_degrees(self, H):
        mp = mu_profile(H, 1.0)
        assert mp.mu == pytest.approx(H.total_weight(), rel=1e-12, abs=1e-12)
        if H.unit_weights:
            assert mp.mu_j == tuple(float(delta(H, j)) for j in range(1, H.k + 1))

    @given(hypergraphs(), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_p(self, H, p1, p2):
        lo, hi = sorted((p1, p2))
        a, b = mu_profile(H, lo), mu_profile(H, hi)
        assert a.mu <= b.mu + 1e-12
        assert all(x <= y + 1e-12 for x, y in zip(a.mu_j, b.mu_j))

    def test_p_zero_collapse(self):
        H = Hypergraph(5, [(1, 2, 3), (3, 4)])
        mp = mu_profile(H, 0.0)
        assert mp.mu == 0.0
        assert mp.mu_j == (0.0, 1.0, 1.0)

    @given(hypergraphs(max_n=7, weighted=True), st.floats(0.05, 0.95))
    @settings(max_examples=30, deadline=None)
    def test_conditional_expectation_form(self, H, p):
        mu, mu_j = conditional_mu_oracle(H, p)
        mp = mu_profile(H, p)
        assert mp.mu == pytest.approx(mu, rel=1e-12, abs=1e-12)
        for got, want in zip(mp.mu_j, mu_j):
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_pure(self):
        H = gen_ap(15, 3)
        assert mu_profile(H, 0.37) == mu_profile(H, 0.37)

    def test_expected_weight_weighted(self):
        H = Hypergraph(4, [(1, 2), (2, 3, 4)], weights=[2.0, 0.5], L=2.0)
        assert expected_weight(H, 0.5) == pytest.approx(2 * 0.25 + 0.5 * 0.125)


class TestValidateP:
    def test_ap_passes(self):
        checks = validate_P(gen_ap(10, 3), 3, 1, 10, q=2, D=3)
        assert all(c["pass"] for c in checks)

    def test_degree_clause_fails(self):
        checks = validate_P(gen_ap(10, 3), 3, 1, 10, q=2, D=2)
        failing = [c for c in checks if not c["pass"]]
        assert len(failing) == 1 and failing[0]["lhs"] == 3

    def test_empty(self):
        assert all(c["pass"] for c in validate_P(Hypergraph(3, [], k=2), 2, 1, 3))

    def test_weight_and_size_clauses(self):
        H = Hypergraph(4, [(1, 2, 3)], weights=[2.0], L=2.0)
        checks = {c["clause"]: c["pass"] for c in validate_P(H, 2, 1.0, 3)}
        assert checks == {"max edge size <= k": False, "max weight <= L": False, "weights nonnegative": True,
                          "vertices <= N": True}


def test_induced_weight_matches_scan():
    H = gen_ap(12, 3)
    rng = np.random.default_rng(5)
    for _ in range(20):
        S = set((np.flatnonzero(rng.random(12) < 0.5) + 1).tolist())
        assert H.weight_inside(sorted(S)) == sum(set(e) <= S for e in H.edges)
        assert H.induced(sorted(S)).num_edges == sum(set(e) <= S for e in H.edges)
