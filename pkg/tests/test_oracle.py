import math
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailforge.generators import gen_ap, gen_complete
from tailforge.hypergraph import Hypergraph, mu_profile
from tailforge.oracle import (
    DependencyInstance,
    ProductSpace,
    SubsetHistogram,
    check_bk,
    check_chernoff,
    degree_tail_table,
    disjoint_occurrence,
    exact_distribution,
    exact_zc,
    lower_bound_witness,
)


class TestExactDistribution:
    def test_single_edge(self):
        dist = exact_distribution(Hypergraph(2, [(1, 2)]), p=0.5)
        assert dist.tail(1) == pytest.approx(0.25)
        assert dist.tail(0) == 1.0

    def test_ap6_frozen(self):
        # Frozen from a pure-Python enumeration of all 64 subsets with exact fractions.
        dist = exact_distribution(gen_ap(6, 3), p=0.5)
        want = {1: Fraction(3, 8), 2: Fraction(7, 32), 3: Fraction(5, 64), 4: Fraction(3, 64),
                5: Fraction(1, 64), 6: Fraction(1, 64)}
        for thr, val in want.items():
            assert dist.tail(thr) == pytest.approx(float(val), rel=1e-12)
        assert dist.mean == pytest.approx(0.75, rel=1e-12)
        assert dist.tail(7) == 0.0

    @pytest.mark.parametrize("n,p", [(9, 0.3), (12, 0.55)])
    def test_mass_and_mean(self, n, p):
        H = gen_ap(n, 3)
        dist = exact_distribution(H, p=p)
        assert math.fsum(dist.pmf.tolist()) == pytest.approx(1.0, abs=1e-9)
        assert dist.mean == pytest.approx(mu_profile(H, p).mu, abs=1e-9)

    def test_uniform_regime_brute_force(self):
        H = gen_ap(8, 3)
        m = 5
        hits = [sum(set(e) <= set(S) for e in H.edges) for S in combinations(range(1, 9), m)]
        dist = exact_distribution(H, m=m)
        for thr in range(0, 5):
            assert dist.tail(thr) == pytest.approx(sum(h >= thr for h in hits) / len(hits), rel=1e-12)

    def test_histogram_serves_many_p(self):
        H = gen_ap(10, 3)
        hist = SubsetHistogram(H)
        for p in (0.1, 0.7):
            assert hist.binomial(p).tail(2) == pytest.approx(exact_distribution(H, p=p).tail(2), rel=1e-12)

    def test_refuses_large(self):
        with pytest.raises(ValueError):
            exact_distribution(gen_ap(40, 3), p=0.5)


def _indicator_instance(probs, related=None, cap=1.0):
    size = len(probs)
    return DependencyInstance(
        factor_probs=[[1 - p, p] for p in probs],
        supports=[(i,) for i in range(size)],
        tables=[[0.0, 1.0] for _ in range(size)],
        related=np.eye(size, dtype=bool) if related is None else related,
        cap=cap,
    )


class TestCappedMaximum:
    def test_independent_reduces_to_sum(self):
        inst = _indicator_instance([0.3, 0.5, 0.2, 0.7])
        probs, values = inst.outcomes()
        res = exact_zc(inst)
        assert np.allclose(res.values, values.sum(axis=1))

    def test_large_cap_is_plain_sum(self):
        related = np.ones((3, 3), dtype=bool)
        inst = _indicator_instance([0.4, 0.4, 0.4], related, cap=3.0)
        _, values = inst.outcomes()
        assert np.allclose(exact_zc(inst).values, values.sum(axis=1))

    def test_tiny_cap_is_zero(self):
        inst = _indicator_instance([0.5, 0.5], cap=1e-9)
        assert np.all(exact_zc(inst).values == 0)

    def test_cap_binds_on_related_pair(self):
        related = np.ones((2, 2), dtype=bool)
        inst = _indicator_instance([0.5, 0.5], related, cap=1.0)
        assert exact_zc(inst).values.max() == 1.0

    @given(st.integers(1, 8), st.floats(0.3, 3.0), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_branch_and_bound_matches_enumeration(self, size, cap, seed):
        rng = np.random.default_rng(seed)
        related = np.eye(size, dtype=bool)
        for a, b in combinations(range(size), 2):
            if rng.random() < 0.4:
                related[a, b] = related[b, a] = True
        inst = DependencyInstance([[0.5, 0.5]] * size, [(i,) for i in range(size)],
                                  [[0.0, float(rng.random() * 2)] for _ in range(size)], related, cap)
        a, b = exact_zc(inst, "enumerate"), exact_zc(inst, "branch")
        assert np.allclose(a.values, b.values)

    def test_unrelated_sharing_coordinates_rejected(self):
        with pytest.raises(ValueError):
            DependencyInstance([[0.5, 0.5]], [(0,), (0,)], [[0, 1], [0, 1]], np.eye(2, dtype=bool), 1.0)


class TestChernoffCheck:
    def test_reference_value(self):
        inst = _indicator_instance([0.25, 0.25, 0.25, 0.25])
        res = check_chernoff(inst, 1.0, 1.0)
        assert res["rhs"] == pytest.approx(math.exp(-(2 * math.log(2) - 1)), rel=1e-12)
        assert res["rhs"] == pytest.approx(0.6795704571147613, rel=1e-12)
        assert res["holds"]

    def test_small_t_bound_near_one(self):
        res = check_chernoff(_indicator_instance([0.5, 0.5]), 1.0, 1e-6)
        assert res["rhs"] == pytest.approx(1.0, abs=1e-9)

    def test_final_form_weakest(self):
        inst = _indicator_instance([0.2, 0.6, 0.1])
        for t in (0.1, 0.5, 1.0, 3.0):
            forms = check_chernoff(inst, 0.9, t)["forms"]
            assert all(forms["quarter"] >= v * (1 - 1e-12) for v in forms.values())

    def test_mean_above_mu_rejected(self):
        with pytest.raises(ValueError):
            check_chernoff(_indicator_instance([0.5, 0.5]), 0.5, 1.0)


def brute_box(space, events):
    """Disjoint occurrence by assigning each coordinate to one event or none."""
    M, count = space.M, len(events)
    out = np.zeros(space.size, dtype=bool)
    for labels in product(range(count + 1), repeat=M):
        sets = [[i for i in range(M) if labels[i] == c] for c in range(count)]
        member = np.ones(space.size, dtype=bool)
        for ev, coords in zip(events, sets):
            member &= space.restriction(ev, coords)
        out |= member
    return out


class TestDisjointOccurrence:
    def test_single_event_is_itself(self):
        space = ProductSpace([[0.5, 0.5]] * 3)
        ev = np.random.default_rng(0).random(8) < 0.5
        res = check_bk(space, [ev])
        assert res["lhs"] == pytest.approx(space.probability(ev))
        assert res["holds"]

    def test_disjoint_coordinates_give_product(self):
        space = ProductSpace([[0.3, 0.7], [0.6, 0.4], [0.5, 0.5], [0.2, 0.8]])
        grid = space.outcome_grid()
        first = (grid[:, 0] == 1) | (grid[:, 1] == 1)
        second = (grid[:, 2] == 1) & (grid[:, 3] == 1)
        res = check_bk(space, [first, second])
        assert res["lhs"] == pytest.approx(res["rhs"], rel=1e-12)

    @given(st.integers(1, 4), st.integers(2, 3), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, M, count, seed):
        rng = np.random.default_rng(seed)
        space = ProductSpace([[0.5, 0.5]] * M)
        events = [rng.random(space.size) < 0.5 for _ in range(count)]
        assert np.array_equal(disjoint_occurrence(space, events), brute_box(space, events))

    @given(st.integers(1, 6), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_exactly_m_increasing(self, M, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(0, M + 1))
        space = ProductSpace.exactly_m(M, m)
        grid = space.outcome_grid()
        events = []
        for _ in range(2):
            seeds = grid[rng.random(space.size) < 0.2]
            events.append(np.array([any(np.all(row >= s) for s in seeds) for row in grid], dtype=bool))
        assert check_bk(space, events)["holds"]


class TestLowerBoundWitness:
    def test_zero_target(self):
        res = lower_bound_witness(gen_ap(10, 3), 0.3, 0)
        assert res["U"] == [] and res["log_bound"] == 0.0

    def test_complete(self):
        for u in (3, 4, 6):
            res = lower_bound_witness(gen_complete(9, 3), 0.5, math.comb(u, 3))
            assert len(res["U"]) == u

    def test_ap_full_set(self):
        res = lower_bound_witness(gen_ap(10, 3), 0.3, 20)
        assert res["U"] == list(range(1, 11))
        assert res["log_bound"] == pytest.approx(10 * math.log(0.3))

    def test_certificate_is_valid(self):
        H = gen_ap(12, 3)
        exact = exact_distribution(H, p=0.4)
        for target in (1, 4, 9):
            res = lower_bound_witness(H, 0.4, target)
            assert H.weight_inside(res["U"]) >= target
            assert exact.tail(target) >= math.exp(res["log_bound"]) * (1 - 1e-12)


def test_degree_tail_table_brute_force():
    H = gen_ap(8, 3)
    p = 0.35
    psi = degree_tail_table(SubsetHistogram(H, vertex_degrees=True), p)
    for x in range(0, 6):
        total = 0.0
        for mask in range(1 << 8):
            S = {v + 1 for v in range(8) if mask >> v & 1}
            weight = p ** len(S) * (1 - p) ** (8 - len(S))
            for v in S:
                if sum(v in e and set(e) <= S for e in H.edges) >= x:
                    total += weight
        assert psi[x] == pytest.approx(total, rel=1e-10, abs=1e-15)
