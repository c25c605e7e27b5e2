"""Randomized verification campaigns.

Case ``i`` of a campaign draws from ``default_rng([seed, tag, i])``, so results
do not depend on how cases are spread over threads. Each campaign returns a
plain dict: case counts, a capped list of violations and summary statistics.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Callable

import numpy as np

from .bounds import (
    _min_balance_A,
    bound_alternative,
    bound_app_randinduced,
    bound_app_randinduced_small,
    bound_basic,
    bound_easy_p,
    bound_extended,
    bound_small,
    easy_schedule,
    structure_from_hypergraph,
)
from .generators import gen_ap, gen_schur
from .hypergraph import Hypergraph, degree_profile, delta, expected_weight
from .oracle import (
    DependencyInstance,
    ProductSpace,
    SubsetHistogram,
    certify_degree_tail,
    check_bk,
    check_chernoff,
    degree_tail_table,
)
from .sparsifier import (
    addable_star_exists,
    check_degree_event,
    decompose,
    greedy_star_matching,
    max_degree,
    sparsification_exact,
    sparsification_sufficient,
    sparsify,
)

__all__ = [
    "CAMPAIGNS",
    "run_campaign",
    "run_all",
    "random_hypergraph",
    "bound_reports",
    "bound_grid_instances",
]

_MAX_STORED = 20
_TAGS = {"chernoff": 1, "bk": 2, "sparsifier": 3, "decomposition": 4, "bounds": 5}


def _case_rng(seed: int, tag: str, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), _TAGS[tag], int(index)])


def _map(fn: Callable, items, threads: int | None) -> list:
    workers = max(1, threads or os.cpu_count() or 1)
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _summary(name: str, outcomes: list, extra: dict | None = None) -> dict:
    violations = [v for out in outcomes for v in out["violations"]]
    return {
        "campaign": name,
        "cases": len(outcomes),
        "checks": sum(out["checks"] for out in outcomes),
        "violation_count": len(violations),
        "violations": violations[:_MAX_STORED],
        "stats": extra or {},
    }


def random_hypergraph(rng: np.random.Generator, n_range=(4, 9), k_choices=(2, 3, 4), max_edges: int = 24) -> Hypergraph:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    k = int(rng.choice([k for k in k_choices if k <= n]))
    pool = list(combinations(range(1, n + 1), k))
    count = int(rng.integers(1, min(len(pool), max_edges) + 1))
    picks = sorted(rng.choice(len(pool), size=count, replace=False).tolist())
    return Hypergraph(n, [pool[i] for i in picks], k=k)


# Chernoff-type inequality for the capped maximum


def _chernoff_case(seed: int, index: int) -> dict:
    rng = _case_rng(seed, "chernoff", index)
    coords = int(rng.integers(2, 7))
    factor_probs = []
    for _ in range(coords):
        raw = rng.random(int(rng.integers(2, 4))) + 0.05
        factor_probs.append(raw / raw.sum())
    size = int(rng.integers(1, 11))
    supports, tables = [], []
    for _ in range(size):
        width = int(rng.integers(0, 3))
        sup = tuple(sorted(rng.choice(coords, size=width, replace=False).tolist()))
        shape = tuple(len(factor_probs[i]) for i in sup)
        scale = float(rng.choice([0.5, 1.0, 2.0]))
        values = rng.random(shape) * scale
        values = np.where(rng.random(shape) < 0.4, 0.0, values)
        supports.append(sup)
        tables.append(values)
    related = np.eye(size, dtype=bool)
    for a in range(size):
        for b in range(a + 1, size):
            if set(supports[a]) & set(supports[b]) or rng.random() < 0.2:
                related[a, b] = related[b, a] = True
    cap = float(rng.choice([0.5, 1.0, 2.0, 4.0]))
    inst = DependencyInstance(factor_probs, supports, tables, related, cap)
    mu = inst.expected_sum() * (1 + float(rng.choice([0.0, 0.0, 0.1])))
    mu = mu if mu > 0 else 0.1
    t = mu * float(rng.choice([0.05, 0.1, 0.25, 0.5, 1.0, 2.0]))
    res = check_chernoff(inst, mu, t)
    bad = [] if res["holds"] else [{"case": index, "lhs": res["lhs"], "forms": res["forms"]}]
    return {"checks": 1, "violations": bad, "nonzero": res["lhs"] > 0}


def campaign_chernoff(seed: int, cases: int = 200, threads: int | None = None) -> dict:
    outs = _map(lambda i: _chernoff_case(seed, i), range(cases), threads)
    return _summary("chernoff", outs, {"nonzero_tails": sum(o["nonzero"] for o in outs)})


# disjoint occurrence


def _up_closure(space: ProductSpace, event: np.ndarray) -> np.ndarray:
    grid = space.outcome_grid()
    seeds = grid[event]
    if not len(seeds):
        return event
    return np.any(np.all(grid[:, None, :] >= seeds[None, :, :], axis=2), axis=1)


def _bk_case(seed: int, index: int) -> dict:
    rng = _case_rng(seed, "bk", index)
    M = int(rng.integers(1, 9))
    count = int(rng.integers(1, 4))
    if rng.random() < 0.25:
        m = int(rng.integers(0, M + 1))
        space = ProductSpace.exactly_m(M, m)
        density = float(rng.choice([0.02, 0.1, 0.3]))
        events = [_up_closure(space, rng.random(space.size) < density) for _ in range(count)]
        variant = "exactly_m"
    else:
        probs = []
        for _ in range(M):
            raw = rng.random(2) + 0.05
            probs.append(raw / raw.sum())
        space = ProductSpace(probs)
        density = float(rng.choice([0.1, 0.3, 0.6, 0.9]))
        events = [rng.random(space.size) < density for _ in range(count)]
        variant = "product"
    res = check_bk(space, events)
    bad = [] if res["holds"] else [{"case": index, "variant": variant, "lhs": res["lhs"], "rhs": res["rhs"]}]
    return {"checks": 1, "violations": bad, "variant": variant}


def campaign_bk(seed: int, cases: int = 10_000, threads: int | None = None) -> dict:
    outs = _map(lambda i: _bk_case(seed, i), range(cases), threads)
    return _summary("bk", outs, {"exactly_m_cases": sum(o["variant"] == "exactly_m" for o in outs)})


# star matchings and deletion


def _brute_degree_event(G: Hypergraph, U: tuple, x: float, y: float) -> bool:
    if x <= 0:
        return True
    cands = [e for e in G.edges if set(U) <= set(e)]
    need = math.ceil(x)
    return any(max_degree(list(c), len(U) + 1) <= y for c in combinations(cands, need))


def _sparsifier_case(seed: int, index: int) -> dict:
    rng = _case_rng(seed, "sparsifier", index)
    G = random_hypergraph(rng)
    k = G.k
    j = int(rng.integers(1, k))
    x = float(rng.choice([0.5, 1.0, 1.5, 2.0, 2.5, 3.0]))
    y = float(delta(G, j + 1) + int(rng.integers(0, 2)))
    ell = int(rng.integers(1, k + 1))
    mode = "vertex" if rng.random() < 0.5 else "overlap"
    if mode == "vertex":
        ell = 1
    bad, checks = [], 0

    def fail(kind, **info):
        bad.append({"case": index, "kind": kind, "j": j, "x": x, "y": y, "mode": mode, "ell": ell, **info})

    res = sparsify(G, j, x, y, mode, ell)
    problems = res.matching.verify()
    checks += 4
    if problems:
        fail("invalid_star", detail=problems[:3])
    if not res.matching.maximal:
        fail("search_cap")
    if not res.degree_ok:
        fail("degree_postcondition", delta_after=res.delta_j_after)
    if not res.budget_ok:
        fail("deletion_budget", deleted=len(res.deleted), budget=res.budget)
    small = G.num_edges <= 12
    if small:
        checks += 1
        if addable_star_exists(res.matching):
            fail("not_maximal")
    if mode == "overlap" and ell == 1:
        checks += 1
        other = greedy_star_matching(G, j, x, y, "vertex", 1)
        if other.stars != res.matching.stars:
            fail("mode_mismatch")
    # degree event against brute force
    centre = tuple(sorted(rng.choice(G.edge(int(rng.integers(G.num_edges))), size=j, replace=False).tolist()))
    y_event = float(rng.integers(1, 4))
    got, exact, witness = check_degree_event(G, centre, x, y_event)
    checks += 1
    if exact and got != _brute_degree_event(G, centre, x, y_event):
        fail("degree_event", centre=list(centre))
    # sufficient matching criterion implies the universal event
    if small:
        z = float(delta(G, ell) + int(rng.integers(0, 2)))
        r = float(rng.integers(0, G.num_edges + 1))
        suff = sparsification_sufficient(G, j, ell, x, r, y, z)["holds"]
        checks += 1
        if suff and not sparsification_exact(G, j, ell, x, r, y, z)["holds"]:
            fail("sparsification_event", r=r, z=z)
    return {"checks": checks, "violations": bad, "stars": len(res.matching), "small": small}


def campaign_sparsifier(seed: int, cases: int = 1000, threads: int | None = None) -> dict:
    outs = _map(lambda i: _sparsifier_case(seed, i), range(cases), threads)
    return _summary("sparsifier", outs, {
        "small_cases": sum(o["small"] for o in outs),
        "nonempty_matchings": sum(o["stars"] > 0 for o in outs),
    })


# nested decomposition


def _decomposition_case(seed: int, index: int) -> dict:
    rng = _case_rng(seed, "decomposition", index)
    n = int(rng.integers(10, 31))
    H = gen_ap(n, 3)
    p = float(rng.choice([0.2, 0.3, 0.4, 0.5, 0.6]))
    kept = np.flatnonzero(rng.random(n) < p) + 1
    G = H.induced(kept)
    if rng.random() < 0.5 and G.num_edges:
        G = G.edge_subgraph(np.flatnonzero(rng.random(G.num_edges) < 0.8))
    q, ell = [(2, 1), (3, 1), (3, 2)][int(rng.integers(0, 3))]
    D = float(delta(H, q)) if H.num_edges else 1.0
    lam = float(rng.choice([1.5, 2.0, 3.0, 5.0]))
    s = float(rng.choice([1.0, 2.0, 4.0]))
    B = min(float(rng.choice([1.0, 2.0])), lam)
    R = {j: lam ** (q - j) * D for j in range(ell, q)}
    Dj = {j: B ** (q - j) * D for j in range(ell, q + 1)}
    S = {j: R[j] / s for j in range(ell, q)}
    mu = expected_weight(H, p)
    t = mu * float(rng.choice([0.25, 0.5, 1.0, 2.0])) if mu > 0 else 1.0
    trace = decompose(G, R, Dj, S, t, 1.0, q, ell, mu)
    bad = []
    if trace.all_events_hold:
        budget = t / (2 * q)
        if not trace.implication_holds:
            bad.append({"case": index, "kind": "implication", "weight": trace.weight, "threshold": mu + t})
        if not all(step.pattern_ok for step in trace.steps):
            bad.append({"case": index, "kind": "degree_pattern"})
        if any(step.deleted > budget for step in trace.steps):
            bad.append({"case": index, "kind": "step_deletions"})
    rules = [s.rule for s in trace.steps[1:]]
    return {"checks": 1 if trace.all_events_hold else 0, "violations": bad, "qualified": trace.all_events_hold,
            "sparsified": "sparsify" in rules}


def campaign_decomposition(seed: int, qualified: int = 1000, threads: int | None = None,
                           max_cases: int = 20_000, batch: int = 512) -> dict:
    """Run cases in fixed batches until ``qualified`` runs had every good event hold."""
    outs: list = []
    while len(outs) < max_cases:
        start = len(outs)
        outs += _map(lambda i: _decomposition_case(seed, i), range(start, min(start + batch, max_cases)), threads)
        if sum(o["qualified"] for o in outs) >= qualified:
            break
    hits = np.cumsum([o["qualified"] for o in outs])
    cut = int(np.searchsorted(hits, qualified) + 1) if hits.size and hits[-1] >= qualified else len(outs)
    outs = outs[:cut]
    summary = _summary("decomposition", outs, {
        "qualified_runs": sum(o["qualified"] for o in outs),
        "qualified_with_deletion": sum(o["qualified"] and o["sparsified"] for o in outs),
        "target": qualified,
    })
    if summary["stats"]["qualified_runs"] < qualified:
        summary["violation_count"] += 1
        summary["violations"].append({"kind": "too_few_qualified_runs", "found": summary["stats"]["qualified_runs"]})
    return summary


# bound validity against the exact oracle


def bound_grid_instances(ns=range(12, 21)) -> list[tuple[str, Hypergraph]]:
    out = []
    for n in ns:
        out.append((f"ap3_n{n}", gen_ap(n, 3)))
        out.append((f"ap4_n{n}", gen_ap(n, 4)))
        out.append((f"schur_n{n}", gen_schur(n)))
    return out


def bound_reports(H: Hypergraph, p: float, eps: float, hist: SubsetHistogram | None = None,
                  profile=None) -> dict:
    """Every hypergraph-level bound at threshold (1 + eps) mu, keyed by theorem id."""
    profile = profile or degree_profile(H)
    st = structure_from_hypergraph(H, p, profile=profile)
    mu, N = st.mu, st.N
    reports = {"randinduced": bound_app_randinduced(H, p, eps, profile=profile)}
    if mu <= 0:
        return reports
    t = eps * mu
    r = st.q - st.ell + 1
    alpha, tau = 1.0 / st.q, st.q / (2 * st.k)
    A = _min_balance_A(st, p, alpha)
    if p > N ** (-tau):
        A = max(A, math.log(N) / mu ** (1.0 / r))
    reports["easy_p"] = bound_easy_p(st, eps, p, A, alpha, tau)
    small_A = max([st.at(j) * N**0.5 for j in range(st.ell, st.q)] + [1.0])
    reports["small"] = bound_small(st, t, small_A, 0.5, 1.0)
    reports["randinduced_small"] = bound_app_randinduced_small(H, p, t, profile=profile)
    sched = easy_schedule(st, A, alpha, tau, p)
    reports["basic"] = bound_basic(st, t, sched["R"], sched["D"])
    reports["extended"] = bound_extended(st.replace(D=sched["D"]), t, sched["R"], sched["D_sched"], sched["s"])
    if hist is not None and hist.degree_table is not None:
        s = float(max(st.q - st.ell, 1))
        cert = certify_degree_tail(degree_tail_table(hist, p), int(N), s)
        reports["alternative"] = bound_alternative(st.k, st.ell, st.L, N, mu, t, cert["d"], s, cert["x0"],
                                                   certified=True)
    return reports


def _bounds_instance(name: str, H: Hypergraph, ps, epss) -> dict:
    hist = SubsetHistogram(H, vertex_degrees=True)
    profile = degree_profile(H)
    bad, checks, applicable, informative = [], 0, {}, {}
    for p in ps:
        dist = hist.binomial(p)
        mu = expected_weight(H, p)
        for eps in epss:
            exact = dist.tail((1 + eps) * mu)
            for thm, rep in bound_reports(H, p, eps, hist, profile).items():
                if not rep.applicable:
                    continue
                checks += 1
                applicable[thm] = applicable.get(thm, 0) + 1
                if rep.log_bound < 0:
                    informative[thm] = informative.get(thm, 0) + 1
                if exact > math.exp(rep.log_bound) * (1 + 1e-9) + 1e-15:
                    bad.append({"instance": name, "theorem": thm, "p": p, "eps": eps, "exact": exact,
                                "bound": math.exp(rep.log_bound)})
    return {"checks": checks, "violations": bad, "applicable": applicable, "informative": informative}


def campaign_bounds(seed: int = 0, ns=range(12, 21), ps=(0.1, 0.2, 0.3, 0.5), epss=(0.5, 1.0, 2.0),
                    threads: int | None = None) -> dict:
    """Exact tails never exceed an applicable bound. Deterministic, so the seed is unused."""
    grid = bound_grid_instances(ns)
    outs = _map(lambda item: _bounds_instance(item[0], item[1], ps, epss), grid, threads)
    applicable: dict = {}
    informative: dict = {}
    for o in outs:
        for key, val in o["applicable"].items():
            applicable[key] = applicable.get(key, 0) + val
        for key, val in o["informative"].items():
            informative[key] = informative.get(key, 0) + val
    return _summary("bounds", outs, {"applicable": dict(sorted(applicable.items())),
                                     "informative": dict(sorted(informative.items()))})


CAMPAIGNS = {
    "chernoff": campaign_chernoff,
    "bk": campaign_bk,
    "sparsifier": campaign_sparsifier,
    "decomposition": campaign_decomposition,
    "bounds": campaign_bounds,
}


def run_campaign(name: str, seed: int, threads: int | None = None, **sizes) -> dict:
    if name not in CAMPAIGNS:
        raise ValueError(f"unknown campaign {name!r}; choose from {sorted(CAMPAIGNS)}")
    return CAMPAIGNS[name](seed, threads=threads, **sizes)


def run_all(seed: int, threads: int | None = None, names=None, sizes: dict | None = None) -> list[dict]:
    sizes = sizes or {}
    return [run_campaign(name, seed, threads, **sizes.get(name, {})) for name in (names or CAMPAIGNS)]
