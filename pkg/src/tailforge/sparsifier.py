"""Star matchings, degree reduction by deletion, and the nested decomposition.

A (j, x, y)-star is a centre ``U`` of size j with ceil(x) spikes: edges
containing ``U`` whose (j+1)-degree among themselves is at most y. Stars in a
matching must not interact. In ``vertex`` mode spikes of different stars are
vertex-disjoint. In ``overlap`` mode two spikes from different stars share
fewer than ``ell`` vertices.

Edges are referenced by their index in the host hypergraph.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .hypergraph import Hypergraph, delta

__all__ = [
    "Star",
    "StarMatching",
    "SparsifyResult",
    "DecompositionStep",
    "DecompositionTrace",
    "max_degree",
    "greedy_star_matching",
    "addable_star_exists",
    "sparsify",
    "decompose",
    "check_degree_event",
    "sparsification_sufficient",
    "sparsification_exact",
    "check_sparsification_event",
]

# Search-node cap for exact spike selection before giving up on completeness.
_NODE_CAP = 200_000
_EXACT_DEGREE_CAP = 20
_EXACT_EVENT_EDGES = 12


def max_degree(edges: Sequence[tuple], j: int) -> int:
    """Largest number of the given edges sharing a common j-set (0 if none)."""
    if j <= 0:
        return len(edges)
    counts = Counter(sub for e in edges for sub in combinations(e, j))
    return max(counts.values(), default=0)


@dataclass(frozen=True)
class Star:
    centre: tuple
    spikes: tuple  # edge indices

    def vertices(self, host: Hypergraph) -> frozenset:
        return frozenset(v for i in self.spikes for v in host.edge(i))


@dataclass
class StarMatching:
    host: Hypergraph
    j: int
    x: float
    y: float
    mode: str
    ell: int
    stars: list = field(default_factory=list)
    maximal: bool = True

    def __len__(self) -> int:
        return len(self.stars)

    def verify(self) -> list[str]:
        """Re-check every star and the pairwise disjointness rule; returns violations."""
        need = math.ceil(self.x)
        out = []
        for st in self.stars:
            spikes = [self.host.edge(i) for i in st.spikes]
            if len(set(st.spikes)) != need:
                out.append(f"star {st.centre}: {len(set(st.spikes))} spikes, need {need}")
            if any(not set(st.centre) <= set(e) for e in spikes):
                out.append(f"star {st.centre}: spike misses the centre")
            if max_degree(spikes, self.j + 1) > self.y:
                out.append(f"star {st.centre}: spike degree above y")
        for a, b in combinations(self.stars, 2):
            if not _compatible_sets(self.host, a.spikes, b.spikes, self.mode, self.ell):
                out.append(f"stars {a.centre} and {b.centre} interact")
        return out

    def to_dict(self) -> dict:
        return {
            "j": self.j, "x": self.x, "y": self.y, "mode": self.mode, "ell": self.ell, "maximal": self.maximal,
            "stars": [{"centre": list(s.centre), "spikes": [list(self.host.edge(i)) for i in s.spikes]}
                      for s in self.stars],
        }


def _compatible_sets(host, spikes_a, spikes_b, mode, ell) -> bool:
    limit = 1 if mode == "vertex" else ell
    for i in spikes_a:
        ea = set(host.edge(i))
        for k in spikes_b:
            if len(ea.intersection(host.edge(k))) >= limit:
                return False
    return True


def _check_mode(mode: str, ell: int):
    if mode not in ("vertex", "overlap"):
        raise ValueError("mode must be 'vertex' or 'overlap'")
    if ell < 1:
        raise ValueError("ell must be at least 1")


def _centres(edges: Sequence[tuple], j: int) -> dict:
    """Map each j-set inside some edge to the sorted indices of the edges containing it."""
    table = defaultdict(list)
    for idx, e in enumerate(edges):
        for sub in combinations(e, j):
            table[sub].append(idx)
    return table


def _select_spikes(candidates: list, edges: Sequence[tuple], j: int, need: int, y: float):
    """Pick ``need`` candidates (in index order) whose (j+1)-degree stays <= y.

    Greedy first; if that falls short, a complete backtracking search.
    Returns (choice or None, complete) where ``complete`` is False only when
    the search hit the node cap without an answer.
    """
    if len(candidates) < need:
        return None, True
    counts: Counter = Counter()
    chosen = []
    for idx in candidates:
        subs = list(combinations(edges[idx], j + 1))
        if all(counts[s] + 1 <= y for s in subs):
            chosen.append(idx)
            counts.update(subs)
            if len(chosen) == need:
                return tuple(chosen), True
    nodes = 0
    counts = Counter()
    stack: list = []

    def grow(pos: int) -> bool:
        nonlocal nodes
        if len(stack) == need:
            return True
        if len(candidates) - pos < need - len(stack):
            return False
        for i in range(pos, len(candidates)):
            if len(candidates) - i < need - len(stack):
                return False
            nodes += 1
            if nodes > _NODE_CAP:
                raise _SearchCap
            subs = list(combinations(edges[candidates[i]], j + 1))
            if all(counts[s] + 1 <= y for s in subs):
                counts.update(subs)
                stack.append(candidates[i])
                if grow(i + 1):
                    return True
                stack.pop()
                counts.subtract(subs)
        return False

    try:
        found = grow(0)
    except _SearchCap:
        return None, False
    return (tuple(stack), True) if found else (None, True)


class _SearchCap(Exception):
    pass


def greedy_star_matching(G: Hypergraph, j: int, x: float, y: float, mode: str = "vertex",
                         ell: int = 1) -> StarMatching:
    """Maximal star matching from one lexicographic pass over centres.

    Each centre gets stars from its still-compatible edges in index order until
    none fits. Compatibility only shrinks as stars are added, so a centre
    rejected once stays rejected and a single pass yields a maximal matching.
    """
    _check_mode(mode, ell)
    if j < 1:
        raise ValueError("j must be at least 1")
    if not (x > 0 and y > 0):
        raise ValueError("x and y must be positive")
    need = math.ceil(x)
    edges = G.edges
    table = _centres(edges, j)
    matching = StarMatching(G, j, x, y, mode, ell)
    used_vertices: set = set()
    blocked_sets: set = set()  # ell-subsets of chosen spikes (overlap mode)
    for centre in sorted(table):
        cands = table[centre]
        # When ell > j one centre can carry several stars.
        while len(cands) >= need:
            if mode == "vertex":
                allowed = [i for i in cands if used_vertices.isdisjoint(edges[i])]
            else:
                allowed = [i for i in cands if all(s not in blocked_sets for s in combinations(edges[i], ell))]
            choice, complete = _select_spikes(allowed, edges, j, need, y)
            if not complete:
                matching.maximal = False
            if choice is None:
                break
            matching.stars.append(Star(centre, choice))
            for i in choice:
                if mode == "vertex":
                    used_vertices.update(edges[i])
                else:
                    blocked_sets.update(combinations(edges[i], ell))
    return matching


def addable_star_exists(matching: StarMatching) -> bool:
    """Exhaustive check for a star compatible with every star in the matching."""
    G, j, need = matching.host, matching.j, math.ceil(matching.x)
    edges = G.edges
    taken = [i for s in matching.stars for i in s.spikes]
    for centre, cands in _centres(edges, j).items():
        allowed = [i for i in cands
                   if _compatible_sets(G, (i,), taken, matching.mode, matching.ell)]
        for combo in combinations(allowed, need):
            if max_degree([edges[i] for i in combo], j + 1) <= matching.y:
                return True
    return False


@dataclass
class SparsifyResult:
    kept: Hypergraph
    kept_index: np.ndarray
    deleted: np.ndarray
    matching: StarMatching
    budget: float
    delta_j_after: int
    degree_ok: bool
    budget_ok: bool
    postcondition_applies: bool

    def to_dict(self) -> dict:
        return {
            "deleted": int(len(self.deleted)), "budget": self.budget, "stars": len(self.matching),
            "delta_j_after": self.delta_j_after, "degree_ok": self.degree_ok, "budget_ok": self.budget_ok,
            "postcondition_applies": self.postcondition_applies,
        }


def sparsify(G: Hypergraph, j: int, x: float, y: float, mode: str = "vertex", ell: int = 1) -> SparsifyResult:
    """Delete every edge that touches a star of a maximal matching.

    Touching means sharing a vertex (vertex mode) or at least ``ell`` vertices
    (overlap mode) with some spike. When delta_{j+1}(G) <= y the result has
    delta_j <= ceil(x) - 1. The deletion count is compared with
    |M| ceil(x) k delta_1(G) in vertex mode and |M| ceil(x) binom(k, ell) delta_ell(G) otherwise.
    """
    matching = greedy_star_matching(G, j, x, y, mode, ell)
    edges = G.edges
    need = math.ceil(x)
    k = G.k
    if mode == "vertex":
        touched = {v for s in matching.stars for i in s.spikes for v in edges[i]}
        drop = np.array([not touched.isdisjoint(e) for e in edges], dtype=bool)
        budget = len(matching) * need * k * (delta(G, 1) if G.num_edges else 0)
    else:
        blocked = {sub for s in matching.stars for i in s.spikes for sub in combinations(edges[i], ell)}
        drop = np.array([any(sub in blocked for sub in combinations(e, ell)) for e in edges], dtype=bool)
        budget = len(matching) * need * math.comb(k, ell) * (delta(G, ell) if G.num_edges and ell <= k else 0)
    keep_idx = np.flatnonzero(~drop)
    kept = G.edge_subgraph(keep_idx)
    after = delta(kept, j) if kept.num_edges and j <= kept.k else 0
    applies = (j + 1 > k) or G.num_edges == 0 or delta(G, j + 1) <= y
    return SparsifyResult(kept, keep_idx, np.flatnonzero(drop), matching, float(budget), int(after),
                          after <= need - 1, int(drop.sum()) <= budget, applies)


# decomposition


@dataclass
class DecompositionStep:
    level: int
    rule: str  # keep | keep_capped | sparsify
    deleted: int
    degrees: dict
    pattern_ok: bool


@dataclass
class DecompositionTrace:
    steps: list
    events: dict  # label -> list of {"level", "holds", ...}
    weight: float
    final_weight: float
    threshold: float | None
    degree_cap_ok: bool
    all_events_hold: bool
    implication_holds: bool | None

    def failing_events(self) -> list[str]:
        return sorted({lab for lab, recs in self.events.items() for r in recs if not r["holds"]})

    def to_dict(self) -> dict:
        return {
            "steps": [s.__dict__ for s in self.steps],
            "events": self.events,
            "weight": self.weight,
            "final_weight": self.final_weight,
            "threshold": self.threshold,
            "degree_cap_ok": self.degree_cap_ok,
            "all_events_hold": self.all_events_hold,
            "implication_holds": self.implication_holds,
            "failing_events": self.failing_events(),
        }


def _deg(H: Hypergraph, i: int) -> int:
    return delta(H, i) if H.num_edges and i <= H.k else 0


def decompose(G: Hypergraph, R: Mapping, D: Mapping, S: Mapping, t: float, L: float, q: int, ell: int = 1,
              mu: float | None = None) -> DecompositionTrace:
    """Build G = J_q >= ... >= J_ell and check the good events the construction relies on.

    R_j (ell <= j < q), D_j (ell <= j <= q), S_j (ell <= j < q); R_q = Q_q = D_q and
    Q_j = max(S_j, D_j). Event labels: ``weight`` (low ell-degree forces
    w < mu + t/2), ``degree_chain`` (delta_{i+1} <= R_{i+1} forces delta_i <= R_i),
    ``capped_chain`` (delta_{j+1} <= Q_{j+1} forces delta_j <= Q_j),
    ``sparsification`` (deletion of at most t/(2Lq) edges reaches delta_j <= Q_j).
    When every checked event holds, w(G) < mu + t is asserted.
    """
    if not t > 0 or not L > 0:
        raise ValueError("t and L must be positive")
    if not 1 <= ell <= q:
        raise ValueError("need 1 <= ell <= q")
    Rf = {i: float(R[i]) for i in range(ell, q)}
    Df = {i: float(D[i]) for i in range(ell, q + 1)}
    Rf[q] = Df[q]
    Q = {i: max(float(S[i]), Df[i]) for i in range(ell, q)}
    Q[q] = Df[q]
    mode = "vertex" if ell == 1 else "overlap"
    budget = t / (2 * L * q)
    events: dict = {"weight": [], "degree_chain": [], "capped_chain": [], "sparsification": []}
    weight = G.total_weight()
    cap_ok = _deg(G, q) <= Df[q]

    for i in range(ell, q):
        lo, hi = _deg(G, i), _deg(G, i + 1)
        events["degree_chain"].append({"level": i, "holds": not (hi <= Rf[i + 1] and lo > Rf[i]),
                                       "delta_i": lo, "delta_next": hi})

    def pattern(J, j):
        degs = {i: _deg(J, i) for i in range(ell, q + 1)}
        ok = all(degs[i] <= (Rf[i] if i < j else min(Q[i], Rf[i])) for i in degs)
        return degs, ok

    J = G
    degs, ok = pattern(J, q)
    steps = [DecompositionStep(q, "start", 0, degs, ok)]
    for j in range(q - 1, ell - 1, -1):
        deleted = 0
        if Q[j] >= Rf[j]:
            rule = "keep"
        elif Q[j + 1] > Df[j + 1]:
            rule = "keep_capped"
            hi, lo = _deg(J, j + 1), _deg(J, j)
            events["capped_chain"].append({"level": j, "holds": not (hi <= Q[j + 1] and lo > Q[j]),
                                           "delta_j": lo, "delta_next": hi})
        else:
            rule = "sparsify"
            pre = _deg(J, j + 1) <= Q[j + 1] and _deg(J, ell) <= Rf[ell]
            res = sparsify(J, j, Q[j], Df[j + 1], mode, ell)
            deleted = len(res.deleted)
            reached = res.delta_j_after <= Q[j] and deleted <= budget
            events["sparsification"].append({"level": j, "holds": (not pre) or reached, "applies": pre,
                                             "deleted": deleted, "budget": budget, "delta_j_after": res.delta_j_after})
            J = res.kept
        degs, ok = pattern(J, j)
        steps.append(DecompositionStep(j, rule, deleted, degs, ok))

    final_w = J.total_weight()
    if _deg(J, ell) <= min(Q[ell], Rf[ell]) and mu is not None:
        events["weight"].append({"level": ell, "holds": final_w < mu + t / 2, "weight": final_w})
    elif mu is not None:
        events["weight"].append({"level": ell, "holds": True, "weight": final_w, "vacuous": True})
    all_hold = cap_ok and all(r["holds"] for recs in events.values() for r in recs) and mu is not None
    implication = (weight < mu + t) if all_hold else None
    return DecompositionTrace(steps, events, weight, final_w, None if mu is None else mu + t, cap_ok,
                              all_hold, implication)


# sample-level event checks


def check_degree_event(G: Hypergraph, U, x: float, y: float) -> tuple[bool, bool, tuple]:
    """Is there K inside Gamma_U(G) with |K| >= x and delta_{|U|+1}(K) <= y?

    Returns (answer, exact, witness edge indices). Exact when |Gamma_U| <= 20 or
    the complete search finishes; a True answer always carries a witness.
    """
    U = tuple(sorted(int(u) for u in U))
    if x <= 0:
        return True, True, ()
    need = math.ceil(x)
    edges = G.edges
    cands = [i for i, e in enumerate(edges) if set(U) <= set(e)]
    if len(cands) < need:
        return False, True, ()
    if len(cands) <= _EXACT_DEGREE_CAP:
        choice, _ = _select_spikes(cands, edges, len(U), need, y)
        return choice is not None, True, choice or ()
    choice, complete = _select_spikes(cands, edges, len(U), need, y)
    return choice is not None, complete or choice is not None, choice or ()


def sparsification_sufficient(Hp: Hypergraph, j: int, ell: int, x: float, r: float, y: float, z: float) -> dict:
    """Matching criterion: a maximal matching of size <= r / (binom(k, ell) ceil(x) z) certifies the event."""
    mode = "vertex" if ell == 1 else "overlap"
    matching = greedy_star_matching(Hp, j, x, y, mode, ell) if Hp.num_edges else None
    size = len(matching) if matching else 0
    limit = r / (math.comb(Hp.k, ell) * math.ceil(x) * z)
    certified = size <= limit and (matching is None or matching.maximal)
    return {"holds": bool(certified), "matching_size": size, "limit": limit}


def sparsification_exact(Hp: Hypergraph, j: int, ell: int, x: float, r: float, y: float, z: float) -> dict:
    """Universal check over all subhypergraphs (at most 12 edges)."""
    E = Hp.num_edges
    if E > _EXACT_EVENT_EDGES:
        raise ValueError(f"exact check limited to {_EXACT_EVENT_EDGES} edges")
    if E == 0:
        return {"holds": True, "witness": None}
    edges = Hp.edges
    masks = np.arange(1 << E, dtype=np.int64)
    pop = np.zeros(1 << E, dtype=np.int64)
    for i in range(E):
        pop += (masks >> i) & 1

    def level_degree(level):
        out = np.zeros(1 << E, dtype=np.int64)
        if level < 1:
            return pop.copy()
        for sub, idxs in _centres(edges, level).items():
            bm = sum(1 << i for i in idxs)
            sel = masks & bm
            cnt = np.zeros(1 << E, dtype=np.int64)
            for i in idxs:
                cnt += (sel >> i) & 1
            np.maximum(out, cnt, out=out)
        return out

    dj, dnext, dell = level_degree(j), level_degree(j + 1), level_degree(ell)
    best = np.where(dj <= x, pop, -1)
    for i in range(E):  # max over submasks
        bit = 1 << i
        has = (masks & bit) != 0
        best[has] = np.maximum(best[has], best[masks[has] ^ bit])
    relevant = (dnext <= y) & (dell <= z)
    bad = relevant & (best < pop - r)
    if bad.any():
        worst = int(np.flatnonzero(bad)[0])
        return {"holds": False, "witness": [list(edges[i]) for i in range(E) if worst >> i & 1]}
    return {"holds": True, "witness": None}


def check_sparsification_event(Hp: Hypergraph, j: int, ell: int, x: float, r: float, y: float,
                               z: float) -> tuple[bool, dict]:
    """Sufficient matching check, falling back to the exhaustive check on small samples."""
    if Hp.num_edges == 0 or r >= Hp.num_edges:
        return True, {"method": "trivial", "exact": True}
    suff = sparsification_sufficient(Hp, j, ell, x, r, y, z)
    if suff["holds"]:
        return True, {"method": "matching", "exact": False, **suff}
    if Hp.num_edges <= _EXACT_EVENT_EDGES:
        ex = sparsification_exact(Hp, j, ell, x, r, y, z)
        return ex["holds"], {"method": "exhaustive", "exact": True, **ex}
    return False, {"method": "matching", "exact": False, **suff}
