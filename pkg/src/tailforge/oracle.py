"""Exact ground truth for small instances.

Everything here works by exhaustive enumeration. The functions are slow,
simple, and deliberately independent of the closed forms used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .hypergraph import Hypergraph

__all__ = [
    "SubsetHistogram",
    "ExactDistribution",
    "exact_distribution",
    "conditional_mu_oracle",
    "DependencyInstance",
    "ZcResult",
    "exact_zc",
    "check_chernoff",
    "ProductSpace",
    "check_bk",
    "lower_bound_witness",
    "degree_tail_table",
    "certify_degree_tail",
]

MAX_VERTICES = 24
_BLOCK = 1 << 20


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).astype(np.int64)


def _edge_masks(H: Hypergraph) -> np.ndarray:
    masks = np.zeros(H.num_edges, dtype=np.uint32)
    for i, e in enumerate(H.edges):
        m = 0
        for v in e:
            m |= 1 << (v - 1)
        masks[i] = m
    return masks


def _tol(threshold: float) -> float:
    return 1e-12 * max(1.0, abs(threshold))


class SubsetHistogram:
    """Joint counts of (|S|, X(S)) over all vertex subsets S of [N].

    Optionally also counts, for each vertex v, pairs (|S|, deg_v(S)) over the
    subsets containing v. Here deg_v(S) is the number of edges inside S
    through v. One pass serves every p and every m.
    """

    def __init__(self, H: Hypergraph, vertex_degrees: bool = False):
        N = H.n
        if N > MAX_VERTICES:
            raise ValueError(f"exact enumeration refused: N={N} exceeds the cap {MAX_VERTICES}")
        self.N = N
        masks = _edge_masks(H)
        weights = H.weights
        acc: dict[tuple[int, float], int] = {}
        deg_acc = np.zeros((N + 1, N + 1, H.num_edges + 1), dtype=np.int64) if vertex_degrees else None
        incident = [np.flatnonzero((masks >> np.uint32(v)) & np.uint32(1)) for v in range(N)]
        total = 1 << N
        for start in range(0, total, _BLOCK):
            subsets = np.arange(start, min(total, start + _BLOCK), dtype=np.uint32)
            sizes = _popcount(subsets)
            inside = np.zeros((masks.size, subsets.size), dtype=bool)
            for i, m in enumerate(masks):
                inside[i] = (subsets & m) == m
            if H.unit_weights:
                values = inside.sum(axis=0).astype(np.float64)
            else:
                values = np.zeros(subsets.size)
                for i in range(masks.size):
                    values += weights[i] * inside[i]
            keys, counts = np.unique(np.stack([sizes.astype(np.float64), values]), axis=1, return_counts=True)
            for (c, x), cnt in zip(keys.T.tolist(), counts.tolist()):
                acc[(int(c), x)] = acc.get((int(c), x), 0) + cnt
            if vertex_degrees:
                for v in range(N):
                    has = ((subsets >> np.uint32(v)) & np.uint32(1)).astype(bool)
                    deg = inside[incident[v]].sum(axis=0)
                    np.add.at(deg_acc[v], (sizes[has], deg[has]), 1)
        self.table = acc
        self.degree_table = deg_acc

    def values(self) -> np.ndarray:
        return np.array(sorted({x for _, x in self.table}))

    def binomial(self, p: float) -> "ExactDistribution":
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        mass: dict[float, list[float]] = {}
        for (c, x), cnt in self.table.items():
            mass.setdefault(x, []).append(cnt * _binom_weight(p, c, self.N))
        return ExactDistribution.from_mass(mass)

    def uniform(self, m: int) -> "ExactDistribution":
        if not 0 <= m <= self.N:
            raise ValueError("m must lie in [0, N]")
        denom = math.comb(self.N, m)
        mass: dict[float, list[float]] = {}
        for (c, x), cnt in self.table.items():
            if c == m:
                mass.setdefault(x, []).append(cnt / denom)
        return ExactDistribution.from_mass(mass)


def _binom_weight(p: float, c: int, N: int) -> float:
    if p == 0.0:
        return 1.0 if c == 0 else 0.0
    if p == 1.0:
        return 1.0 if c == N else 0.0
    return math.exp(c * math.log(p) + (N - c) * math.log1p(-p))


@dataclass(frozen=True)
class ExactDistribution:
    support: np.ndarray
    pmf: np.ndarray
    mean: float
    variance: float

    @classmethod
    def from_mass(cls, mass: dict) -> "ExactDistribution":
        xs = sorted(mass)
        pmf = np.array([math.fsum(mass[x]) for x in xs])
        support = np.array(xs, dtype=np.float64)
        mean = math.fsum((support * pmf).tolist())
        var = math.fsum((((support - mean) ** 2) * pmf).tolist())
        return cls(support, pmf, mean, var)

    def tail(self, threshold: float) -> float:
        """Pr(X >= threshold), with a relative tolerance of 1e-12 on the comparison."""
        sel = self.support >= threshold - _tol(threshold)
        return min(1.0, math.fsum(self.pmf[sel].tolist()))

    def tails(self) -> dict[float, float]:
        return {float(x): self.tail(float(x)) for x in self.support}


def exact_distribution(H: Hypergraph, p: float | None = None, m: int | None = None) -> ExactDistribution:
    if (p is None) == (m is None):
        raise ValueError("give exactly one of p (binomial) or m (uniform)")
    hist = SubsetHistogram(H)
    return hist.binomial(p) if p is not None else hist.uniform(m)


def conditional_mu_oracle(H: Hypergraph, p: float) -> tuple[float, tuple[float, ...]]:
    """Mean weight and the maximised conditional means, by literal enumeration.

    For each j-set U, the conditional mean is averaged over every completion T
    of U inside [N] by a random vertex subset. Edges through U are found by
    plain set containment.
    """
    N = H.n
    if N > MAX_VERTICES:
        raise ValueError("too many vertices for the conditional oracle")
    edge_sets = [frozenset(e) for e in H.edges]
    mean = SubsetHistogram(H).binomial(p).mean
    result = []
    for j in range(1, H.k + 1):
        best = 0.0
        for U in combinations(range(1, N + 1), j):
            Uset = set(U)
            through = [f for f in edge_sets if Uset <= f]
            if not through:
                continue
            rest = [v for v in range(1, N + 1) if v not in Uset]
            pos = {v: i for i, v in enumerate(rest)}
            free = np.arange(1 << len(rest), dtype=np.uint32)
            sizes = _popcount(free)
            probs = np.array([_binom_weight(p, int(c), len(rest)) for c in range(len(rest) + 1)])[sizes]
            count = np.zeros(free.size)
            for f in through:
                need = 0
                for v in f - Uset:
                    need |= 1 << pos[v]
                count += (free & np.uint32(need)) == need
            best = max(best, math.fsum((probs * count).tolist()))
        result.append(best)
    return mean, tuple(result)


# dependency instances and the capped maximum


@dataclass
class DependencyInstance:
    """Nonnegative variables on a small product space.

    ``factor_probs[i]`` is the distribution of coordinate i. Variable ``a``
    depends on the coordinates in ``supports[a]``, and ``tables[a]`` holds its
    value for each joint assignment of those coordinates, in C order.
    ``related`` is a symmetric boolean matrix with a true diagonal, and ``cap``
    is the cap C.
    """

    factor_probs: list
    supports: list
    tables: list
    related: np.ndarray
    cap: float

    def __post_init__(self):
        self.factor_probs = [np.asarray(pr, dtype=np.float64) for pr in self.factor_probs]
        for pr in self.factor_probs:
            if abs(pr.sum() - 1.0) > 1e-12 or np.any(pr < 0):
                raise ValueError("factor probabilities must be a distribution")
        self.related = np.asarray(self.related, dtype=bool)
        size = len(self.supports)
        if self.related.shape != (size, size):
            raise ValueError("relation shape mismatch")
        if not np.array_equal(self.related, self.related.T) or not self.related.diagonal().all():
            raise ValueError("relation must be symmetric and reflexive")
        for a in range(size):
            for b in range(size):
                if not self.related[a, b] and set(self.supports[a]) & set(self.supports[b]):
                    raise ValueError(f"unrelated variables {a}, {b} share coordinates")
        self.tables = [np.asarray(t, dtype=np.float64) for t in self.tables]
        for a, (sup, tab) in enumerate(zip(self.supports, self.tables)):
            shape = tuple(len(self.factor_probs[i]) for i in sup)
            if tab.shape != shape:
                raise ValueError(f"table {a} has shape {tab.shape}, expected {shape}")
            if np.any(tab < 0):
                raise ValueError("variables must be nonnegative")
        if self.cap <= 0:
            raise ValueError("cap must be positive")

    @property
    def size(self) -> int:
        return len(self.supports)

    def outcomes(self) -> tuple[np.ndarray, np.ndarray]:
        """All joint outcomes with probabilities, and the ``(outcomes, size)`` value matrix."""
        sizes = [len(pr) for pr in self.factor_probs]
        grid = np.array(list(product(*[range(s) for s in sizes])), dtype=np.int64).reshape(-1, len(sizes))
        probs = np.ones(grid.shape[0])
        for i, pr in enumerate(self.factor_probs):
            probs = probs * pr[grid[:, i]]
        values = np.zeros((grid.shape[0], self.size))
        for a, (sup, tab) in enumerate(zip(self.supports, self.tables)):
            values[:, a] = tab[tuple(grid[:, i] for i in sup)] if sup else tab[()]
        return probs, values

    def expected_sum(self) -> float:
        probs, values = self.outcomes()
        return math.fsum((probs[:, None] * values).ravel().tolist())


@dataclass(frozen=True)
class ZcResult:
    probs: np.ndarray
    values: np.ndarray

    def tail(self, threshold: float) -> float:
        sel = self.values >= threshold - _tol(threshold)
        return min(1.0, math.fsum(self.probs[sel].tolist()))


def _zc_enumerate(values: np.ndarray, related: np.ndarray, cap: float) -> np.ndarray:
    size = values.shape[1]
    ids = np.arange(1 << size, dtype=np.int64)
    member = ((ids[:, None] >> np.arange(size)) & 1).astype(bool)  # subsets x size
    totals = values @ member.T
    feasible = np.ones_like(totals, dtype=bool)
    slack = cap * (1 + 1e-12)
    for beta in range(size):
        load = values @ (member & related[:, beta][None, :]).T
        feasible &= ~member[:, beta][None, :] | (load <= slack)
    return np.where(feasible, totals, -np.inf).max(axis=1)


def _zc_branch(row: np.ndarray, related: np.ndarray, cap: float) -> float:
    size = row.size
    order = np.argsort(-row, kind="stable")
    suffix = np.concatenate([np.cumsum(row[order][::-1])[::-1], [0.0]])
    slack = cap * (1 + 1e-12)
    best = 0.0

    def grow(pos: int, chosen: list, load: np.ndarray, total: float):
        nonlocal best
        if total + suffix[pos] <= best:
            return
        if pos == size:
            best = max(best, total)
            return
        a = order[pos]
        new_load = load + row[a] * related[a]
        # Monotone constraint: once violated, every superset is infeasible.
        if new_load[a] <= slack and all(new_load[b] <= slack for b in chosen):
            grow(pos + 1, chosen + [a], new_load, total + row[a])
        grow(pos + 1, chosen, load, total)

    grow(0, [], np.zeros(size), 0.0)
    return best


def exact_zc(instance: DependencyInstance, method: str = "enumerate") -> ZcResult:
    if instance.size > 12:
        raise ValueError("exact maximisation refused: more than 12 variables")
    probs, values = instance.outcomes()
    if method == "enumerate":
        zc = _zc_enumerate(values, instance.related, instance.cap)
    elif method == "branch":
        zc = np.array([_zc_branch(row, instance.related.astype(np.float64), instance.cap) for row in values])
    else:
        raise ValueError(f"unknown method {method!r}")
    return ZcResult(probs, zc)


def check_chernoff(instance: DependencyInstance, mu: float, t: float) -> dict:
    from .bounds import bound_chernoff

    expected = instance.expected_sum()
    if expected > mu * (1 + 1e-12) + 1e-15:
        raise ValueError(f"sum of means {expected} exceeds mu={mu}")
    if t <= 0:
        raise ValueError("t must be positive")
    lhs = exact_zc(instance).tail(mu + t)
    report = bound_chernoff(mu, instance.cap, t)
    forms = report.forms
    holds = all(lhs <= math.exp(v) * (1 + 1e-9) + 1e-15 for v in forms.values())
    return {
        "kind": "chernoff",
        "inputs": {"mu": mu, "t": t, "cap": instance.cap, "size": instance.size},
        "holds": bool(holds and report.chain_ok),
        "lhs": lhs,
        "rhs": math.exp(report.log_bound),
        "forms": {k: math.exp(v) for k, v in forms.items()},
        "chain_ok": report.chain_ok,
    }


# disjoint occurrence


class ProductSpace:
    """Finite product grid with an outcome measure.

    The measure defaults to the product of the factor distributions. An explicit
    probability vector over the grid (in C order) may be given instead, for
    example the uniform measure on outcomes with exactly m ones.
    """

    def __init__(self, factor_probs, outcome_probs=None):
        self.factor_probs = [np.asarray(pr, dtype=np.float64) for pr in factor_probs]
        self.shape = tuple(len(pr) for pr in self.factor_probs)
        if len(self.shape) > 12 or any(s > 4 for s in self.shape):
            raise ValueError("product space caps exceeded (at most 12 factors of size at most 4)")
        for pr in self.factor_probs:
            if abs(pr.sum() - 1.0) > 1e-12 or np.any(pr < 0):
                raise ValueError("factor probabilities must sum to 1")
        if outcome_probs is None:
            grid = np.ones(self.shape)
            for i, pr in enumerate(self.factor_probs):
                view = [1] * len(self.shape)
                view[i] = len(pr)
                grid = grid * pr.reshape(view)
            self.probs = grid.ravel()
        else:
            self.probs = np.asarray(outcome_probs, dtype=np.float64).ravel()
            if self.probs.size != math.prod(self.shape) or abs(self.probs.sum() - 1.0) > 1e-12:
                raise ValueError("outcome probabilities must cover the grid and sum to 1")

    @classmethod
    def exactly_m(cls, M: int, m: int) -> "ProductSpace":
        shape = (2,) * M
        ones = np.array([bin(i).count("1") for i in range(1 << M)])
        # C order puts coordinate 0 in the most significant bit; popcount is symmetric.
        probs = (ones == m).astype(np.float64)
        probs /= probs.sum()
        return cls([np.array([0.5, 0.5])] * M, probs)

    @property
    def M(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return self.probs.size

    def outcome_grid(self) -> np.ndarray:
        return np.array(list(product(*[range(s) for s in self.shape])), dtype=np.int64).reshape(-1, self.M)

    def restriction(self, event: np.ndarray, coords) -> np.ndarray:
        """Outcomes w such that every outcome agreeing with w on ``coords`` lies in the event."""
        arr = np.asarray(event, dtype=bool).reshape(self.shape)
        others = tuple(i for i in range(self.M) if i not in set(coords))
        if others:
            arr = np.broadcast_to(arr.all(axis=others, keepdims=True), self.shape)
        return arr.ravel()

    def probability(self, event: np.ndarray) -> float:
        return math.fsum(self.probs[np.asarray(event, dtype=bool)].tolist())


def _to_bits(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr.astype(bool), bitorder="little").tobytes(), "little")


def _from_bits(bits: int, size: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def disjoint_occurrence(space: ProductSpace, events) -> np.ndarray:
    """Membership of the disjoint-occurrence event for each outcome.

    Restriction is monotone in the index set. So an outcome belongs iff there
    are disjoint sets I_1..I_{c-1} such that w lies in E_i restricted to I_i,
    and w lies in the last event restricted to all remaining coordinates.
    """
    M, count = space.M, len(events)
    if count > 4:
        raise ValueError("at most 4 events supported")
    full = (1 << M) - 1
    witness = []
    for ev in events:
        table = {}
        for mask in range(full + 1):
            coords = [i for i in range(M) if mask >> i & 1]
            table[mask] = _to_bits(space.restriction(ev, coords))
        witness.append(table)

    @lru_cache(maxsize=None)
    def reach(index: int, free: int) -> int:
        if index == count - 1:
            return witness[index][free]
        acc = 0
        sub = free
        while True:
            here = witness[index][sub]
            if here:
                acc |= here & reach(index + 1, free & ~sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
        return acc

    return _from_bits(reach(0, full), space.size)


def check_bk(space: ProductSpace, events) -> dict:
    if not events:
        raise ValueError("need at least one event")
    box = disjoint_occurrence(space, events)
    lhs = space.probability(box)
    rhs = math.prod(space.probability(ev) for ev in events)
    return {
        "kind": "bk",
        "inputs": {"M": space.M, "events": len(events)},
        "holds": bool(lhs <= rhs * (1 + 1e-12) + 1e-15),
        "lhs": lhs,
        "rhs": rhs,
    }


# constructive lower bound


def lower_bound_witness(H: Hypergraph, p: float, target: float) -> dict:
    """Greedy dense vertex set U with w(H[U]) >= target.

    Pr(X >= target) >= Pr(U inside the random set) = p^|U|.
    """
    total = H.total_weight()
    if target > total + _tol(target):
        raise ValueError(f"target {target} exceeds total weight {total}")
    chosen: list[int] = []
    if target <= 0:
        return {"U": chosen, "log_bound": 0.0, "weight": 0.0}
    weights = H.weights
    missing = H.sizes.astype(np.int64).copy()
    inside = 0.0
    in_set = np.zeros(H.n + 1, dtype=bool)
    while inside < target - _tol(target):
        best, best_key = None, None
        for v in range(1, H.n + 1):
            if in_set[v]:
                continue
            inc = H.incident(v)
            if inc.size == 0:
                continue
            gain = float(weights[inc][missing[inc] == 1].sum())
            progress = float((weights[inc] / missing[inc]).sum())
            key = (gain, progress, -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        if best is None:
            raise ValueError("target unreachable")
        in_set[best] = True
        chosen.append(best)
        inc = H.incident(best)
        missing[inc] -= 1
        done = inc[missing[inc] == 0]
        inside += float(weights[done].sum())
    log_bound = len(chosen) * math.log(p) if p > 0 else -math.inf
    return {"U": sorted(chosen), "log_bound": log_bound, "weight": inside}


# degree tails for the alternative small-mean bound


def degree_tail_table(hist: SubsetHistogram, p: float) -> np.ndarray:
    """``psi[x]`` = sum over vertices v of Pr(v kept and at least x kept edges through v)."""
    if hist.degree_table is None:
        raise ValueError("histogram built without vertex degrees")
    N = hist.N
    weights = np.array([_binom_weight(p, c, N) for c in range(N + 1)])
    per_degree = np.einsum("vcd,c->d", hist.degree_table.astype(np.float64), weights)
    return np.cumsum(per_degree[::-1])[::-1]


def certify_degree_tail(psi: np.ndarray, N: int, s: float) -> dict:
    """Smallest integer x0 and the largest d with psi[x] <= N^(-d x^(1/s)) for all x >= x0.

    The tail is a step function: for real x in (m-1, m] it equals psi[m], so it
    is enough to check integers. x0 is the first m after which psi stays below 1.
    """
    top = len(psi) - 1
    start = top + 1
    for m in range(top, 0, -1):
        if psi[m] >= 1.0:
            break
        start = m
    start = max(start, 1)
    rates = [-math.log(psi[m]) / (m ** (1.0 / s) * math.log(N)) for m in range(start, top + 1) if psi[m] > 0]
    d = min(rates) if rates else 1.0
    return {"x0": float(start), "d": d, "s": s}
