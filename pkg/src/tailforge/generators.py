"""Example hypergraph families and subgraph-count models.

Every family uses unordered edges with unit weights. Each ``gen_*(n)`` is
monotone in ``n`` under the identity labelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations

import numpy as np

from .hypergraph import Hypergraph, MuProfile

__all__ = [
    "gen_ap",
    "gen_schur",
    "gen_ell_sum",
    "gen_additive_quadruples",
    "gen_rs_sums",
    "gen_linear_system",
    "gen_complete",
    "PatternGraph",
    "DensityReport",
    "analyze_density",
    "SubgraphModel",
    "model_mu_bounds",
    "count_copies",
    "pair_index",
    "GENERATOR_NAMES",
]

GENERATOR_NAMES = ("ap", "schur", "ellsum", "quad", "rssum", "linsys", "complete", "subgraph-edge", "subgraph-vertex")


def _from_rows(n: int, rows: list | np.ndarray, k: int) -> Hypergraph:
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, k)
    if arr.shape[0] == 0:
        return Hypergraph(n, [], k=k)
    arr = np.sort(arr, axis=1)
    arr = np.unique(arr, axis=0)  # also lex-sorts
    return Hypergraph._trusted(n, np.ascontiguousarray(arr.astype(np.int32)), None, k, 1.0)


def gen_ap(n: int, k: int) -> Hypergraph:
    """k-term arithmetic progressions in [n] as unordered k-sets."""
    if k < 3:
        raise ValueError("k must be at least 3")
    if n < k:
        return Hypergraph(max(n, 0), [], k=k)
    steps = np.arange(k, dtype=np.int32)
    blocks = []
    # Looping over the first term yields rows already in lexicographic order.
    for start in range(1, n + 1):
        top = (n - start) // (k - 1)
        if top < 1:
            continue
        diffs = np.arange(1, top + 1, dtype=np.int32)
        blocks.append(start + diffs[:, None] * steps[None, :])
    rows = np.concatenate(blocks).astype(np.int32)
    return Hypergraph._trusted(n, np.ascontiguousarray(rows), None, k, 1.0)


def ap_edge_count(n: int, k: int) -> int:
    return sum(max(0, n - (k - 1) * d) for d in range(1, n + 1))


def gen_ell_sum(n: int, ell: int) -> Hypergraph:
    """Triples {x, y, z} of distinct elements with x + y = ell * z."""
    if ell < 1:
        raise ValueError("ell must be positive")
    rows = []
    for z in range(1, n + 1):
        total = ell * z
        lo = max(1, total - n)
        xs = np.arange(lo, (total - 1) // 2 + 1)
        if xs.size == 0:
            continue
        ys = total - xs
        ok = (xs != z) & (ys != z) & (ys <= n) & (xs < ys)
        for x, y in zip(xs[ok].tolist(), ys[ok].tolist()):
            rows.append((x, y, z))
    return _from_rows(n, rows, 3)


def gen_schur(n: int) -> Hypergraph:
    """Schur triples {x, y, x + y} with x != y."""
    return gen_ell_sum(n, 1)


def schur_edge_count(n: int) -> int:
    return sum((z - 1) // 2 for z in range(3, n + 1))


def gen_additive_quadruples(n: int) -> Hypergraph:
    """4-sets {a < b < c < d} with a + d = b + c (the only balanced pairing)."""
    rows = []
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            for c in range(b + 1, n + 1):
                d = b + c - a
                if d > n:
                    break
                rows.append((a, b, c, d))
    return _from_rows(n, rows, 4)


def gen_rs_sums(n: int, r: int, s: int) -> Hypergraph:
    """(r+s)-sets that split into an r-part and an s-part with equal sums."""
    if r < 1 or s < 1 or r + s < 3:
        raise ValueError("need r, s >= 1 and r + s >= 3")
    size = r + s
    if n < size:
        return Hypergraph(n, [], k=size)
    sets = np.array(list(combinations(range(1, n + 1), size)), dtype=np.int64)
    total = sets.sum(axis=1)
    hit = np.zeros(sets.shape[0], dtype=bool)
    for side in combinations(range(size), r):
        hit |= 2 * sets[:, list(side)].sum(axis=1) == total
    return _from_rows(n, sets[hit], size)


def _int_det(mat: list[list[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    m = [list(map(int, row)) for row in mat]
    size = len(m)
    if size == 0:
        return 1
    sign, prev = 1, 1
    for i in range(size - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, size) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, size):
            for c in range(i + 1, size):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[-1][-1]


def gen_linear_system(n: int, matrix) -> Hypergraph:
    """Distinct-valued solutions in [n] of ``matrix @ x = 0`` as unordered sets."""
    A = [list(map(int, row)) for row in matrix]
    if not A or any(len(row) != len(A[0]) for row in A):
        raise ValueError("matrix must be a nonempty list of equal-length rows")
    r, k = len(A), len(A[0])
    if r >= k:
        raise ValueError("need fewer equations than variables")
    for cols in combinations(range(k), r):
        if _int_det([[row[c] for c in cols] for row in A]) == 0:
            raise ValueError(f"columns {cols} give a singular {r}x{r} minor")
    free = k - r
    pivot = [[row[c] for c in range(free, k)] for row in A]
    det = _int_det(pivot)
    # adj(B) entries are signed cofactors of the transpose.
    adj = np.zeros((r, r), dtype=object)
    for i in range(r):
        for jj in range(r):
            minor = [[pivot[a][b] for b in range(r) if b != i] for a in range(r) if a != jj]
            adj[i, jj] = (-1) ** (i + jj) * _int_det(minor)
    free_part = np.array([[row[c] for c in range(free)] for row in A], dtype=object)
    coeff = np.array((-adj @ free_part).tolist(), dtype=np.int64)  # r x free
    grids = np.meshgrid(*[np.arange(1, n + 1, dtype=np.int64)] * free, indexing="ij")
    xf = np.stack([g.ravel() for g in grids], axis=1)
    scaled = xf @ coeff.T
    ok = np.all(scaled % det == 0, axis=1)
    xp = scaled[ok] // det
    xf = xf[ok]
    full = np.concatenate([xf, xp], axis=1)
    inrange = np.all((full >= 1) & (full <= n), axis=1)
    full = np.sort(full[inrange], axis=1)
    distinct = np.all(full[:, 1:] != full[:, :-1], axis=1) if k > 1 else np.ones(full.shape[0], bool)
    return _from_rows(n, full[distinct], k)


def gen_complete(n: int, k: int) -> Hypergraph:
    if n < k:
        return Hypergraph(max(n, 0), [], k=k)
    rows = np.array(list(combinations(range(1, n + 1), k)), dtype=np.int32)
    return Hypergraph._trusted(n, rows, None, k, 1.0)


# pattern graphs and subgraph models


def pair_index(a: int, b: int, n: int) -> int:
    """1-based lexicographic index of the pair {a, b} of [n]."""
    if a > b:
        a, b = b, a
    return (a - 1) * n - (a - 1) * a // 2 + (b - a)


def pair_table(n: int) -> np.ndarray:
    """``(C(n,2), 2)`` array of pairs in slot order."""
    return np.array(list(combinations(range(1, n + 1), 2)), dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class PatternGraph:
    """Small simple graph on vertices ``0..v-1``."""

    v: int
    edge_list: tuple[tuple[int, int], ...]

    def __post_init__(self):
        clean = tuple(sorted({(min(a, b), max(a, b)) for a, b in self.edge_list}))
        for a, b in clean:
            if a == b or not (0 <= a < self.v and 0 <= b < self.v):
                raise ValueError(f"bad pattern edge {(a, b)}")
        object.__setattr__(self, "edge_list", clean)

    @classmethod
    def parse(cls, name: str) -> "PatternGraph":
        """Names: ``K3``, ``K1,2`` (star), ``2K2`` (matching), ``C4``, ``P4``."""
        text = name.strip().upper().replace(" ", "")
        if text.startswith("K1,"):
            r = int(text[3:])
            return cls(r + 1, tuple((0, i) for i in range(1, r + 1)))
        if text.endswith("K2") and text[:-2].isdigit():
            r = int(text[:-2])
            return cls(2 * r, tuple((2 * i, 2 * i + 1) for i in range(r)))
        if text.startswith("K") and text[1:].isdigit():
            r = int(text[1:])
            return cls(r, tuple(combinations(range(r), 2)))
        if text.startswith("C") and text[1:].isdigit():
            r = int(text[1:])
            return cls(r, tuple((i, (i + 1) % r) for i in range(r)))
        if text.startswith("P") and text[1:].isdigit():
            r = int(text[1:])
            return cls(r, tuple((i, i + 1) for i in range(r - 1)))
        raise ValueError(f"unknown pattern name {name!r}")

    @property
    def e(self) -> int:
        return len(self.edge_list)

    def degrees(self) -> list[int]:
        deg = [0] * self.v
        for a, b in self.edge_list:
            deg[a] += 1
            deg[b] += 1
        return deg

    @property
    def min_degree(self) -> int:
        return min(self.degrees()) if self.v else 0

    @cached_property
    def labelled_copies(self) -> tuple[frozenset, ...]:
        """Distinct edge sets obtained by relabelling the vertices."""
        seen = set()
        for perm in permutations(range(self.v)):
            seen.add(frozenset((min(perm[a], perm[b]), max(perm[a], perm[b])) for a, b in self.edge_list))
        return tuple(sorted(seen, key=lambda s: sorted(s)))

    @property
    def automorphisms(self) -> int:
        return math.factorial(self.v) // len(self.labelled_copies)


def _canonical(edges: frozenset) -> tuple:
    verts = sorted({x for e in edges for x in e})
    best = None
    for perm in permutations(range(len(verts))):
        relabel = dict(zip(verts, perm))
        form = tuple(sorted((min(relabel[a], relabel[b]), max(relabel[a], relabel[b])) for a, b in edges))
        if best is None or form < best:
            best = form
    return (len(verts), best)


@dataclass(frozen=True)
class DensityReport:
    density: float
    density2: float | None
    balanced: bool
    strictly_balanced: bool
    two_balanced: bool
    strictly_two_balanced: bool
    beta: float
    s: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _density2(edges: int, verts: int) -> float | None:
    if verts >= 3:
        return (edges - 1) / (verts - 2)
    if verts == 2 and edges == 1:
        return 0.5
    return None


def analyze_density(pattern: PatternGraph, cap: int = 8) -> DensityReport:
    """Balancedness flags and the density margin ``beta``.

    For a fixed vertex set the induced subgraph has the most edges, so it is
    enough to scan vertex subsets. The full vertex set also admits ``e - 1``
    edges as a proper subgraph.
    """
    if pattern.e < 1:
        raise ValueError("pattern needs at least one edge")
    if pattern.v > cap:
        raise ValueError(f"pattern has {pattern.v} vertices, above the cap {cap}")
    v, e = pattern.v, pattern.e
    dens = e / v
    dens2 = _density2(e, v)
    balanced = strict = two_bal = strict_two = True
    beta = math.inf
    edge_masks = [(1 << a) | (1 << b) for a, b in pattern.edge_list]
    full = (1 << v) - 1
    for mask in range(1, full + 1):
        vj = bin(mask).count("1")
        inner = sum(1 for em in edge_masks if em & mask == em)
        options = [inner] if mask != full else ([e - 1] if e >= 1 else [])
        for ej in options:
            if ej / vj > dens + 1e-12:
                balanced = False
            if ej / vj >= dens - 1e-12:
                strict = False
            if ej >= 1:
                beta = min(beta, vj * e / v - ej)
            d2 = _density2(ej, vj)
            if d2 is not None and dens2 is not None:
                if d2 > dens2 + 1e-12:
                    two_bal = False
                if d2 >= dens2 - 1e-12:
                    strict_two = False
    if dens2 is None or e < 2:
        two_bal = strict_two = False
    s = min(v - 1, e - pattern.min_degree + 1)
    return DensityReport(dens, dens2, balanced, strict, two_bal, strict_two, beta, s)


def _falling(n: int, r: int) -> int:
    return math.perm(n, r) if 0 <= r <= n else 0


@dataclass(frozen=True)
class SubgraphModel:
    """Copies of ``pattern`` in the random graph on ``n`` vertices.

    ``setup`` selects how the count is cast as a hypergraph problem: ``edge``
    exposes the edge slots of K_n one at a time, ``vertex`` exposes vertices.
    """

    pattern: PatternGraph
    n: int
    setup: str = "edge"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.setup not in ("edge", "vertex"):
            raise ValueError("setup must be 'edge' or 'vertex'")
        if self.pattern.min_degree < 1:
            raise ValueError("pattern must not have isolated vertices")
        if self.n < self.pattern.v:
            raise ValueError("n must be at least the pattern's vertex count")

    def with_setup(self, setup: str) -> "SubgraphModel":
        return SubgraphModel(self.pattern, self.n, setup)

    @property
    def v(self) -> int:
        return self.pattern.v

    @property
    def e(self) -> int:
        return self.pattern.e

    @property
    def s(self) -> int:
        return min(self.v - 1, self.e - self.pattern.min_degree + 1)

    @property
    def ell(self) -> int:
        return 1 if self.setup == "edge" else 2

    @property
    def k(self) -> int:
        return self.e if self.setup == "edge" else self.v

    @property
    def q(self) -> int:
        return self.e - self.pattern.min_degree + 1 if self.setup == "edge" else self.v

    @property
    def N(self) -> int:
        return self.n**2 if self.setup == "edge" else self.n

    @property
    def L(self) -> float:
        return 1.0 if self.setup == "edge" else float(len(self.pattern.labelled_copies))

    @property
    def copies(self) -> int:
        """Number of copies of the pattern in K_n."""
        return _falling(self.n, self.v) // self.pattern.automorphisms

    def mean(self, p: float) -> float:
        return self.copies * p**self.e

    def subgraph_classes(self) -> list[dict]:
        """Isomorphism classes of edge-subsets J of the pattern with their
        number of occurrences, automorphism count, and vertex count."""
        if "classes" not in self._cache:
            if self.e > 16:
                raise ValueError("pattern too large for subgraph enumeration")
            groups: dict = {}
            for size in range(1, self.e + 1):
                for subset in combinations(self.pattern.edge_list, size):
                    key = _canonical(frozenset(subset))
                    groups[key] = groups.get(key, 0) + 1
            classes = []
            for (vj, form), mult in sorted(groups.items()):
                sub = PatternGraph(vj, form)
                classes.append({"edges": len(form), "vertices": vj, "occurrences": mult, "aut": sub.automorphisms})
            self._cache["classes"] = classes
        return self._cache["classes"]

    def extension_count(self, cls: dict) -> int:
        """Copies of the pattern in K_n through a fixed copy of class ``cls``."""
        num = cls["occurrences"] * cls["aut"] * _falling(self.n - cls["vertices"], self.v - cls["vertices"])
        return num // self.pattern.automorphisms

    @property
    def D(self) -> int:
        """Max number of index sets through a q-set of the exposure hypergraph."""
        if self.setup == "vertex":
            return 1
        return max(self.extension_count(c) for c in self.subgraph_classes() if c["edges"] == self.q)

    def mu_j_bound(self, j: int, p: float) -> float:
        if self.setup == "edge":
            terms = [self.extension_count(c) * p ** (self.e - j) for c in self.subgraph_classes() if c["edges"] == j]
            return math.fsum(terms)
        terms = []
        for copy in self.pattern.labelled_copies:
            inner = sum(1 for a, b in copy if a < j and b < j)
            terms.append(p ** (self.e - inner))
        return math.comb(self.n - j, self.v - j) * math.fsum(terms)

    def mu_j_exact_edge(self, j: int, p: float) -> float:
        """Exact maximum for the edge setup (a single extension class)."""
        vals = [self.extension_count(c) for c in self.subgraph_classes() if c["edges"] == j]
        return (max(vals) if vals else 0) * p ** (self.e - j)

    def exposure_hypergraph(self) -> Hypergraph:
        """Edge setup: vertices are the C(n,2) slots, edges are copies.
        Vertex setup: complete v-uniform hypergraph whose weight is the
        per-set copy cap."""
        if self.setup == "vertex":
            base = gen_complete(self.n, self.v)
            return Hypergraph._trusted(
                self.n, base.edge_array, np.full(base.num_edges, self.L), self.v, self.L
            )
        return copy_hypergraph(self.pattern, self.n)


def copy_hypergraph(pattern: PatternGraph, n: int) -> Hypergraph:
    """Hypergraph on the edge slots of K_n whose edges are pattern copies."""
    v = pattern.v
    subsets = np.array(list(combinations(range(1, n + 1), v)), dtype=np.int64)
    rows = []
    for copy in pattern.labelled_copies:
        cols = []
        for a, b in sorted(copy):
            x, y = subsets[:, a], subsets[:, b]
            cols.append((x - 1) * n - (x - 1) * x // 2 + (y - x))
        rows.append(np.stack(cols, axis=1))
    arr = np.concatenate(rows)
    return _from_rows(math.comb(n, 2), arr, pattern.e)


def model_mu_bounds(model: SubgraphModel, n: int | None = None, p: float = 0.0) -> MuProfile:
    """Upper bounds on the conditional means for either exposure setup."""
    if n is not None and n != model.n:
        model = SubgraphModel(model.pattern, n, model.setup)
    mu_j = tuple(model.mu_j_bound(j, p) for j in range(1, model.k + 1))
    return MuProfile(model.mean(p), mu_j, float(p), {"setup": model.setup})


def count_copies(pattern: PatternGraph, adjacency: np.ndarray) -> int:
    """Copies of ``pattern`` in the graph given by a boolean adjacency matrix.

    Backtracking over pattern vertices in an order that keeps each new vertex
    adjacent to as many placed ones as possible. The result is the number of
    embeddings divided by the automorphism count.
    """
    adj = np.asarray(adjacency, dtype=bool)
    size = adj.shape[0]
    nbrs = [set() for _ in range(pattern.v)]
    for a, b in pattern.edge_list:
        nbrs[a].add(b)
        nbrs[b].add(a)
    order = [max(range(pattern.v), key=lambda u: (len(nbrs[u]), -u))]
    while len(order) < pattern.v:
        rest = [u for u in range(pattern.v) if u not in order]
        order.append(max(rest, key=lambda u: (len(nbrs[u] & set(order)), len(nbrs[u]), -u)))
    back = [[order.index(w) for w in nbrs[u] if order.index(w) < i] for i, u in enumerate(order)]
    graph_nbrs = [np.flatnonzero(adj[x]) for x in range(size)]
    image = [0] * pattern.v
    used = np.zeros(size, dtype=bool)

    def extend(depth: int) -> int:
        if depth == pattern.v:
            return 1
        links = back[depth]
        if links:
            pool = graph_nbrs[image[links[0]]]
            cands = [c for c in pool.tolist() if not used[c] and all(adj[image[t], c] for t in links[1:])]
        else:
            cands = [c for c in range(size) if not used[c]]
        total = 0
        for c in cands:
            image[depth] = c
            used[c] = True
            total += extend(depth + 1)
            used[c] = False
        return total

    return extend(0) // pattern.automorphisms
