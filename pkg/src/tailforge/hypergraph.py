"""Weighted hypergraphs on vertex labels 1..N and their structural parameters.

Edges live in a zero-padded integer matrix of shape ``(E, k)``. Each row is
strictly increasing, and the rows are sorted lexicographically, so lexicographic
order on the padded rows matches tuple order. This layout keeps
instances with tens of millions of edges within desk memory, while
:attr:`Hypergraph.edges` still exposes the familiar tuple view.

The j-degree ``delta_j`` and the conditional mean ``mu_j`` both hash the
j-subsets of edges instead of scanning every j-subset of the vertex set. A
set that is not contained in any edge has an empty neighbourhood, so it never
attains the maximum. The maximum over an empty family is taken to be 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Hypergraph",
    "DegreeProfile",
    "MuProfile",
    "gamma",
    "delta",
    "degree_profile",
    "mu_profile",
    "validate_P",
    "subset_counts",
]

# Rows of j-subset codes processed per pass when hashing.
_CHUNK_CODES = 1 << 23


class Hypergraph:
    """Immutable weighted hypergraph with vertices ``1..n``.

    Parameters
    ----------
    n:
        Number of vertices.
    edges:
        Iterable of vertex collections, or an ``(E, width)`` integer array
        padded with zeros. Each edge is sorted internally, and the edge list is
        sorted canonically. Weights are permuted along with the edges.
    weights:
        Optional per-edge nonnegative weights. The default is unit weights.
    k, L:
        Declared bounds on the edge size and the weight. They default to the
        observed maxima, with 1 used when there are no edges.
    """

    __slots__ = ("_n", "_rows", "_weights", "_k", "_L", "_sizes", "_tuples", "_csr", "_hash", "_count_cache")

    def __init__(self, n: int, edges=(), weights=None, k: int | None = None, L: float | None = None):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        rows = _edge_matrix(edges)
        wts = None if weights is None else np.asarray(weights, dtype=np.float64).copy()
        if wts is not None and wts.shape != (rows.shape[0],):
            raise ValueError("weights length does not match edge count")
        rows, wts = _canonicalize(rows, wts, n)
        self._init(n, rows, wts, k, L)

    @classmethod
    def _trusted(cls, n: int, rows: np.ndarray, weights=None, k=None, L=None) -> "Hypergraph":
        """Build from rows already in canonical form, skipping the sort."""
        obj = cls.__new__(cls)
        obj._init(int(n), rows, weights, k, L)
        return obj

    def _init(self, n, rows, weights, k, L):
        self._n = n
        rows.setflags(write=False)
        self._rows = rows
        self._sizes = None
        self._tuples = None
        self._csr = None
        self._hash = None
        self._count_cache = {}
        if weights is not None:
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise ValueError("weights must be finite and nonnegative")
            if np.all(weights == 1.0):
                weights = None
            else:
                weights.setflags(write=False)
        self._weights = weights
        width = rows.shape[1]
        max_size = int(self.sizes.max()) if rows.shape[0] else 0
        if k is None:
            k = max(max_size, 1) if rows.shape[0] else max(width, 1)
        if max_size > k:
            raise ValueError(f"edge of size {max_size} exceeds declared k={k}")
        self._k = int(k)
        wmax = float(weights.max()) if weights is not None and weights.size else 1.0
        if L is None:
            L = max(wmax, 1.0) if rows.shape[0] else 1.0
        if rows.shape[0] and wmax > L:
            raise ValueError(f"weight {wmax} exceeds declared L={L}")
        self._L = float(L)

    # basic accessors

    @property
    def n(self) -> int:
        return self._n

    @property
    def k(self) -> int:
        return self._k

    @property
    def L(self) -> float:
        return self._L

    @property
    def num_edges(self) -> int:
        return int(self._rows.shape[0])

    def __len__(self) -> int:
        return self.num_edges

    @property
    def edge_array(self) -> np.ndarray:
        """Read-only ``(E, width)`` zero-padded edge matrix."""
        return self._rows

    @property
    def sizes(self) -> np.ndarray:
        if self._sizes is None:
            sizes = np.count_nonzero(self._rows, axis=1).astype(np.int64)
            sizes.setflags(write=False)
            self._sizes = sizes
        return self._sizes

    @property
    def unit_weights(self) -> bool:
        return self._weights is None

    @property
    def weights(self) -> np.ndarray:
        if self._weights is None:
            ones = np.ones(self.num_edges)
            ones.setflags(write=False)
            return ones
        return self._weights

    @property
    def edges(self) -> tuple[tuple[int, ...], ...]:
        if self._tuples is None:
            self._tuples = tuple(
                tuple(int(v) for v in row[:size]) for row, size in zip(self._rows.tolist(), self.sizes.tolist())
            )
        return self._tuples

    def edge(self, index: int) -> tuple[int, ...]:
        row = self._rows[index]
        return tuple(int(v) for v in row[: self.sizes[index]])

    def total_weight(self) -> float:
        if self._weights is None:
            return float(self.num_edges)
        return math.fsum(self._weights.tolist())

    def is_uniform(self) -> bool:
        return self.num_edges == 0 or bool(np.all(self.sizes == self.sizes[0]))

    def covered_vertices(self) -> np.ndarray:
        vals = np.unique(self._rows)
        return vals[vals > 0]

    # incidence index

    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR incidence ``(indptr, edge_ids)``: edges containing ``v`` are
        ``edge_ids[indptr[v]:indptr[v+1]]``, sorted ascending."""
        if self._csr is None:
            flat = self._rows.ravel()
            owner = np.repeat(np.arange(self.num_edges, dtype=np.int64), self._rows.shape[1])
            keep = flat > 0
            flat, owner = flat[keep], owner[keep]
            order = np.argsort(flat, kind="stable")
            counts = np.bincount(flat, minlength=self._n + 1)
            indptr = np.zeros(self._n + 2, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            ids = owner[order]
            indptr.setflags(write=False)
            ids.setflags(write=False)
            self._csr = (indptr, ids)
        return self._csr

    def incident(self, v: int) -> np.ndarray:
        indptr, ids = self.incidence()
        return ids[indptr[v] : indptr[v + 1]]

    # derived hypergraphs

    def edge_subgraph(self, indices) -> "Hypergraph":
        idx = np.asarray(indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        idx = np.sort(idx.astype(np.int64))
        wts = None if self._weights is None else self._weights[idx].copy()
        return Hypergraph._trusted(self._n, self._rows[idx].copy(), wts, self._k, self._L)

    def inside_mask(self, vertex_mask: np.ndarray) -> np.ndarray:
        """Boolean per edge: is the edge contained in the marked vertex set.

        ``vertex_mask`` is indexed by label and has length ``n + 1``. Slot 0
        is ignored, because it is treated as always present.
        """
        ext = np.asarray(vertex_mask, dtype=bool).copy()
        ext[0] = True
        return np.all(ext[self._rows], axis=1)

    def induced(self, vertices: Iterable[int] | np.ndarray) -> "Hypergraph":
        """Sub-hypergraph of edges fully inside ``vertices``. Labels are kept."""
        mask = np.zeros(self._n + 1, dtype=bool)
        mask[np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices, dtype=np.int64)] = True
        return self.edge_subgraph(np.flatnonzero(self.inside_mask(mask)))

    def weight_inside(self, vertices) -> float:
        mask = np.zeros(self._n + 1, dtype=bool)
        mask[np.asarray(list(vertices), dtype=np.int64)] = True
        hit = self.inside_mask(mask)
        if self._weights is None:
            return float(np.count_nonzero(hit))
        return math.fsum(self._weights[hit].tolist())

    # serialization

    def to_dict(self) -> dict:
        return {
            "n": self._n,
            "k": self._k,
            "L": self._L,
            "edges": [list(e) for e in self.edges],
            "weights": self.weights.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Hypergraph":
        try:
            n = data["n"]
            edges = data.get("edges", [])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed hypergraph document: {exc}") from None
        return cls(n, edges, data.get("weights"), k=data.get("k"), L=data.get("L"))

    @classmethod
    def from_json(cls, text: str) -> "Hypergraph":
        return cls.from_dict(json.loads(text))

    # identity

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self._n == other._n
            and self._k == other._k
            and self._L == other._L
            and self.edges == other.edges
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, self._k, self._L, self._rows.tobytes(), self.weights.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"Hypergraph(n={self._n}, edges={self.num_edges}, k={self._k}, L={self._L:g})"


def _edge_matrix(edges) -> np.ndarray:
    if isinstance(edges, np.ndarray):
        arr = np.asarray(edges)
        if arr.ndim != 2:
            raise ValueError("edge array must be two-dimensional")
        if arr.size and (arr.min() < 0):
            raise ValueError("vertex labels must be positive")
        return arr.astype(np.int64, copy=True)
    seq = [tuple(int(v) for v in e) for e in edges]
    if not seq:
        return np.zeros((0, 1), dtype=np.int64)
    width = max(len(e) for e in seq)
    arr = np.zeros((len(seq), max(width, 1)), dtype=np.int64)
    for i, e in enumerate(seq):
        if len(e) == 0:
            raise ValueError("empty edges are not allowed")
        if min(e) < 1:
            raise ValueError(f"vertex label out of range in edge {e}")
        arr[i, : len(e)] = e
    return arr


def _canonicalize(rows: np.ndarray, weights, n: int):
    if rows.shape[0] == 0:
        return np.zeros((0, rows.shape[1]), dtype=np.int32 if n < 2**31 else np.int64), weights
    if rows.max() > n:
        raise ValueError(f"vertex label {int(rows.max())} out of range [1, {n}]")
    if np.any(np.all(rows == 0, axis=1)):
        raise ValueError("empty edges are not allowed")
    # Zero padding must stay at the end after sorting within rows.
    big = np.iinfo(np.int64).max
    rows = np.where(rows == 0, big, rows)
    rows.sort(axis=1)
    rows[rows == big] = 0
    nz = rows[:, 1:] > 0
    if np.any(nz & (rows[:, 1:] == rows[:, :-1])):
        raise ValueError("edge contains a repeated vertex")
    dtype = np.int32 if n < 2**31 else np.int64
    rows = rows.astype(dtype)
    if not _rows_sorted(rows):
        order = np.lexsort(rows.T[::-1])
        rows = rows[order]
        if weights is not None:
            weights = weights[order]
    if rows.shape[0] > 1 and np.any(np.all(rows[1:] == rows[:-1], axis=1)):
        raise ValueError("duplicate edge")
    return np.ascontiguousarray(rows), weights


def _rows_sorted(rows: np.ndarray) -> bool:
    if rows.shape[0] < 2:
        return True
    a, b = rows[:-1], rows[1:]
    diff = a != b
    first = np.argmax(diff, axis=1)
    any_diff = diff.any(axis=1)
    pos = np.arange(a.shape[0])
    ok = a[pos, first] < b[pos, first]
    return bool(np.all(ok | ~any_diff))


# parameter computation


def _as_vertex_set(H: Hypergraph, U) -> tuple[int, ...]:
    verts = tuple(sorted({int(u) for u in U}))
    if not verts:
        raise ValueError("vertex set must be nonempty")
    if verts[0] < 1 or verts[-1] > H.n:
        raise ValueError(f"vertex label out of range [1, {H.n}]: {verts}")
    return verts


def gamma(H: Hypergraph, U) -> np.ndarray:
    """Sorted indices of edges containing every vertex of ``U``."""
    verts = _as_vertex_set(H, U)
    result = H.incident(verts[0])
    for v in verts[1:]:
        if result.size == 0:
            break
        result = np.intersect1d(result, H.incident(v), assume_unique=True)
    return np.asarray(result, dtype=np.int64)


def subset_counts(H: Hypergraph, j: int):
    """Yield ``(subset_rows, counts_by_size, size_classes)`` per chunk.

    ``subset_rows`` lists distinct j-subsets as rows (each occurring inside at
    least one edge) and ``counts_by_size[i, c]`` counts the edges of size
    ``size_classes[c]`` that contain row ``i``. Subsets in different chunks are
    disjoint, so per-chunk maxima combine by ``max``.
    """
    rows, sizes = H.edge_array, H.sizes
    classes = [int(s) for s in np.unique(sizes) if s >= j]
    if not classes:
        return
    base = H.n + 1
    # Codes fit in int64 when base**j < 2**62.
    encodable = j * math.log2(base) < 62
    total = sum(int(np.count_nonzero(sizes == s)) * math.comb(s, j) for s in classes)
    n_chunks = max(1, -(-total // _CHUNK_CODES))
    bounds = np.linspace(1, H.n + 1, n_chunks + 1).round().astype(np.int64)
    by_class = {s: rows[sizes == s, :s] for s in classes}
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        parts, labels = [], []
        for c, s in enumerate(classes):
            block = by_class[s]
            for cols in combinations(range(s), j):
                first = block[:, cols[0]]
                keep = (first >= lo) & (first < hi)
                if not keep.any():
                    continue
                sub = block[keep][:, cols].astype(np.int64)
                parts.append(sub)
                labels.append(np.full(sub.shape[0], c, dtype=np.int64))
        if not parts:
            continue
        sub = np.concatenate(parts)
        lab = np.concatenate(labels)
        if encodable:
            code = np.zeros(sub.shape[0], dtype=np.int64)
            for col in range(j):
                code = code * base + sub[:, col]
            uniq, inverse = np.unique(code, return_inverse=True)
            decoded = np.empty((uniq.size, j), dtype=np.int64)
            rem = uniq.copy()
            for col in range(j - 1, -1, -1):
                decoded[:, col] = rem % base
                rem //= base
        else:
            decoded, inverse = np.unique(sub, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        counts = np.zeros((decoded.shape[0], len(classes)), dtype=np.int64)
        np.add.at(counts, (inverse, lab), 1)
        yield decoded, counts, classes


def _count_vectors(H: Hypergraph, j: int) -> np.ndarray:
    """Distinct per-size-class count vectors over all j-sets inside edges.

    Row ``i`` gives, for one realised pattern, how many edges of each size
    contain some j-set. That is all that Δ_j and μ_j need, and it is cached on
    the hypergraph because μ_j is usually requested for many p.
    """
    cache = H._count_cache
    if j in cache:
        return cache[j]
    sizes = H.sizes
    classes = [int(s) for s in np.unique(sizes) if s >= j]
    if not classes:
        result = np.zeros((0, 0), dtype=np.int64)
    elif j == 1:
        counts = np.zeros((H.n + 1, len(classes)), dtype=np.int64)
        for c, s in enumerate(classes):
            counts[:, c] = np.bincount(H.edge_array[sizes == s, :s].ravel(), minlength=H.n + 1)
        counts = counts[counts.sum(axis=1) > 0]
        result = np.unique(counts, axis=0)
    else:
        result = _count_vectors_hashed(H, j, classes)
    result.setflags(write=False)
    cache[j] = (result, classes)
    return cache[j]


def _count_vectors_hashed(H: Hypergraph, j: int, classes: list[int]) -> np.ndarray:
    if classes == [j]:
        # Distinct edges of size j: every j-set inside an edge lies in exactly one.
        return np.ones((1, 1), dtype=np.int64)
    base = H.n + 1
    rows, sizes = H.edge_array, H.sizes
    by_class = {s: rows[sizes == s, :s] for s in classes}
    encodable = j * math.log2(base) < 62
    # Bin-count codes directly when a chunk's code range is small.
    span = max(1, (1 << 25) // base ** (j - 1)) if encodable else 0
    found = []
    total = sum(by_class[s].shape[0] * math.comb(s, j) for s in classes)
    if total > _CHUNK_CODES and encodable and base ** (j - 1) <= (1 << 25):
        bounds = list(range(1, H.n + 1, span)) + [H.n + 1]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            width = (hi - lo) * base ** (j - 1)
            per_class = []
            for s in classes:
                block = by_class[s]
                acc = np.zeros(width, dtype=np.int64)
                for cols in combinations(range(s), j):
                    first = block[:, cols[0]]
                    keep = (first >= lo) & (first < hi)
                    if not keep.any():
                        continue
                    sub = block[keep][:, cols].astype(np.int64)
                    code = sub[:, 0] - lo
                    for col in range(1, j):
                        code = code * base + sub[:, col]
                    acc += np.bincount(code, minlength=width)
                per_class.append(acc)
            if len(per_class) == 1:
                vals = np.unique(per_class[0])
                found.append(vals[vals > 0][:, None])
                continue
            mat = np.stack(per_class, axis=1)
            mat = mat[mat.sum(axis=1) > 0]
            if mat.size:
                found.append(np.unique(mat, axis=0))
    else:
        for _, counts, _ in subset_counts(H, j):
            if counts.shape[1] == 1:
                found.append(np.unique(counts[:, 0])[:, None])
            else:
                found.append(np.unique(counts, axis=0))
    if not found:
        return np.zeros((0, len(classes)), dtype=np.int64)
    return np.unique(np.concatenate(found), axis=0)


def _max_stats(H: Hypergraph, j: int, p: float | None):
    """Return ``(Δ_j, μ_j)``; ``μ_j`` is None when ``p`` is None."""
    vectors, classes = _count_vectors(H, j)
    if vectors.shape[0] == 0:
        return 0, (0.0 if p is not None else None)
    best_deg = int(vectors.sum(axis=1).max())
    if p is None:
        return best_deg, None
    factors = [p ** (s - j) for s in classes]
    # math.fsum per row keeps the sums exact to rounding of each term.
    best_mu = max(math.fsum(int(c) * f for c, f in zip(row, factors)) for row in vectors.tolist())
    return best_deg, best_mu


def delta(H: Hypergraph, j: int) -> int:
    """Maximum number of edges through a common j-set."""
    if not 1 <= j <= H.k:
        raise ValueError(f"j must lie in [1, {H.k}], got {j}")
    return _max_stats(H, j, None)[0]


@dataclass(frozen=True)
class DegreeProfile:
    deltas: tuple[int, ...]
    D: int | None = None
    q: int | None = None

    def delta(self, j: int) -> int:
        return self.deltas[j - 1]

    def to_dict(self) -> dict:
        return {"deltas": list(self.deltas), "D": self.D, "q": self.q}


def degree_profile(H: Hypergraph, D: int | None = None) -> DegreeProfile:
    """All j-degrees. With a cap ``D``, ``q`` is the smallest j where Δ_j ≤ D."""
    deltas = tuple(_max_stats(H, j, None)[0] for j in range(1, H.k + 1))
    q = None
    if D is not None:
        q = next((j for j, d in enumerate(deltas, start=1) if d <= D), None)
    return DegreeProfile(deltas, D, q)


@dataclass(frozen=True)
class MuProfile:
    mu: float
    mu_j: tuple[float, ...]
    p: float
    extra: dict = field(default_factory=dict, compare=False)

    def at(self, j: int) -> float:
        return self.mu_j[j - 1]

    def to_dict(self) -> dict:
        return {"mu": self.mu, "mu_j": list(self.mu_j), "p": self.p}


def expected_weight(H: Hypergraph, p: float) -> float:
    terms = []
    for s in np.unique(H.sizes).tolist():
        sel = H.sizes == s
        mass = float(np.count_nonzero(sel)) if H.unit_weights else math.fsum(H.weights[sel].tolist())
        terms.append(mass * p**s)
    return math.fsum(terms)


def mu_profile(H: Hypergraph, p: float) -> MuProfile:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    mu_j = tuple(_max_stats(H, j, p)[1] for j in range(1, H.k + 1))
    return MuProfile(expected_weight(H, p), mu_j, float(p))


def validate_P(H: Hypergraph, k: int, L: float, N: int, q: int | None = None, D: float | None = None) -> list[dict]:
    """Clause-by-clause check of the standing size, weight and degree assumptions."""
    max_size = int(H.sizes.max()) if H.num_edges else 0
    max_w = float(H.weights.max()) if H.num_edges else 0.0
    min_w = float(H.weights.min()) if H.num_edges else 0.0
    top = int(H.covered_vertices().max()) if H.num_edges else 0
    out = [
        {"clause": "max edge size <= k", "pass": max_size <= k, "lhs": max_size, "rhs": k},
        {"clause": "max weight <= L", "pass": max_w <= L, "lhs": max_w, "rhs": L},
        {"clause": "weights nonnegative", "pass": min_w >= 0, "lhs": min_w, "rhs": 0},
        {"clause": "vertices <= N", "pass": top <= N, "lhs": top, "rhs": N},
    ]
    if q is not None and D is not None:
        dq = _max_stats(H, q, None)[0] if 1 <= q <= max(H.k, 1) else 0
        out.append({"clause": f"delta_{q} <= D", "pass": dq <= D, "lhs": dq, "rhs": D})
    return out
