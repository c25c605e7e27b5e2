"""Monte Carlo sampling of random induced subhypergraphs and random graphs.

Trials are grouped in blocks of ``BLOCK`` consecutive indices. Block ``b``
draws from ``Philox`` seeded by ``SeedSequence([seed, b])``, so a trial's
outcome depends only on the seed and its index, and estimates do not depend
on the number of worker threads.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from .generators import SubgraphModel, count_copies, copy_hypergraph
from .hypergraph import Hypergraph

__all__ = [
    "BLOCK",
    "TailModel",
    "TailEstimate",
    "default_seed",
    "sample_outcome",
    "evaluate_X",
    "sample_values",
    "mc_tail",
    "mc_tails",
    "clopper_pearson",
    "CSV_COLUMNS",
]

BLOCK = 1024
CSV_COLUMNS = ["target", "regime", "param", "threshold", "trials", "estimate", "ci_lo", "ci_hi", "seed", "config_hash"]
_REGIMES = {"binomial", "uniform", "graph-binomial", "graph-uniform"}
# Cap on the boolean work matrix per evaluation chunk.
_CELLS = 1 << 24


def default_seed() -> int:
    return int(os.environ.get("TAILFORGE_SEED", "0"))


@dataclass(frozen=True)
class TailModel:
    target: Hypergraph | SubgraphModel
    regime: str
    param: float
    seed: int = 0

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        graph = isinstance(self.target, SubgraphModel)
        if graph != self.regime.startswith("graph"):
            raise ValueError("graph regimes need a SubgraphModel target and vice versa")
        size = self.ground_size
        if self.regime.endswith("binomial"):
            if not 0.0 <= self.param <= 1.0:
                raise ValueError(f"p must lie in [0, 1], got {self.param}")
        else:
            m = self.param
            if int(m) != m or not 0 <= m <= size:
                raise ValueError(f"m must be an integer in [0, {size}], got {m}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def ground_size(self) -> int:
        if isinstance(self.target, SubgraphModel):
            return math.comb(self.target.n, 2)
        return self.target.n

    def host(self) -> Hypergraph:
        """Hypergraph whose induced weight is X (copy hypergraph for graph regimes)."""
        t = self.target
        if isinstance(t, SubgraphModel):
            if "copy_hypergraph" not in t._cache:
                t._cache["copy_hypergraph"] = copy_hypergraph(t.pattern, t.n)
            return t._cache["copy_hypergraph"]
        return t

    def describe(self) -> str:
        t = self.target
        if isinstance(t, SubgraphModel):
            return f"pattern(v={t.v},e={t.e})@n={t.n}"
        return f"hypergraph(n={t.n},e={t.num_edges},k={t.k})"


@dataclass(frozen=True)
class TailEstimate:
    threshold: float
    estimate: float
    trials: int
    successes: int
    ci_lo: float
    ci_hi: float
    seed: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    tail = (1 - level) / 2
    lo = 0.0 if successes == 0 else float(beta_dist.ppf(tail, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta_dist.ppf(1 - tail, successes + 1, trials - successes))
    return lo, hi


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def _draw_block(model: TailModel, seed: int, block: int, rows: int) -> np.ndarray:
    """Boolean (BLOCK, size) membership matrix; only the first ``rows`` rows are returned."""
    rng = _block_rng(seed, block)
    size = model.ground_size
    if model.regime.endswith("binomial"):
        u = rng.random((BLOCK, size))
        return (u < model.param)[:rows]
    m = int(model.param)
    u = rng.random((BLOCK, m)) if m else np.zeros((BLOCK, 0))
    perm = np.tile(np.arange(size), (BLOCK, 1))
    idx = np.arange(BLOCK)
    for i in range(m):
        j = i + np.minimum((u[:, i] * (size - i)).astype(np.int64), size - i - 1)
        a, b = perm[idx, i].copy(), perm[idx, j]
        perm[idx, i] = b
        perm[idx, j] = a
    out = np.zeros((BLOCK, size), dtype=bool)
    np.put_along_axis(out, perm[:, :m], True, axis=1)
    return out[:rows]


def sample_outcome(model: TailModel, trial_index: int, seed: int | None = None) -> np.ndarray:
    """Membership vector of one trial: vertices ``1..n`` at positions ``0..n-1``,
    or edge slots of K_n in pair-index order for graph regimes."""
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    seed = model.seed if seed is None else seed
    block, offset = divmod(int(trial_index), BLOCK)
    return _draw_block(model, seed, block, offset + 1)[offset]


def _weights_inside(H: Hypergraph, members: np.ndarray) -> np.ndarray:
    """Induced weight for each row of a boolean (trials, n) membership matrix."""
    rows = members.shape[0]
    padded = np.ones((rows, H.n + 1), dtype=bool)
    padded[:, 1:] = members
    edges = H.edge_array
    total = np.zeros(rows, dtype=np.float64)
    if H.num_edges == 0:
        return total
    weights = None if H.unit_weights else H.weights
    chunk = max(1, _CELLS // max(rows, 1))
    for start in range(0, H.num_edges, chunk):
        part = edges[start:start + chunk]
        inside = padded[:, part[:, 0]]
        for col in range(1, part.shape[1]):
            inside &= padded[:, part[:, col]]
        if weights is None:
            total += inside.sum(axis=1)
        else:
            total += inside @ weights[start:start + chunk]
    return total


def evaluate_X(target: Hypergraph | SubgraphModel, outcome) -> float:
    """Induced weight for a vertex outcome, or the copy count for a graph outcome.

    Hypergraph outcomes may be a boolean vector over ``1..n`` or a collection of
    vertex labels. Graph outcomes are boolean vectors over the edge slots.
    """
    if isinstance(target, SubgraphModel):
        n = target.n
        mask = np.asarray(outcome, dtype=bool)
        if mask.shape != (math.comb(n, 2),):
            raise ValueError("graph outcome must be a boolean vector over the edge slots")
        adj = np.zeros((n, n), dtype=bool)
        iu, ju = np.triu_indices(n, 1)
        adj[iu[mask], ju[mask]] = True
        adj |= adj.T
        return float(count_copies(target.pattern, adj))
    arr = np.asarray(outcome)
    if arr.dtype == bool:
        if arr.shape != (target.n,):
            raise ValueError("boolean outcome must have one entry per vertex")
        vertices = np.flatnonzero(arr) + 1
    else:
        vertices = arr.astype(np.int64).ravel()
    return target.weight_inside(vertices)


def _block_values(model: TailModel, seed: int, block: int, rows: int) -> np.ndarray:
    members = _draw_block(model, seed, block, rows)
    return _weights_inside(model.host(), members)


def _run_blocks(model: TailModel, trials: int, seed: int, threads: int | None) -> list[np.ndarray]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(-(-trials // BLOCK))]
    model.host()
    workers = max(1, threads or os.cpu_count() or 1)
    if workers == 1 or len(blocks) == 1:
        return [_block_values(model, seed, b, rows) for b, rows in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda br: _block_values(model, seed, *br), blocks))


def sample_values(model: TailModel, trials: int, seed: int | None = None, threads: int | None = None) -> np.ndarray:
    """X for trials ``0..trials-1`` in index order."""
    seed = model.seed if seed is None else seed
    return np.concatenate(_run_blocks(model, trials, seed, threads))


def _threshold_hits(values: np.ndarray, threshold: float) -> int:
    tol = 1e-9 * max(1.0, abs(threshold))
    return int(np.count_nonzero(values >= threshold - tol))


def mc_tails(model: TailModel, thresholds: Sequence[float], trials: int, seed: int | None = None,
             threads: int | None = None, level: float = 0.95) -> list[TailEstimate]:
    """Estimates of Pr(X >= threshold) for several thresholds from one set of trials."""
    seed = model.seed if seed is None else seed
    chunks = _run_blocks(model, trials, seed, threads)
    out = []
    for thr in thresholds:
        hits = sum(_threshold_hits(c, thr) for c in chunks)
        lo, hi = clopper_pearson(hits, trials, level)
        out.append(TailEstimate(float(thr), hits / trials, trials, hits, lo, hi, int(seed)))
    return out


def mc_tail(model: TailModel, threshold: float, trials: int, seed: int | None = None,
            threads: int | None = None, level: float = 0.95) -> TailEstimate:
    return mc_tails(model, [threshold], trials, seed, threads, level)[0]


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def estimate_row(model: TailModel, est: TailEstimate, digest: str) -> dict:
    return {
        "target": model.describe(),
        "regime": model.regime,
        "param": model.param,
        "threshold": est.threshold,
        "trials": est.trials,
        "estimate": est.estimate,
        "ci_lo": est.ci_lo,
        "ci_hi": est.ci_hi,
        "seed": est.seed,
        "config_hash": digest,
    }
