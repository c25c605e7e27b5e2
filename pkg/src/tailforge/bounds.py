"""Upper-tail bound evaluators with explicit constants.

Every evaluator returns a :class:`BoundReport`. All arithmetic is done on
natural logarithms of probabilities; the JSON view converts to base 10.
Theorem ids are descriptive:

``chernoff``
    bounded-dependence Chernoff inequality for ``Z_C``
``basic`` / ``extended``
    the schedule-driven inequalities with parameters ``R_j`` (and ``D_j``, ``s``)
``easy_p``
    the easy-to-apply inequality with balancedness constants ``A, alpha, tau, pi``
``small``
    the small-expectation inequality with ``mu_j <= A N^-alpha``
``randinduced`` / ``randinduced_small``
    corollaries for weighted edge counts of random induced subhypergraphs
``subgraph``
    subgraph counts in the random graph, both exposure setups
``alternative``
    the single-step variant driven by a degree-tail certificate

A report whose assumption checklist fails has status ``not_applicable`` and no
numeric bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .generators import PatternGraph, SubgraphModel, analyze_density
from .hypergraph import Hypergraph, degree_profile, mu_profile

__all__ = [
    "phi",
    "BoundReport",
    "Structure",
    "structure_from_hypergraph",
    "structure_from_model",
    "easy_schedule",
    "bound_chernoff",
    "bound_extended",
    "bound_basic",
    "bound_easy_p",
    "bound_small",
    "bound_app_randinduced",
    "bound_app_randinduced_small",
    "bound_app_subgraph",
    "bound_alternative",
]

_REL_TOL = 1e-12
_LOG10E = 1.0 / math.log(10.0)


def phi(x: float) -> float:
    """(1+x)log(1+x) - x, with a series near zero."""
    if x < 0 or math.isnan(x):
        raise ValueError(f"phi needs x >= 0, got {x}")
    if math.isinf(x):
        return math.inf
    if x < 1e-4:
        return x * x / 2 - x**3 / 6 + x**4 / 12 - x**5 / 20
    return (1 + x) * math.log1p(x) - x


def _logsumexp(values) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    top = max(vals)
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _scaled_log(power: float, base: float) -> float:
    """log(base**power) for power > 0, tolerant of base = 0."""
    lb = _log(base)
    if lb == -math.inf:
        return -math.inf
    return power * lb


def _phi_mu(t: float, mu: float) -> float:
    """phi(t/mu)*mu, with the mu -> 0 limit (infinite for t > 0)."""
    if mu <= 0:
        return math.inf
    return phi(t / mu) * mu


def _json_value(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.floating,)):
        return _json_value(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _clause(name: str, lhs: float, rhs: float, op: str = "<=") -> dict:
    if op == "<=":
        ok = lhs <= rhs or (math.isfinite(rhs) and lhs <= rhs + _REL_TOL * max(1.0, abs(rhs)))
    elif op == ">=":
        ok = lhs >= rhs or (math.isfinite(rhs) and lhs >= rhs - _REL_TOL * max(1.0, abs(rhs)))
    elif op == "<":
        ok = lhs < rhs
    elif op == ">":
        ok = lhs > rhs
    else:
        raise ValueError(op)
    return {"clause": name, "pass": bool(ok), "lhs": lhs, "rhs": rhs}


def _flag(name: str, ok: bool, lhs=None, rhs=None) -> dict:
    return {"clause": name, "pass": bool(ok), "lhs": lhs, "rhs": rhs}


@dataclass
class BoundReport:
    theorem: str
    status: str
    log_bound: float | None
    raw_log_bound: float | None
    clamped: bool
    assumptions: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    exponent_branches: dict = field(default_factory=dict)
    forms: dict = field(default_factory=dict)
    chain_ok: bool | None = None
    notes: list = field(default_factory=list)

    @property
    def applicable(self) -> bool:
        return self.status == "ok"

    @property
    def bound(self) -> float | None:
        return None if self.log_bound is None else math.exp(self.log_bound)

    @property
    def failing(self) -> list:
        return [c for c in self.assumptions if not c["pass"]]

    def to_dict(self) -> dict:
        def log10(v):
            return None if v is None else v * _LOG10E

        return _json_value(
            {
                "theorem": self.theorem,
                "status": self.status,
                "log10_bound": log10(self.log_bound),
                "raw_log10_bound": log10(self.raw_log_bound),
                "clamped": self.clamped,
                "assumptions": self.assumptions,
                "constants": self.constants,
                "exponent_branches": self.exponent_branches,
                "forms_log10": {k: log10(v) for k, v in self.forms.items()},
                "chain_ok": self.chain_ok,
                "notes": self.notes,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _finish(theorem, assumptions, raw, constants=None, branches=None, forms=None, chain_ok=None, notes=None):
    constants = constants or {}
    notes = list(notes or [])
    if any(not c["pass"] for c in assumptions):
        return BoundReport(theorem, "not_applicable", None, None, False, assumptions, constants,
                           branches or {}, {}, None, notes)
    clamped = raw > 0
    return BoundReport(theorem, "ok", min(raw, 0.0), raw, clamped, assumptions, constants,
                       branches or {}, forms or {}, chain_ok, notes)


def _chain(values: list[float]) -> bool:
    """Nondecreasing up to rounding."""
    for lo, hi in zip(values, values[1:]):
        if lo == -math.inf:
            continue
        if lo > hi + 1e-9 * max(1.0, abs(hi)):
            return False
    return True


# structural inputs


@dataclass(frozen=True)
class Structure:
    """The structural parameters a bound consumes.

    ``mu_j[j-1]`` holds the conditional mean for j-sets (or an upper bound for it).
    ``delta_q`` is the observed maximum q-degree, used for the degree-cap clause.
    """

    k: int
    ell: int
    q: int
    L: float
    D: float
    N: float
    mu: float
    mu_j: tuple
    delta_q: float
    p: float | None = None
    label: str = ""

    def at(self, j: int) -> float:
        return self.mu_j[j - 1]

    def replace(self, **changes) -> "Structure":
        data = dict(self.__dict__)
        data.update(changes)
        return Structure(**data)

    def to_dict(self) -> dict:
        return _json_value(dict(self.__dict__))


def structure_from_hypergraph(H: Hypergraph, p: float, q: int | None = None, D: float | None = None,
                              ell: int = 1, N: float | None = None, profile=None) -> Structure:
    """Structure of a hypergraph at inclusion probability ``p``.

    Without ``q`` the cap ``D`` (default k!) selects q as the smallest level
    with delta_q <= D. With ``q`` and no ``D`` the cap is delta_q itself.
    """
    deg = profile if profile is not None else degree_profile(H)
    k = H.k
    if q is None:
        cap = math.factorial(k) if D is None else D
        q = next((j for j in range(1, k + 1) if deg.delta(j) <= cap), k)
        D = cap
    elif D is None:
        D = deg.delta(q)
    mp = mu_profile(H, p)
    return Structure(k=k, ell=ell, q=q, L=H.L, D=float(D), N=float(H.n if N is None else N), mu=mp.mu,
                     mu_j=mp.mu_j, delta_q=float(deg.delta(q)), p=p)


def structure_from_model(model: SubgraphModel, p: float, q: int | None = None) -> Structure:
    """Structure of a subgraph-count model; conditional means are the class-sum upper bounds."""
    q = model.q if q is None else q
    if model.setup == "edge":
        caps = [model.extension_count(c) for c in model.subgraph_classes() if c["edges"] == q]
        D = max(caps) if caps else 0
    else:
        D = 1
    mu_j = tuple(model.mu_j_bound(j, p) for j in range(1, model.k + 1))
    return Structure(k=model.k, ell=model.ell, q=q, L=model.L, D=float(D), N=float(model.N),
                     mu=model.mean(p), mu_j=mu_j, delta_q=float(D), p=p, label=model.setup)


def _check_shape(st: Structure):
    if not 1 <= st.ell <= st.q <= st.k:
        raise ValueError(f"need 1 <= ell <= q <= k, got ell={st.ell} q={st.q} k={st.k}")
    if st.mu < 0 or any(m < 0 for m in st.mu_j):
        raise ValueError("means must be nonnegative")
    if st.L <= 0:
        raise ValueError("weight cap L must be positive")


def _degree_clause(st: Structure, cap: float) -> dict:
    return _clause(f"delta_{st.q} <= D_q", st.delta_q, cap)


# Chernoff-type inequality


def bound_chernoff(mu: float, C: float, t: float) -> BoundReport:
    """All forms of the bounded-dependence Chernoff chain, as natural logs."""
    if not (mu > 0 and C > 0 and t > 0):
        raise ValueError("mu, C and t must be positive")
    eps = t / mu
    forms = {
        "phi": -phi(eps) * mu / C,
        "product": (t - (mu + t) * math.log1p(eps)) / C,
        "bernstein": -t * t / (2 * C * (mu + t / 3)),
        "half_step": -(t / (2 * C)) * math.log1p(t / (2 * mu)),
        "quarter": -(t / (4 * C)) * math.log1p(eps),
    }
    middle = min(forms["bernstein"], forms["half_step"])
    same = abs(forms["phi"] - forms["product"]) <= 1e-9 * max(1.0, abs(forms["phi"]))
    chain_ok = same and _chain([forms["phi"], middle, forms["quarter"]])
    constants = {"phi": phi(eps), "ratio": eps, "C": C}
    return _finish("chernoff", [], min(forms.values()), constants, {}, forms, chain_ok)


# schedule-driven inequalities


def _constants_abd(st: Structure) -> tuple[float, float, float]:
    binom = math.comb(st.k, st.ell)
    a = 1.0 / (4 * st.L * binom)
    b = 1.0 / (2 * st.k)
    d = 1.0 / (4 * st.L * st.q * st.k * binom)
    return a, b, d


def _schedule_inputs(st: Structure, R: Mapping, Dsched: Mapping | None):
    for j in range(st.ell, st.q):
        if j not in R or not R[j] > 0:
            raise ValueError(f"R_{j} missing or nonpositive")
    if Dsched is not None:
        for j in range(st.ell, st.q + 1):
            if j not in Dsched or not Dsched[j] > 0:
                raise ValueError(f"D_{j} missing or nonpositive")


def bound_extended(st: Structure, t: float, R: Mapping, Dsched: Mapping, s: float) -> BoundReport:
    """Three-term inequality with Q_j = max(R_j/s, D_j) and R_q = Q_q = D_q."""
    _check_shape(st)
    if not t > 0:
        raise ValueError("t must be positive")
    _schedule_inputs(st, R, Dsched)
    ell, q, k, N = st.ell, st.q, st.k, st.N
    a, b, d = _constants_abd(st)
    logN = math.log(N) if N > 0 else -math.inf
    Rf = {j: float(R[j]) for j in range(ell, q)}
    Rf[q] = float(Dsched[q])
    Df = {j: float(Dsched[j]) for j in range(ell, q + 1)}
    Q = {j: max(Rf[j] / s, Df[j]) for j in range(ell, q)}
    Q[q] = Df[q]

    checks = [_clause("s >= 1", s, 1.0, ">="), _degree_clause(st, Df[q])]
    checks += [_clause(f"R_{j} >= D_{j}", Rf[j], Df[j], ">=") for j in range(ell, q)]

    def capped(j):
        return Q[j] < Rf[j] and Q[j + 1] == Df[j + 1]

    terms = {}
    for j in range(ell, q):
        ratio = math.e * st.at(j) / Q[j]
        first = _scaled_log(Rf[j] / Rf[j + 1], ratio)
        second = _scaled_log(Q[j] / Df[j + 1], ratio) if capped(j) else -math.inf
        checks.append(_clause(f"log condition j={j}", max(first, second), -4 * k * j * logN))
        terms[f"degree_{j}"] = math.log(2) - j * logN + _scaled_log(b * Rf[j] / Rf[j + 1], ratio)
        if capped(j):
            power = max(d * t / (Rf[ell] * Df[j + 1]), b * Q[j] / Df[j + 1])
            terms[f"sparsification_{j}"] = -j * logN + _scaled_log(power, ratio)
    terms["weight"] = -a * _phi_mu(t, st.mu) / Q[ell]
    raw = _logsumexp(terms.values())
    constants = {"a": a, "b": b, "d": d, "s": s, "R": Rf, "D": Df, "Q": Q, "t": t, "term_logs": terms}
    return _finish("extended", checks, raw, constants, {}, {"three_term": raw})


def bound_basic(st: Structure, t: float, R: Mapping, D: float) -> BoundReport:
    """Single-schedule inequality with R_q = D."""
    _check_shape(st)
    if not t > 0:
        raise ValueError("t must be positive")
    if not D > 0:
        raise ValueError("D must be positive")
    _schedule_inputs(st, R, None)
    ell, q, k, N = st.ell, st.q, st.k, st.N
    a, b, _ = _constants_abd(st)
    logN = math.log(N) if N > 0 else -math.inf
    Rf = {j: float(R[j]) for j in range(ell, q)}
    Rf[q] = float(D)
    checks = [_degree_clause(st, D)]
    terms = {}
    for j in range(ell, q):
        ratio = math.e * st.at(j) / Rf[j]
        checks.append(_clause(f"log condition j={j}", _scaled_log(Rf[j] / Rf[j + 1], ratio), -4 * k * j * logN))
        terms[f"degree_{j}"] = -j * logN + _scaled_log(b * Rf[j] / Rf[j + 1], ratio)
    terms["weight"] = -a * _phi_mu(t, st.mu) / Rf[ell]
    raw = _logsumexp(terms.values())
    constants = {"a": a, "b": b, "R": Rf, "t": t, "term_logs": terms}
    return _finish("basic", checks, raw, constants, {}, {"two_term": raw})


def easy_schedule(st: Structure, A: float, alpha: float, tau: float, pi: float) -> dict:
    """Parameter chain of the easy-to-apply inequality.

    beta = alpha/2, s = log(e/pi^beta), B = max{e^2 A/D, 4k^2/(tau beta), 4k^2 (4A)^q, 1},
    lambda = B max{mu^(1/r), 1}, R_j = lambda^(q-j) D, D_j = B^(q-j) D, with A, D raised to at least 1.
    """
    A1 = max(A, 1.0)
    D1 = max(st.D, 1.0)
    r = st.q - st.ell + 1
    beta = alpha / 2
    s = 1.0 - beta * math.log(pi)
    k, q = st.k, st.q
    B = max(math.e**2 * A1 / D1, 4 * k * k / (tau * beta), 4 * k * k * (4 * A1) ** q, 1.0)
    lam = B * max(st.mu ** (1.0 / r), 1.0)
    R = {j: lam ** (q - j) * D1 for j in range(st.ell, q)}
    Dj = {j: B ** (q - j) * D1 for j in range(st.ell, q + 1)}
    return {"A": A1, "D": D1, "r": r, "beta": beta, "s": s, "B": B, "lambda": lam, "R": R, "D_sched": Dj}


def _zero_mean(theorem: str, checks: list, note: str = "zero mean: the event X >= 0 is certain") -> BoundReport:
    return _finish(theorem, checks, 0.0, {}, {}, {}, True, [note])


def bound_easy_p(st: Structure, eps: float, pi: float, A: float, alpha: float, tau: float) -> BoundReport:
    """Easy-to-apply inequality via the extended inequality and the proof's schedule.

    Primary value: the explicit sum exp(-a phi(eps) mu / max{R_l/s, D_l})
    + q N^-l [2 e^{-b lambda s} + max_j 1{Q_j<R_j} e^{-d eps mu s/(R_l D_{j+1})}].
    Also reported: the three-term extended value and the two collapsed forms.
    """
    _check_shape(st)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < pi <= 1:
        raise ValueError("pi must lie in (0, 1]")
    if not (A > 0 and alpha > 0 and tau > 0):
        raise ValueError("A, alpha and tau must be positive")
    ell, q, N, mu = st.ell, st.q, st.N, st.mu
    r = q - ell + 1
    logN = math.log(N) if N > 0 else -math.inf
    balance = max((st.at(j) / max(mu ** ((q - j) / r), 1.0) for j in range(ell, q)), default=0.0)
    checks = [
        _clause("balance: max mu_j / max{mu^((q-j)/r), 1} <= A pi^alpha", balance, A * pi**alpha),
        _clause("A mu^(1/r) >= 1{pi > N^-tau} log N", A * mu ** (1.0 / r),
                logN if pi > N ** (-tau) else 0.0, ">="),
        _degree_clause(st, st.D),
    ]
    if mu == 0:
        return _zero_mean("easy_p", checks)
    sched = easy_schedule(st, A, alpha, tau, pi)
    inner = st.replace(D=sched["D"])
    ext = bound_extended(inner, eps * mu, sched["R"], sched["D_sched"], sched["s"])
    checks += [dict(c, clause="extended: " + c["clause"]) for c in ext.assumptions]

    a, b, d = _constants_abd(st)
    s, B, lam, beta, D1 = sched["s"], sched["B"], sched["lambda"], sched["beta"], sched["D"]
    R, Dj = sched["R"], sched["D_sched"]
    R_ell = R[ell] if q > ell else D1
    Q = {j: max(R[j] / s, Dj[j]) for j in range(ell, q)}
    phi_eps = phi(eps)
    first = -a * phi_eps * mu / max(R_ell / s, Dj[ell])
    if q > ell:
        inner_terms = [math.log(2) - b * lam * s]
        inner_terms += [-d * eps * mu * s / (R_ell * Dj[j + 1]) for j in range(ell, q) if Q[j] < R[j]]
        second = math.log(q) - ell * logN + _logsumexp(inner_terms)
    else:
        second = -math.inf
    explicit = _logsumexp([first, second])

    small_beta = min(1.0, beta)
    comps = {"weight": a / Dj[ell]}
    if q > ell:
        comps.update(
            weight_clustered=a * small_beta / (3 * B ** (q - ell) * D1),
            degree=b * B * small_beta,
            sparsification=d * small_beta / (Dj[ell] * B ** (q - ell) * D1),
        )
    c = min(comps.values())
    log_e_pi = 1.0 - math.log(pi)
    poisson = phi_eps * mu
    clustered = min(eps * eps, 1.0) * mu ** (1.0 / r) * log_e_pi
    prefactor = math.log1p(3 * q * N ** (-ell))
    collapsed = prefactor - c * min(poisson, clustered)
    psi = min(mu, mu ** (1.0 / r) * log_e_pi)
    collapsed_simple = prefactor - (c / 3) * min(eps * eps, 1.0) * psi
    forms = {"extended": ext.raw_log_bound if ext.applicable else _logsumexp(ext.constants["term_logs"].values()),
             "explicit": explicit, "collapsed": collapsed, "collapsed_simple": collapsed_simple}
    chain_ok = _chain([forms["extended"], explicit, collapsed, collapsed_simple])
    constants = {
        "A": sched["A"], "D": D1, "alpha": alpha, "beta": beta, "tau": tau, "pi": pi, "s": s, "B": B,
        "lambda": lam, "R": R, "D_sched": Dj, "Q": Q, "a": a, "b": b, "d": d, "c": c,
        "c_components": comps, "eps": eps, "t": eps * mu,
    }
    branches = {"poisson": poisson, "clustered": clustered,
                "attained": "poisson" if poisson <= clustered else "clustered",
                "psi": psi, "psi_attained": "poisson" if mu <= mu ** (1.0 / r) * log_e_pi else "clustered"}
    return _finish("easy_p", checks, explicit, constants, branches, forms, chain_ok)


def bound_small(st: Structure, t: float, A: float, alpha: float, K: float = 1.0) -> BoundReport:
    """Small-expectation inequality with the proof's constants.

    B = max{4qk/alpha, 2kK/alpha, Ae/D, 1}, lambda = max{t^(1/r), B}, D_j = B^(q-j) D,
    a = 1/(4 L binom(k,l) D_l), beta = alpha/(4 L q k binom(k,l) D), b = min{alpha/(2k), beta/D_l}.
    """
    _check_shape(st)
    if not t > 0:
        raise ValueError("t must be positive")
    if not (A > 0 and alpha > 0 and K > 0):
        raise ValueError("A, alpha and K must be positive")
    ell, q, k, N, L = st.ell, st.q, st.k, st.N, st.L
    r = q - ell + 1
    logN = math.log(N) if N > 0 else -math.inf
    D = max(st.D, 1.0)
    top = max((st.at(j) for j in range(ell, q)), default=0.0)
    checks = [
        _clause("max mu_j <= A N^-alpha", top, A * N ** (-alpha)),
        _clause("N >= 1", N, 1.0, ">="),
        _degree_clause(st, D),
    ]
    binom = math.comb(k, ell)
    B = max(4 * q * k / alpha, 2 * k * K / alpha, A * math.e / D, 1.0)
    lam = max(t ** (1.0 / r), B)
    D_ell = B ** (q - ell) * D
    a = 1.0 / (4 * L * binom * D_ell)
    beta = alpha / (4 * L * q * k * binom * D)
    b = min(alpha / (2 * k), beta / D_ell)
    first = -a * _phi_mu(t, st.mu)
    growth = max(b * t ** (1.0 / r), K)
    second = math.log(2 * q) - q * logN - growth * logN if q > ell else -math.inf
    raw = _logsumexp([first, second])
    c = min(a, b)
    pre = math.log1p(2 * q * N ** (-q)) if q > ell else 0.0
    collapsed = pre - min(c * _phi_mu(t, st.mu), max(c * t ** (1.0 / r), K) * logN)
    constants = {
        "A": A, "alpha": alpha, "K": K, "D": D, "B": B, "lambda": lam,
        "R": {j: lam ** (q - j) * D for j in range(ell, q + 1)},
        "D_sched": {j: B ** (q - j) * D for j in range(ell, q + 1)},
        "a": a, "beta": beta, "b": b, "c": c, "t": t,
    }
    branches = {"poisson": _phi_mu(t, st.mu), "clustered": t ** (1.0 / r) * logN}
    branches["attained"] = "poisson" if branches["poisson"] <= branches["clustered"] else "clustered"
    forms = {"explicit": raw, "collapsed": collapsed}
    return _finish("small", checks, raw, constants, branches, forms, _chain([raw, collapsed]))


# corollaries for random induced subhypergraphs


def _uniform_checks(H: Hypergraph) -> list:
    return [_flag("hypergraph is uniform", H.is_uniform() and H.num_edges > 0)]


def bound_app_randinduced(H: Hypergraph, p: float, eps: float, D: float | None = None, q: int | None = None,
                          profile=None) -> BoundReport:
    """Weighted induced edge counts: exp(-c min{mu, mu^(1/q) log(e/p)}) for q < k.

    The constant A is max{D max_j delta^(j/q-1), delta^(-1/q), 1} with
    delta = min weight * e(H)/N^q; it feeds the easy-to-apply inequality with
    pi = p, alpha = 1/q, tau = q/(2k), l = 1. The prefactor is then folded into
    the exponent by the large/small split of Pi = (c/3) min{eps^2,1} Psi.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if not eps > 0:
        raise ValueError("eps must be positive")
    checks = _uniform_checks(H)
    if not checks[0]["pass"]:
        return _finish("randinduced", checks, 0.0)
    st = structure_from_hypergraph(H, p, q=q, D=D, profile=profile)
    k, qq, N = st.k, st.q, st.N
    checks.append(_clause("q < k", qq, k, "<"))
    w_min = float(H.weights.min())
    checks.append(_clause("min weight > 0", w_min, 0.0, ">"))
    checks.append(_degree_clause(st, st.D))
    if not all(c["pass"] for c in checks):
        rep = _finish("randinduced", checks, 0.0, {"q": qq, "D": st.D})
        if qq >= k:
            rep.notes.append("excluded case q = k: complete k-uniform hypergraphs have tails exp(-Theta(Np))")
        return rep
    if N < k:
        return _finish("randinduced", checks, -math.inf, {}, {}, {}, True, ["fewer than k vertices: no edges survive"])
    gamma_ = H.num_edges / N**qq
    delta_ = w_min * gamma_
    D1 = max(st.D, 1.0)
    A = max([D1 * delta_ ** (j / qq - 1) for j in range(1, qq)] + [delta_ ** (-1.0 / qq), 1.0])
    alpha, tau = 1.0 / qq, qq / (2 * k)
    easy = bound_easy_p(st, eps, p, A, alpha, tau)
    checks += easy.assumptions
    mu = st.mu
    if not easy.applicable:
        return _finish("randinduced", checks, 0.0, easy.constants)
    if mu == 0:
        return _zero_mean("randinduced", checks)
    c = easy.constants["c"]
    psi = min(mu, mu ** (1.0 / qq) * (1.0 - math.log(p)))
    big_pi = (c / 3) * min(eps * eps, 1.0) * psi
    c_final = (c / 3) * min(eps * eps, 1.0) * min(1.0, eps) / 12
    uniform = -c_final * psi
    split = -big_pi / 2 if big_pi >= 6 else -min(1.0, eps) * big_pi / 12
    forms = dict(easy.forms)
    forms.update(prefactor=math.log1p(3 * qq / N) - big_pi, case_split=split, uniform=uniform)
    chain_ok = bool(easy.chain_ok) and _chain([split, uniform])
    constants = dict(easy.constants)
    constants.update(gamma=gamma_, delta=delta_, A=A, c_easy=c, Pi=big_pi, c_final=c_final, q=qq, k=k, N=N,
                     eps=eps, p=p)
    poisson, clustered = mu, mu ** (1.0 / qq) * (1.0 - math.log(p))
    branches = {"poisson": poisson, "clustered": clustered, "psi": psi,
                "attained": "poisson" if poisson <= clustered else "clustered",
                "case": "large" if big_pi >= 6 else "small"}
    return _finish("randinduced", checks, uniform, constants, branches, forms, chain_ok)


def bound_app_randinduced_small(H: Hypergraph, p: float, t: float, sigma: float = 0.1, Lam: float = 1.0,
                                D: float | None = None, q: int | None = None, profile=None) -> BoundReport:
    """Small-p corollary: delegates to the small-expectation inequality with
    alpha = sigma, K = 1 and A = D * sum_{1<=j<q} Lam^(k-j)."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if not (t > 0 and sigma > 0 and Lam > 0):
        raise ValueError("t, sigma and Lam must be positive")
    checks = _uniform_checks(H)
    if not checks[0]["pass"]:
        return _finish("randinduced_small", checks, 0.0)
    st = structure_from_hypergraph(H, p, q=q, D=D, profile=profile)
    k, qq, N = st.k, st.q, st.N
    checks.append(_clause("k >= 2", k, 2, ">="))
    limit = Lam * N ** (-(qq - 1) / (k - 1) - sigma) if k >= 2 else 0.0
    checks.append(_clause("p <= Lam N^(-(q-1)/(k-1)-sigma)", p, limit))
    D1 = max(st.D, 1.0)
    A = D1 * sum(Lam ** (k - j) for j in range(1, qq)) if qq > 1 else 1.0
    if not all(c["pass"] for c in checks):
        return _finish("randinduced_small", checks, 0.0, {"A": A, "q": qq})
    rep = bound_small(st, t, A, sigma, 1.0)
    rep.theorem = "randinduced_small"
    rep.assumptions = checks + rep.assumptions
    rep.constants.update(q=qq, k=k, N=N, sigma=sigma, Lam=Lam, p=p)
    if rep.failing:
        rep.status, rep.log_bound, rep.raw_log_bound, rep.forms = "not_applicable", None, None, {}
    return rep


# subgraph counts


def _min_balance_A(st: Structure, pi: float, alpha: float) -> float:
    r = st.q - st.ell + 1
    vals = [st.at(j) / (max(st.mu ** ((st.q - j) / r), 1.0) * pi**alpha) for j in range(st.ell, st.q)]
    return max(vals + [1.0])


def bound_app_subgraph(pattern: PatternGraph | SubgraphModel | str, n: int, p: float, mode: str = "large",
                       eps: float | None = None, t: float | None = None, Lam: float = 1.0,
                       sigma: float = 0.1, xi: float = 1.0) -> BoundReport:
    """Subgraph counts in G(n,p), evaluated in both exposure setups; the smaller bound wins.

    Modes: ``small`` (strictly balanced, sub-Gaussian in eps), ``sg`` (2-balanced,
    sub-Gaussian in t), ``large`` (strictly balanced, large deviations),
    ``large-balanced`` (balanced, vertex setup, p >= xi n^(-v/e+sigma)).
    """
    if isinstance(pattern, str):
        pattern = PatternGraph.parse(pattern)
    if isinstance(pattern, SubgraphModel):
        pattern = pattern.pattern
    if mode not in ("small", "sg", "large", "large-balanced"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    dens = analyze_density(pattern)
    v, e = pattern.v, pattern.e
    base = SubgraphModel(pattern, n, "edge")
    mu = base.mean(p)
    s = base.s
    logn = math.log(n)
    checks = []
    if mode in ("small", "large"):
        checks.append(_flag("pattern strictly balanced", dens.strictly_balanced))
    elif mode == "sg":
        checks.append(_flag("pattern 2-balanced", dens.two_balanced))
    else:
        checks.append(_flag("pattern balanced", dens.balanced))

    if mode in ("small", "large", "large-balanced"):
        if eps is None or not eps > 0:
            raise ValueError("this mode needs eps > 0")
        t_val = eps * mu
    else:
        if t is None or not t > 0:
            raise ValueError("mode 'sg' needs t > 0")
        t_val = t

    if mode == "small":
        checks.append(_clause("eps <= Lam", eps, Lam))
        checks.append(_clause("mu^((s-1)/s) <= Lam log n", mu ** ((s - 1) / s), Lam * logn))
    elif mode == "sg":
        checks.append(_clause("p <= Lam n^(-(v-2)/(e-1)-sigma)", p,
                              Lam * n ** (-(v - 2) / (e - 1) - sigma) if e > 1 else 0.0))
        cap = Lam * min((mu * logn) ** (1.0 / (2 - 1.0 / s)), mu)
        checks.append(_clause("t <= Lam min{(mu log n)^(1/(2-1/s)), mu}", t_val, cap))
    elif mode == "large-balanced":
        checks.append(_clause("p >= xi n^(-v/e+sigma)", p, xi * n ** (-v / e + sigma), ">="))
    if not all(c["pass"] for c in checks) or mu == 0:
        if all(c["pass"] for c in checks):
            return _zero_mean("subgraph", checks)
        return _finish("subgraph", checks, 0.0, {"mode": mode, "mu": mu})

    setups = ["edge", "vertex"] if mode != "large-balanced" else ["vertex"]
    beta_ = dens.beta
    per_setup = {}
    for setup in setups:
        model = base.with_setup(setup)
        if mode in ("small", "sg"):
            st = structure_from_model(model, p)
            if mode == "small":
                alpha = beta_ / 4 if math.isfinite(beta_) else 1.0
            else:
                alpha = sigma / 2
            top = max((st.at(j) for j in range(st.ell, st.q)), default=0.0)
            A = max(top * st.N**alpha, 1e-300) if st.q > st.ell else 1.0
            rep = bound_small(st, t_val, A, alpha, 1.0)
        else:
            q_override = e if setup == "edge" else v
            st = structure_from_model(model, p, q=q_override)
            if mode == "large-balanced":
                alpha = e * sigma / v**2
            elif setup == "edge":
                alpha = beta_ / 2 if math.isfinite(beta_) else 1.0
            else:
                alpha = min(beta_, beta_ * v / (2 * e), 1.0 / (2 * v))
            pi = 1.0 / st.N
            A = _min_balance_A(st, pi, alpha)
            rep = bound_easy_p(st, eps, pi, A, alpha, 0.5)
        per_setup[setup] = rep
    usable = {k: r for k, r in per_setup.items() if r.applicable}
    for name, rep in per_setup.items():
        checks.append(_flag(f"{name} setup applicable", rep.applicable))
    constants = {"mode": mode, "mu": mu, "s": s, "beta": beta_, "t": t_val,
                 "setups": {k: {"status": r.status, "log_bound": r.log_bound, "constants": r.constants,
                                "failing": r.failing} for k, r in per_setup.items()}}
    branches = {}
    if mode.startswith("large"):
        grow = max(mu ** (1.0 / (v - 1)) if v > 1 else mu, mu ** (1.0 / e)) * logn
        branches = {"poisson": mu, "clustered": grow, "psi": min(mu, grow),
                    "attained": "poisson" if mu <= grow else "clustered"}
    if not usable:
        return _finish("subgraph", checks, 0.0, constants)
    best = min(usable, key=lambda k: usable[k].raw_log_bound)
    constants["best_setup"] = best
    checks = [c for c in checks if not c["clause"].endswith("setup applicable")]
    forms = {f"{k}_{name}": val for k, r in usable.items() for name, val in r.forms.items()}
    return _finish("subgraph", checks, usable[best].raw_log_bound, constants, branches, forms,
                   all(r.chain_ok is not False for r in usable.values()))


# alternative single-step inequality


def bound_alternative(k: int, ell: int, L: float, N: float, mu: float, t: float, d: float, s: float, x0: float,
                      K: float = 1.0, q_factor: float = 1.0, certified: bool | None = None) -> BoundReport:
    """exp(-a phi(t/mu) mu) + 2 N^-l exp(-max{b t^(1/(s+1)), K} log N).

    The caller certifies sum_U Pr(|Gamma_U(H_p)| >= x) <= N^(-d x^(1/s)) for x >= x0.
    x1 also enforces d x^(1/s) - d (x/2)^(1/s) >= l, which the doubling step needs when s > 1.
    """
    if not (d > 0 and s > 0 and x0 > 0 and t > 0 and K > 0 and L > 0):
        raise ValueError("d, s, x0, t, K and L must be positive")
    if not 1 <= ell <= k:
        raise ValueError("need 1 <= ell <= k")
    checks = [_clause("N > 1", N, 1.0, ">")]
    if certified is not None:
        checks.append(_flag("degree tail certificate", certified))
    binom = math.comb(k, ell)
    x1 = max(2 * (ell / d) ** s, (ell / (d * (1 - 2 ** (-1.0 / s)))) ** s, x0)
    d_prime = d / 2 ** (1.0 / s)
    C = max((K / d_prime) ** s, x1, 1.0)
    R = max(t ** (s / (s + 1)), C)
    c = d_prime / (4 * L * q_factor * binom * C ** ((s - 1) / s))
    a = 1.0 / (4 * L * binom * C)
    b = min(d_prime, c)
    logN = math.log(N) if N > 0 else -math.inf
    first = -a * _phi_mu(t, mu)
    second = math.log(2) - ell * logN - max(b * t ** (1.0 / (s + 1)), K) * logN
    raw = _logsumexp([first, second])
    constants = {"x0": x0, "x1": x1, "d": d, "d_prime": d_prime, "s": s, "C": C, "R": R, "c": c, "a": a, "b": b,
                 "K": K, "t": t}
    branches = {"poisson": _phi_mu(t, mu), "clustered": t ** (1.0 / (s + 1)) * logN}
    return _finish("alternative", checks, raw, constants, branches, {"explicit": raw})
