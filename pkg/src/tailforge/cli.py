"""Command line front end: ``tailforge {gen,stats,bound,simulate,verify,report}``.

Each command reads an optional JSON config (``--config``); explicit flags
override its fields. Exit codes: 0 ran, 1 usage or config error, 2 a
verification campaign found a violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import campaigns
from .bounds import bound_app_subgraph
from .generators import (
    GENERATOR_NAMES,
    PatternGraph,
    SubgraphModel,
    gen_additive_quadruples,
    gen_ap,
    gen_complete,
    gen_ell_sum,
    gen_linear_system,
    gen_rs_sums,
    gen_schur,
)
from .hypergraph import Hypergraph, degree_profile, expected_weight, mu_profile, validate_P
from .oracle import SubsetHistogram
from .sampler import CSV_COLUMNS, TailModel, config_hash, default_seed, estimate_row, mc_tails

HYPERGRAPH_THEOREMS = ("randinduced", "randinduced_small", "easy_p", "small", "basic", "extended", "alternative")
SUBGRAPH_MODES = ("small", "sg", "large", "large-balanced")
BOUND_COLUMNS = ["instance", "theorem", "p", "eps", "t", "threshold", "status", "log10_bound", "raw_log10_bound",
                 "failing", "seed", "config_hash"]
# Keys that do not change results; kept out of config_hash.
OUTPUT_KEYS = ("out", "json_out", "threads")
# Exact degree tails for the alternative bound enumerate all 2^N vertex subsets.
ALTERNATIVE_MAX_N = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# instance construction


def build_generator(name: str, n: int, k: int | None = None, ell: int | None = None, r: int | None = None,
                    s: int | None = None, matrix=None, pattern: str | None = None) -> Hypergraph:
    if n is None:
        raise UsageError("generator needs --n")
    if name in ("subgraph-edge", "subgraph-vertex"):
        if not pattern:
            raise UsageError(f"{name} needs --pattern")
        return SubgraphModel(PatternGraph.parse(pattern), n, name.split("-")[1]).exposure_hypergraph()
    if name == "ap":
        return gen_ap(n, k or 3)
    if name == "schur":
        return gen_schur(n)
    if name == "ellsum":
        return gen_ell_sum(n, ell or 1)
    if name == "quad":
        return gen_additive_quadruples(n)
    if name == "rssum":
        if r is None or s is None:
            raise UsageError("rssum needs --r and --s")
        return gen_rs_sums(n, r, s)
    if name == "linsys":
        if matrix is None:
            raise UsageError("linsys needs --matrix")
        if isinstance(matrix, str):
            matrix = json.loads(matrix)
        return gen_linear_system(n, matrix)
    if name == "complete":
        return gen_complete(n, k or 3)
    raise UsageError(f"unknown generator {name!r}")


GENERATORS = GENERATOR_NAMES


def _instance(cfg: dict):
    """(label, Hypergraph | SubgraphModel) from a config's instance fields."""
    if cfg.get("pattern"):
        if cfg.get("n") is None:
            raise UsageError("pattern instances need n")
        pattern = PatternGraph.parse(cfg["pattern"])
        return f"{cfg['pattern']}@n={cfg['n']}", SubgraphModel(pattern, int(cfg["n"]), "edge")
    if cfg.get("input"):
        path = Path(cfg["input"])
        if not path.exists():
            raise UsageError(f"input file {path} not found")
        return path.stem, Hypergraph.from_json(path.read_text())
    gen = cfg.get("generator")
    if not gen:
        raise UsageError("config needs one of generator, input or pattern")
    H = build_generator(gen, cfg.get("n"), cfg.get("k"), cfg.get("ell"), cfg.get("r"), cfg.get("s"),
                        cfg.get("matrix"))
    label = gen + "".join(f"_{key}{cfg[key]}" for key in ("n", "k", "ell", "r", "s") if cfg.get(key) is not None)
    return label, H


# config handling


def _grid(text, cast=float):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    return [cast(v) for v in str(text).split(",") if v.strip()]


def _load_config(args, fields) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    for name in fields:
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    if cfg.get("seed") is None:
        cfg["seed"] = default_seed()
    return cfg


def _hash(cfg: dict) -> str:
    return config_hash({k: v for k, v in cfg.items() if k not in OUTPUT_KEYS})


def _format(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(rows: list[dict], columns: list[str], dest: str | None) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _format(row.get(c)) for c in columns})
    _emit(buf.getvalue(), dest)


def _emit(text: str, dest: str | None) -> None:
    if dest:
        Path(dest).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# commands


def cmd_gen(args) -> int:
    H = build_generator(args.name, args.n, args.k, args.ell, args.r, args.s, args.matrix, args.pattern)
    prof = degree_profile(H)
    _emit(H.to_json() + "\n", args.out)
    info = sys.stderr if not args.out else sys.stdout
    print(f"edges={H.num_edges} n={H.n} k={H.k} deltas={list(prof.deltas)}", file=info)
    return 0


def cmd_stats(args) -> int:
    cfg = _load_config(args, ("input", "generator", "n", "k", "ell", "r", "s", "matrix", "pattern", "p"))
    label, target = _instance(cfg)
    ps = _grid(cfg.get("p")) or []
    if isinstance(target, SubgraphModel):
        out = {"instance": label, "v": target.v, "e": target.e, "copies": target.copies,
               "D": target.D, "means": {repr(p): target.mean(p) for p in ps}}
    else:
        prof = degree_profile(target, math.factorial(target.k))
        out = {"instance": label, "n": target.n, "k": target.k, "edges": target.num_edges,
               "degree_profile": prof.to_dict(),
               "standing_assumptions": validate_P(target, target.k, target.L, target.n),
               "mu_profiles": [mu_profile(target, p).to_dict() for p in sorted(ps)]}
    _emit(_dump(out), cfg.get("out"))
    return 0


def _hypergraph_bound_rows(label, H, ps, epss, theorems, cfg, digest):
    hist = SubsetHistogram(H, vertex_degrees=True) if "alternative" in theorems and H.n <= ALTERNATIVE_MAX_N else None
    profile = degree_profile(H)
    rows, reports = [], []
    for p in sorted(ps):
        mu = expected_weight(H, p)
        for eps in sorted(epss):
            got = campaigns.bound_reports(H, p, eps, hist, profile)
            for thm in theorems:
                rep = got.get(thm)
                if rep is None:
                    reason = "exact degree tails need N <= 20" if thm == "alternative" and mu > 0 else "zero mean"
                    rows.append({"instance": label, "theorem": thm, "p": p, "eps": eps, "t": eps * mu,
                                 "threshold": (1 + eps) * mu,
                                 "status": "not_applicable", "failing": reason,
                                 "seed": cfg["seed"], "config_hash": digest})
                    continue
                d = rep.to_dict()
                rows.append({"instance": label, "theorem": thm, "p": p, "eps": eps, "t": eps * mu,
                             "threshold": (1 + eps) * mu,
                             "status": d["status"], "log10_bound": d["log10_bound"],
                             "raw_log10_bound": d["raw_log10_bound"],
                             "failing": ";".join(c["clause"] for c in rep.failing),
                             "seed": cfg["seed"], "config_hash": digest})
                reports.append({"instance": label, "p": p, "eps": eps, "report": d})
    return rows, reports


def _subgraph_bound_rows(label, model, ps, epss, modes, cfg, digest):
    rows, reports = [], []
    for p in sorted(ps):
        mu = model.mean(p)
        for eps in sorted(epss):
            for mode in modes:
                kwargs = {"t": eps * mu} if mode == "sg" else {"eps": eps}
                if mode == "sg" and not eps * mu > 0:
                    continue
                rep = bound_app_subgraph(model.pattern, model.n, p, mode, **kwargs)
                d = rep.to_dict()
                rows.append({"instance": label, "theorem": f"subgraph-{mode}", "p": p, "eps": eps, "t": eps * mu,
                             "threshold": (1 + eps) * mu,
                             "status": d["status"], "log10_bound": d["log10_bound"],
                             "raw_log10_bound": d["raw_log10_bound"],
                             "failing": ";".join(c["clause"] for c in rep.failing),
                             "seed": cfg["seed"], "config_hash": digest})
                reports.append({"instance": label, "p": p, "eps": eps, "report": d})
    return rows, reports


def cmd_bound(args) -> int:
    cfg = _load_config(args, ("input", "generator", "n", "k", "ell", "r", "s", "matrix", "pattern", "p", "eps",
                              "theorems", "seed", "out", "json_out"))
    label, target = _instance(cfg)
    ps, epss = _grid(cfg.get("p")), _grid(cfg.get("eps"))
    if not ps or not epss:
        raise UsageError("bound needs nonempty p and eps grids")
    if any(not 0 < p <= 1 for p in ps) or any(not e > 0 for e in epss):
        raise UsageError("p must lie in (0, 1] and eps must be positive")
    digest = _hash(cfg)
    if isinstance(target, SubgraphModel):
        modes = _grid(cfg.get("theorems"), str) or list(SUBGRAPH_MODES)
        bad = [m for m in modes if m not in SUBGRAPH_MODES]
        if bad:
            raise UsageError(f"unknown subgraph modes {bad}; choose from {list(SUBGRAPH_MODES)}")
        rows, reports = _subgraph_bound_rows(label, target, ps, epss, modes, cfg, digest)
    else:
        theorems = _grid(cfg.get("theorems"), str) or list(HYPERGRAPH_THEOREMS)
        bad = [t for t in theorems if t not in HYPERGRAPH_THEOREMS]
        if bad:
            raise UsageError(f"unknown theorems {bad}; choose from {list(HYPERGRAPH_THEOREMS)}")
        rows, reports = _hypergraph_bound_rows(label, target, ps, epss, theorems, cfg, digest)
    _write_csv(rows, BOUND_COLUMNS, cfg.get("out"))
    if cfg.get("json_out"):
        Path(cfg["json_out"]).write_text(_dump({"config_hash": digest, "seed": cfg["seed"], "reports": reports}))
    return 0


def _uniform_mean(target, m: int) -> float:
    if isinstance(target, SubgraphModel):
        slots = math.comb(target.n, 2)
        return target.copies * math.comb(slots - target.e, m - target.e) / math.comb(slots, m) if m >= target.e else 0.0
    terms = [float(w) * math.comb(target.n - int(s), m - int(s)) / math.comb(target.n, m)
             for s, w in zip(target.sizes.tolist(), target.weights.tolist()) if m >= s]
    return math.fsum(terms)


def cmd_simulate(args) -> int:
    cfg = _load_config(args, ("input", "generator", "n", "k", "ell", "r", "s", "matrix", "pattern", "p", "m",
                              "eps", "t", "trials", "seed", "threads", "out"))
    label, target = _instance(cfg)
    trials = cfg.get("trials")
    if trials is None or int(trials) < 1:
        raise UsageError("simulate needs trials >= 1")
    ps, ms = _grid(cfg.get("p")), _grid(cfg.get("m"), int)
    if bool(ps) == bool(ms):
        raise UsageError("give exactly one of a p grid or an m grid")
    epss, ts = _grid(cfg.get("eps")), _grid(cfg.get("t"))
    if not epss and not ts:
        raise UsageError("simulate needs an eps or t grid")
    graph = isinstance(target, SubgraphModel)
    regime = ("graph-" if graph else "") + ("binomial" if ps else "uniform")
    digest = _hash(cfg)
    seed = int(cfg["seed"])
    rows = []
    for param in sorted(ps or ms):
        try:
            model = TailModel(target, regime, param, seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if ps:
            mean = target.mean(param) if graph else expected_weight(target, param)
        else:
            mean = _uniform_mean(target, int(param))
        thresholds = sorted({(1 + e) * mean for e in (epss or [])} | {mean + t for t in (ts or [])})
        for est in mc_tails(model, thresholds, int(trials), seed, cfg.get("threads")):
            row = estimate_row(model, est, digest)
            row["target"] = label
            rows.append(row)
    _write_csv(rows, CSV_COLUMNS, cfg.get("out"))
    return 0


QUICK_SIZES = {"chernoff": {"cases": 50}, "bk": {"cases": 500}, "sparsifier": {"cases": 200},
               "decomposition": {"qualified": 100}, "bounds": {"ns": [12, 13, 14]}}


def cmd_verify(args) -> int:
    cfg = _load_config(args, ("campaigns", "seed", "threads", "quick", "out"))
    names = _grid(cfg.get("campaigns"), str) or list(campaigns.CAMPAIGNS)
    bad = [n for n in names if n not in campaigns.CAMPAIGNS]
    if bad:
        raise UsageError(f"unknown campaigns {bad}; choose from {sorted(campaigns.CAMPAIGNS)}")
    sizes = dict(QUICK_SIZES) if cfg.get("quick") else {}
    sizes.update(cfg.get("sizes", {}))
    digest = _hash(cfg)
    results = campaigns.run_all(int(cfg["seed"]), cfg.get("threads"), names, sizes)
    total = sum(r["violation_count"] for r in results)
    report = {"seed": cfg["seed"], "config_hash": digest, "campaigns": results, "violation_count": total}
    text = _dump(report)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    for r in results:
        status = "ok" if r["violation_count"] == 0 else "VIOLATION"
        print(f"{r['campaign']}: cases={r['cases']} checks={r['checks']} violations={r['violation_count']} {status}")
    if total:
        print(_dump([v for r in results for v in r["violations"]]), file=sys.stderr, end="")
        return 2
    return 0


def _read_csv(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def cmd_report(args) -> int:
    """Join bound rows with simulation rows on (p, threshold) and flag MC evidence against a bound."""
    bounds = _read_csv(args.bounds)
    sims = _read_csv(args.simulate) if args.simulate else []
    rows = []
    for b in bounds:
        row = {"instance": b["instance"], "theorem": b["theorem"], "p": b["p"], "eps": b["eps"],
               "status": b["status"], "log10_bound": b["log10_bound"]}
        if sims and b["status"] == "ok":
            p, thr = float(b["p"]), float(b["threshold"])
            match = [s for s in sims if math.isclose(float(s["param"]), p)
                     and math.isclose(float(s["threshold"]), thr, rel_tol=1e-9)]
            if match:
                s = match[0]
                bound = 10 ** float(b["log10_bound"])
                row.update(estimate=s["estimate"], ci_lo=s["ci_lo"],
                           consistent=str(float(s["ci_lo"]) <= bound).lower())
        rows.append(row)
    columns = ["instance", "theorem", "p", "eps", "status", "log10_bound", "estimate", "ci_lo", "consistent"]
    _write_csv(rows, columns, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailforge", description="Upper-tail bounds for random induced subhypergraphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_flags(p):
        p.add_argument("--config", help="JSON config; flags override its fields")
        p.add_argument("--input", help="hypergraph JSON file")
        p.add_argument("--generator", choices=GENERATORS)
        p.add_argument("--pattern", help="pattern graph such as K3, K1,2, 2K2, C4, P4")
        p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--ell", type=int)
        p.add_argument("--r", type=int)
        p.add_argument("--s", type=int)
        p.add_argument("--matrix")

    g = sub.add_parser("gen", help="write a generated hypergraph as JSON")
    g.add_argument("name", choices=GENERATORS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--ell", type=int)
    g.add_argument("--r", type=int)
    g.add_argument("--s", type=int)
    g.add_argument("--matrix", help="JSON integer matrix, e.g. '[[1,1,-1]]'")
    g.add_argument("--pattern", help="pattern graph for the subgraph generators")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    st = sub.add_parser("stats", help="degree and mean profiles")
    instance_flags(st)
    st.add_argument("--p", help="comma-separated probabilities")
    st.add_argument("--out")
    st.set_defaults(func=cmd_stats)

    b = sub.add_parser("bound", help="evaluate tail bounds over p and eps grids")
    instance_flags(b)
    b.add_argument("--p")
    b.add_argument("--eps")
    b.add_argument("--theorems", help="comma-separated theorem ids or subgraph modes")
    b.add_argument("--seed", type=int)
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--json-out", dest="json_out", help="full reports as JSON")
    b.set_defaults(func=cmd_bound)

    sm = sub.add_parser("simulate", help="Monte Carlo tail estimates")
    instance_flags(sm)
    sm.add_argument("--p")
    sm.add_argument("--m")
    sm.add_argument("--eps")
    sm.add_argument("--t")
    sm.add_argument("--trials", type=int)
    sm.add_argument("--seed", type=int)
    sm.add_argument("--threads", type=int)
    sm.add_argument("--out")
    sm.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run verification campaigns")
    v.add_argument("--config")
    v.add_argument("--campaigns", help=f"comma-separated subset of {','.join(campaigns.CAMPAIGNS)}")
    v.add_argument("--seed", type=int)
    v.add_argument("--threads", type=int)
    v.add_argument("--quick", action="store_true", default=None, help="smaller campaign sizes")
    v.add_argument("--out", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="join bound and simulation CSVs")
    r.add_argument("--bounds", required=True)
    r.add_argument("--simulate")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tailforge: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"tailforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
