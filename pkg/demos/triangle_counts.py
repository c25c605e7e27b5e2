"""Triangle counts in G(14, p): Monte Carlo tails next to the subgraph-count bounds."""

from tailforge.bounds import bound_app_subgraph
from tailforge.generators import PatternGraph, SubgraphModel, analyze_density
from tailforge.sampler import TailModel, mc_tails

pattern = PatternGraph.parse("K3")
dens = analyze_density(pattern)
print(f"K3: strictly balanced {dens.strictly_balanced}, beta {dens.beta:g}, s {dens.s}")
model = SubgraphModel(pattern, 14, "edge")
for p in (0.05, 0.1):
    mu = model.mean(p)
    ests = mc_tails(TailModel(model, "graph-binomial", p, seed=1), [1.5 * mu, 2 * mu], 200_000)
    for eps, est in zip((0.5, 1.0), ests):
        rep = bound_app_subgraph(pattern, 14, p, mode="large", eps=eps)
        bound = f"{rep.bound:.6f}" if rep.applicable else "not applicable"
        print(f"p={p} eps={eps}: MC {est.estimate:.4f} [{est.ci_lo:.4f}, {est.ci_hi:.4f}], bound {bound}")
