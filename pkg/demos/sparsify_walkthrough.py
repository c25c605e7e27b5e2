"""Star matching and sparsification on the complete 3-uniform hypergraph on 7 vertices."""

from tailforge.generators import gen_complete
from tailforge.hypergraph import delta
from tailforge.sparsifier import addable_star_exists, sparsify

G = gen_complete(7, 3)
print(f"before: {G.num_edges} edges, delta_1 = {delta(G, 1)}, delta_2 = {delta(G, 2)}")
for mode, ell in (("vertex", 1), ("overlap", 2)):
    res = sparsify(G, j=1, x=2, y=delta(G, 2), mode=mode, ell=ell)
    print(f"\n{mode} mode (ell = {ell}): {len(res.matching)} stars, maximal = {not addable_star_exists(res.matching)}")
    for star in res.matching.stars:
        print("  centre", star.centre, "spikes", [G.edge(i) for i in star.spikes])
    print(f"  deleted {len(res.deleted)} of {G.num_edges} (budget {res.budget:g}), delta_1 after = {res.delta_j_after}")
