"""Upper-tail workbench for weighted edge counts in random induced subhypergraphs."""

from .bounds import (
    BoundReport,
    Structure,
    bound_alternative,
    bound_app_randinduced,
    bound_app_randinduced_small,
    bound_app_subgraph,
    bound_basic,
    bound_chernoff,
    bound_easy_p,
    bound_extended,
    bound_small,
    phi,
    structure_from_hypergraph,
    structure_from_model,
)
from .generators import (
    PatternGraph,
    SubgraphModel,
    analyze_density,
    gen_additive_quadruples,
    gen_ap,
    gen_complete,
    gen_ell_sum,
    gen_linear_system,
    gen_rs_sums,
    gen_schur,
)
from .hypergraph import Hypergraph, degree_profile, delta, gamma, mu_profile
from .oracle import SubsetHistogram, exact_distribution
from .sampler import TailModel, mc_tail, mc_tails
from .sparsifier import decompose, greedy_star_matching, sparsify

__version__ = "0.1.0"
