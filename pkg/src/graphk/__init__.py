"""K-theory of Cuntz-Krieger algebras of the non-backtracking edge operator.

Finite multigraphs are handled by exact Smith normal forms of ``Id - Phi``;
infinite graphs (finite core plus rays and uniformly branching trees) by
direct limits over black-and-white exhaustions and by finite-support kernels.
"""

from .graph_model import (
    BwDoubleGraph,
    DoubleGraph,
    GraphError,
    InfGraphPresentation,
    Subgraph,
    UndirectedMultigraph,
    betti_finite,
    betti_limit,
    branching_number,
    bw_extend,
    bw_subgraph,
    contract,
    contract_edge,
    double,
    exhaustion_next,
    rose,
)
from .ktheory import (
    KGroups,
    a_matrix,
    bw_group,
    canonical_reduce,
    contract_and_compare,
    k0_formula_finite,
    k0_infinite,
    k1_infinite,
    k_groups_finite,
    phi_matrix,
    reduce_lemma,
)
from .limitlab import colimit_k0, functor_chain, kernel_stable
from .zlinalg import OMEGA, FpAbGroup, IntMatrix, cokernel, kernel_basis, snf, subgroup_invariants

__version__ = "0.1.0"
