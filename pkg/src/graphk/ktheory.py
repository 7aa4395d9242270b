"""K-groups of Cuntz-Krieger algebras of the non-backtracking edge operator.

For a double graph the operator sends an edge ``e`` to the sum of the edges
leaving ``r(e)`` other than ``bar(e)``.  Matrices put the image of ``e`` in
column ``e``, so ``phi_matrix(d).m == a_matrix(d).T``.  K0 is the cokernel and
K1 the kernel of ``Id - Phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .graph_model import (
    BwDoubleGraph,
    DoubleGraph,
    GraphError,
    InfGraphPresentation,
    UndirectedMultigraph,
    bar,
    betti_finite,
    branching_number,
    contract,
    double,
)
from .zlinalg import (
    OMEGA,
    FpAbGroup,
    IntMatrix,
    cokernel_of_columns,
    kernel_of_columns,
)

__all__ = [
    "LemmaHypothesisError",
    "PhiMatrix",
    "KGroups",
    "BwGroup",
    "ContractionReport",
    "InfiniteResult",
    "phi_columns",
    "phi_matrix",
    "a_matrix",
    "id_minus_phi",
    "k_groups_finite",
    "consistent_with_omega",
    "k0_formula_finite",
    "k1_formula_finite",
    "bw_group",
    "reduce_lemma",
    "contract_and_compare",
    "canonical_reduce",
    "k0_infinite",
    "k1_infinite",
]


class LemmaHypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class PhiMatrix:
    edge_order: tuple[str, ...]
    m: IntMatrix


@dataclass(frozen=True)
class KGroups:
    k0: FpAbGroup
    k1: FpAbGroup
    edge_order: tuple[str, ...] = ()
    k1_basis: tuple[tuple[int, ...], ...] = ()

    def same_groups(self, other: KGroups) -> bool:
        return self.k0 == other.k0 and self.k1 == other.k1


def _require_edges(d: DoubleGraph) -> None:
    if not d.edges:
        raise GraphError("empty edge set: the operator acts on Z^(E^1)")


def phi_columns(d: DoubleGraph | BwDoubleGraph, edge_order: Sequence[str] | None = None,
                only: Sequence[str] | None = None, identity_minus: bool = False) -> list[dict[int, int]]:
    """Sparse columns of Phi (or Id - Phi) for the edges in ``only``.

    Row indices refer to ``edge_order``.  Successors outside ``edge_order``
    are an error, which catches truncations that drop a relation.
    """
    order = list(edge_order if edge_order is not None else d.edges)
    index = {e: i for i, e in enumerate(order)}
    cols = []
    for e in (only if only is not None else order):
        col: dict[int, int] = {}
        if identity_minus:
            col[index[e]] = 1
        sign = -1 if identity_minus else 1
        for f in d.successors(e):
            try:
                i = index[f]
            except KeyError:
                raise GraphError(f"successor {f!r} of {e!r} is outside the basis") from None
            v = col.get(i, 0) + sign
            if v:
                col[i] = v
            else:
                del col[i]
        cols.append(col)
    return cols


def phi_matrix(d: DoubleGraph) -> PhiMatrix:
    _require_edges(d)
    return PhiMatrix(d.edges, IntMatrix.from_columns(len(d.edges), phi_columns(d)))


def a_matrix(d: DoubleGraph) -> IntMatrix:
    """0-1 matrix with ``A[e][f] = 1`` iff ``f`` continues ``e`` without backtracking."""
    _require_edges(d)
    order = d.edges
    index = {e: i for i, e in enumerate(order)}
    rows = []
    for e in order:
        row = [0] * len(order)
        for f in d.successors(e):
            row[index[f]] = 1
        rows.append(row)
    return IntMatrix.from_rows(rows, cols=len(order))


def id_minus_phi(d: DoubleGraph) -> IntMatrix:
    _require_edges(d)
    return IntMatrix.from_columns(len(d.edges), phi_columns(d, identity_minus=True))


def _require_connected(g: UndirectedMultigraph) -> None:
    if not g.edges:
        raise GraphError("empty edge set: the operator acts on Z^(E^1)")
    if not g.is_connected():
        raise GraphError("graph is not connected")


def k_groups_finite(g: UndirectedMultigraph) -> KGroups:
    _require_connected(g)
    d = double(g)
    cols = phi_columns(d, identity_minus=True)
    n = len(d.edges)
    basis = kernel_of_columns(n, cols)
    return KGroups(cokernel_of_columns(n, cols), FpAbGroup(len(basis)), d.edges, tuple(basis))


def k0_formula_finite(beta: int) -> FpAbGroup:
    """``Z^beta + Z/(beta - 1)`` with ``Z/0 = Z`` and ``Z/1 = 0``."""
    if beta < 0:
        raise ValueError("negative Betti number")
    if beta == 0:
        return FpAbGroup()
    return FpAbGroup.from_orders([beta - 1], extra_free=beta)


def k1_formula_finite(beta: int) -> FpAbGroup:
    """Torsion-free part of :func:`k0_formula_finite`: rank 2 at beta = 1."""
    return FpAbGroup(k0_formula_finite(beta).free_rank)


@dataclass(frozen=True)
class BwGroup:
    group: FpAbGroup
    generators: tuple[str, ...]
    relations: tuple[str, ...]
    matrix: IntMatrix = field(repr=False)


def bw_relation_columns(b: BwDoubleGraph) -> tuple[tuple[str, ...], list[dict[int, int]]]:
    gens = b.edges
    return gens, phi_columns(b, gens, only=b.black, identity_minus=True)


def bw_group(b: BwDoubleGraph, with_matrix: bool = True) -> BwGroup:
    """One generator per edge, one relation ``e = sum successors`` per black edge."""
    gens, cols = bw_relation_columns(b)
    mat = IntMatrix.from_columns(len(gens), cols) if with_matrix else IntMatrix.zeros(0, 0)
    return BwGroup(cokernel_of_columns(len(gens), cols), gens, tuple(b.black), mat)


def reduce_lemma(t: IntMatrix, h_indices: Sequence[int]) -> IntMatrix:
    """Shrink ``t`` on ``G + H`` to ``P o t`` on ``G``.

    Needs ``t x - x`` in ``G`` for each ``H`` basis vector, i.e. the ``H x H``
    block is the identity.  Then ``P = [I | -t_GH]`` and the result is the
    Schur complement ``t_GG - t_GH t_HG``; cokernel and kernel are unchanged.
    """
    if t.rows != t.cols:
        raise ValueError("reduce_lemma needs a square matrix")
    H = sorted(set(h_indices))
    if any(not 0 <= h < t.rows for h in H):
        raise ValueError("H index out of range")
    for i in H:
        for j in H:
            if t[i, j] != int(i == j):
                raise LemmaHypothesisError(
                    f"lemma hypothesis fails: t e_{j} - e_{j} has H-component {t[i, j] - int(i == j)} at {i}")
    G = [i for i in range(t.rows) if i not in set(H)]
    if not H:
        return t
    tgg = t.submatrix(G, G)
    tgh = t.submatrix(G, H)
    thg = t.submatrix(H, G)
    return tgg - tgh @ thg


@dataclass(frozen=True)
class ContractionReport:
    edge: str
    before: KGroups
    after: KGroups
    groups_equal: bool
    lemma_route_equal: bool

    @property
    def ok(self) -> bool:
        return self.groups_equal and self.lemma_route_equal


def contract_and_compare(g: UndirectedMultigraph, eid: str) -> ContractionReport:
    u, v = g.endpoints(eid)
    if u == v:
        raise GraphError(f"cannot contract loop {eid!r}")
    _require_connected(g)
    g2 = contract(g, eid)
    before = k_groups_finite(g)
    d = double(g)
    t = id_minus_phi(d)
    h = [d.edges.index(eid), d.edges.index(bar(eid))]
    if g2.edges:
        after = k_groups_finite(g2)
        direct = id_minus_phi(double(g2))
    else:
        # contracting the only edge: the operator on Z^0, both groups trivial
        after = KGroups(FpAbGroup(), FpAbGroup())
        direct = IntMatrix.zeros(0, 0)
    lemma_ok = reduce_lemma(t, h) == direct
    return ContractionReport(eid, before, after, before.same_groups(after), lemma_ok)


def _prune_pendants(core: UndirectedMultigraph, anchored: set[str]) -> UndirectedMultigraph:
    g = core
    while len(g.vertices) > 1:
        leaf = next((v for v in sorted(g.vertices)
                     if v not in anchored and g.degree(v) == 1), None)
        if leaf is None:
            break
        (e,) = g.incident(leaf)
        g = UndirectedMultigraph(g.vertices - {leaf}, tuple(x for x in g.edges if x[0] != e))
    return g


def canonical_reduce(p: InfGraphPresentation | UndirectedMultigraph) -> InfGraphPresentation:
    """Prune finite pendant branches, then contract the core to a rose.

    Pendant pruning is itself a contraction (of a leaf edge), so both steps
    keep K0 and K1.  Attachments move to the surviving vertex.
    """
    if isinstance(p, UndirectedMultigraph):
        p = InfGraphPresentation(p)
    anchored = {v for _, v in p.rays} | {v for _, v, _ in p.trees}
    g = _prune_pendants(p.core, anchored)
    merged = {v: v for v in p.core.vertices}
    while True:
        e = next((eid for eid, a, b in g.edges if a != b), None)
        if e is None:
            break
        keep, gone = g.endpoints(e)
        g = contract(g, e)
        for v, w in merged.items():
            if w == gone:
                merged[v] = keep
    (root,) = g.vertices
    return InfGraphPresentation(
        g,
        tuple((r, merged.get(v, root)) for r, v in p.rays),
        tuple((t, merged.get(v, root), b) for t, v, b in p.trees),
    )


# ---------------------------------------------------------------------------
# infinite graphs
# ---------------------------------------------------------------------------

@dataclass
class InfiniteResult:
    """Outcome of a K-group computation on an infinite presentation.

    ``group`` is the reported value: the closed form when it was requested,
    otherwise the computed value (``None`` when a rank diverges).
    """

    method: str
    group: FpAbGroup | None
    closed_form: FpAbGroup | None = None
    computed: FpAbGroup | None = None
    agree: bool | None = None
    note: str = ""
    detail: object = None


def _require_infinite(p) -> InfGraphPresentation:
    if isinstance(p, UndirectedMultigraph) or p.is_finite:
        raise GraphError("finite graph: use k_groups_finite for finite inputs")
    return p


def k0_closed_form(p: InfGraphPresentation) -> FpAbGroup:
    gamma = branching_number(p)
    beta = betti_finite(p.core)
    return FpAbGroup(OMEGA if gamma is OMEGA else beta + gamma)


def k1_closed_form(p: InfGraphPresentation) -> FpAbGroup:
    return FpAbGroup(betti_finite(p.core))


def consistent_with_omega(verdict) -> bool:
    """A diverging verdict, or one cut short while its rank bounds kept rising."""
    bounds = verdict.rank_lower_bounds
    rising = len(bounds) >= 3 and all(a < b for a, b in zip(bounds, bounds[1:]))
    return verdict.kind == "diverging" or (verdict.kind == "inconclusive" and rising)


def k0_infinite(p: InfGraphPresentation, method: str = "both", seed=None,
                max_depth: int = 12, window: int = 3) -> InfiniteResult:
    """K0 by the rank formula ``beta + gamma``, by the direct limit, or both."""
    from .limitlab import colimit_k0

    p = _require_infinite(p)
    if method not in ("closed_form", "limit", "both"):
        raise ValueError(f"unknown method {method!r}")
    closed = k0_closed_form(p) if method != "limit" else None
    if method == "closed_form":
        return InfiniteResult(method, closed, closed_form=closed)
    trace = colimit_k0(p, seed=seed, max_depth=max_depth, window=window)
    verdict = trace.verdict
    note, computed = "", None
    if verdict.kind == "stabilized":
        computed = verdict.value
    elif verdict.kind == "diverging":
        note = "rank diverges, consistent with omega"
    else:
        note = f"no stabilization within depth {max_depth}"
    if method == "limit":
        return InfiniteResult(method, computed, computed=computed, note=note, detail=trace)
    if closed.free_rank is OMEGA:
        agree = consistent_with_omega(verdict)
        if agree and verdict.kind == "inconclusive":
            note = (f"generator budget reached; rank lower bounds {verdict.rank_lower_bounds} "
                    "still rising, consistent with omega")
    else:
        agree = computed == closed
    return InfiniteResult(method, closed, closed, computed, agree, note, trace)


def k1_infinite(p: InfGraphPresentation, method: str = "both", seed=None,
                max_depth: int = 12, window: int = 3) -> InfiniteResult:
    """K1 by the closed form ``Z^beta``, by finite-support kernels, or both."""
    from .limitlab import kernel_stable

    p = _require_infinite(p)
    if method not in ("closed_form", "kernel", "both"):
        raise ValueError(f"unknown method {method!r}")
    closed = k1_closed_form(p) if method != "kernel" else None
    if method == "closed_form":
        return InfiniteResult(method, closed, closed_form=closed)
    ks = kernel_stable(p, seed=seed, max_depth=max_depth, window=window)
    computed = ks.group if ks.stable else None
    note = "" if ks.stable else f"no stabilization within depth {max_depth}"
    if method == "kernel":
        return InfiniteResult(method, computed, computed=computed, note=note, detail=ks)
    return InfiniteResult(method, closed, closed, computed, computed == closed, note, ks)
