"""Direct limits along exhaustions by black-and-white subgraphs.

A chain ``E_0 -> E_1 -> ...`` of black-and-white subgraphs gives a chain of
finitely presented groups whose colimit is K0 of the infinite graph.  Raw
stage groups overcount (white boundary edges are free generators), so the
colimit is read off from the *stable image* of stage ``n`` in later stages.

Stabilization is only judged on stages whose vertex set already contains the
finite core; before that, a seed far out on a ray sees a spurious plateau.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable

from .graph_model import (
    AmbientDouble,
    AmbientGraph,
    BwDoubleGraph,
    GraphError,
    Subgraph,
    bw_extend,
    bw_subgraph,
    core_of,
    exhaustion_next,
    seed_subgraph,
)
from .ktheory import bw_relation_columns, phi_columns
from .zlinalg import FpAbGroup, cokernel_of_columns, kernel_of_columns, subgroup_of_columns

__all__ = [
    "LimitStep",
    "Verdict",
    "LimitTrace",
    "KernelResult",
    "functor_chain",
    "colimit_k0",
    "kernel_stable",
    "MAX_DEPTH",
]

DEFAULT_DEPTH = 12
MAX_DEPTH = 64


def _default_seed(amb: AmbientGraph) -> list[str]:
    return [min(core_of(amb).vertices)]


def _check_depth(depth: int) -> None:
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [0, {MAX_DEPTH}], got {depth}")


def functor_chain(p: AmbientGraph, seed: Iterable[str] | None = None, depth: int = 3) -> list[BwDoubleGraph]:
    """``[E_0, ..., E_depth]`` with ``E_0`` on the seed and ``E_{n+1} = bw_extend(E_n)``."""
    _check_depth(depth)
    seed = list(seed) if seed is not None else _default_seed(p)
    if not seed:
        raise GraphError("seed is empty")
    chain = [bw_subgraph(p, seed)]
    for _ in range(depth):
        chain.append(bw_extend(chain[-1]))
    return chain


@dataclass
class LimitStep:
    step: int
    omega_size: int
    generators: int
    group: FpAbGroup
    probes: list[tuple[int, FpAbGroup]] = field(default_factory=list)
    image: FpAbGroup | None = None
    covers_core: bool = False

    @property
    def image_rank(self):
        return None if self.image is None else self.image.free_rank


@dataclass
class Verdict:
    kind: str  # "stabilized" | "diverging" | "inconclusive"
    value: FpAbGroup | None = None
    at_step: int | None = None
    rank_lower_bounds: list[int] = field(default_factory=list)

    def __str__(self):
        if self.kind == "stabilized":
            return f"stabilized at step {self.at_step}: {self.value}"
        if self.kind == "diverging":
            return f"diverging, rank lower bounds {self.rank_lower_bounds}"
        return "inconclusive"


@dataclass
class LimitTrace:
    steps: list[LimitStep]
    verdict: Verdict
    window: int

    def as_dict(self) -> dict:
        v = self.verdict
        return {
            "window": self.window,
            "verdict": {
                "kind": v.kind,
                "value": v.value.as_dict() if v.value is not None else None,
                "at_step": v.at_step,
                "rank_lower_bounds": list(v.rank_lower_bounds),
            },
            "steps": [
                {
                    "step": s.step,
                    "omega_size": s.omega_size,
                    "generators": s.generators,
                    "group": s.group.as_dict(),
                    "covers_core": s.covers_core,
                    "probes": [{"offset": m, "image": g.as_dict()} for m, g in s.probes],
                    "image": s.image.as_dict() if s.image is not None else None,
                }
                for s in self.steps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "omega_size", "generators", "free_rank", "torsion", "image_rank", "verdict"])
        for s in self.steps:
            fr = s.group.as_dict()["free_rank"]
            ir = "" if s.image is None else s.image.as_dict()["free_rank"]
            w.writerow([s.step, s.omega_size, s.generators, fr,
                        " ".join(map(str, s.group.torsion)), ir, self.verdict.kind])
        return buf.getvalue()


class _Stages:
    """Lazily grown chain with cached presentations."""

    def __init__(self, p: AmbientGraph, seed: list[str]):
        self.core = core_of(p).vertices
        self.chain = [bw_subgraph(p, seed)]
        self.pres: dict[int, tuple[tuple[str, ...], list[dict[int, int]]]] = {}

    def get(self, k: int) -> BwDoubleGraph:
        while len(self.chain) <= k:
            self.chain.append(bw_extend(self.chain[-1]))
        return self.chain[k]

    def presentation(self, k: int):
        if k not in self.pres:
            self.pres[k] = bw_relation_columns(self.get(k))
        return self.pres[k]

    def size(self, k: int) -> int:
        return len(self.get(k).edges)

    def covers_core(self, k: int) -> bool:
        return self.get(k).covers(self.core)

    def image(self, n: int, big: int) -> FpAbGroup:
        gens, rels = self.presentation(big)
        index = {e: i for i, e in enumerate(gens)}
        small = self.get(n).edges
        return subgroup_of_columns(len(gens), rels, [{index[e]: 1} for e in small])


def colimit_k0(p: AmbientGraph, seed: Iterable[str] | None = None, max_depth: int = DEFAULT_DEPTH,
               window: int = 3, diverge_steps: int = 5, max_generators: int = 12000) -> LimitTrace:
    """Colimit of the black-and-white stage groups via stable images.

    For each step ``n`` the image of stage ``n`` in stage ``n + m`` is probed
    for ``m = 1, 2, ...`` until two consecutive probes agree (and the earlier
    probe stage holds the core).  ``window`` equal stable images in a row
    give a ``stabilized`` verdict; ``diverge_steps`` strictly increasing image
    ranks in a row give ``diverging``.  Stages larger than ``max_generators``
    are not built.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    _check_depth(max_depth)
    seed = list(seed) if seed is not None else _default_seed(p)
    st = _Stages(p, seed)
    steps: list[LimitStep] = []
    run: list[LimitStep] = []

    for n in range(max_depth + 1):
        if st.size(n) > max_generators:
            break
        gens, rels = st.presentation(n)
        rec = LimitStep(n, len(st.get(n).omega), len(gens), cokernel_of_columns(len(gens), rels),
                        covers_core=st.covers_core(n))
        steps.append(rec)
        settled = False
        for m in range(1, MAX_DEPTH + 1):
            if st.size(n + m) > max_generators:
                break
            rec.probes.append((m, st.image(n, n + m)))
            if m >= 2 and rec.probes[-1][1] == rec.probes[-2][1] and st.covers_core(n + m - 1):
                settled = True
                break
        if not settled:
            break
        rec.image = rec.probes[-1][1]
        if not rec.covers_core:
            continue
        run.append(rec)
        tail = run[-window:]
        if len(tail) == window and all(s.image == tail[0].image for s in tail):
            value = tail[0].image
            first = tail[0].step
            for s in reversed(run[:-window]):
                if s.image != value:
                    break
                first = s.step
            return LimitTrace(steps, Verdict("stabilized", value, first), window)
        tail = run[-diverge_steps:]
        if len(tail) == diverge_steps and all(a.image_rank < b.image_rank for a, b in zip(tail, tail[1:])):
            return LimitTrace(steps, Verdict("diverging", rank_lower_bounds=[s.image_rank for s in run]),
                              window)
    return LimitTrace(steps, Verdict("inconclusive", rank_lower_bounds=[s.image_rank for s in run]), window)


@dataclass
class KernelResult:
    """Finite-support kernel of ``Id - Phi`` on an exhaustion."""

    group: FpAbGroup | None
    basis: list[dict[str, int]]
    at_depth: int | None
    ranks: list[int]

    @property
    def stable(self) -> bool:
        return self.group is not None


def _truncations(p: AmbientGraph, seed: list[str]):
    sub = seed_subgraph(p, seed)
    while True:
        yield sub
        sub = exhaustion_next(p, sub)


def kernel_at(p: AmbientGraph, inner: Subgraph, outer: Subgraph, view: AmbientDouble | None = None):
    """Kernel vectors supported on ``inner``; ``outer`` must hold every successor."""
    view = view or AmbientDouble(p)
    cols_e = view.directed_edges(inner)
    rows_e = view.directed_edges(outer)
    cols = phi_columns(view, rows_e, only=cols_e, identity_minus=True)
    basis = kernel_of_columns(len(cols_e), cols)
    return [{e: x for e, x in zip(cols_e, v) if x} for v in basis]


def kernel_stable(p: AmbientGraph, seed: Iterable[str] | None = None, max_depth: int = DEFAULT_DEPTH,
                  window: int = 3) -> KernelResult:
    """Stabilized kernel over exhaustion depths.

    At depth ``d`` the columns are the edges of the depth-``d`` truncation and
    the rows those of depth ``d + 1``, so every relation a supported vector
    touches is present.  Bases are Hermite-normalized in the global
    lexicographic edge order, hence comparable across depths.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    _check_depth(max_depth)
    seed = list(seed) if seed is not None else _default_seed(p)
    core = core_of(p)
    core_edges = set(core.edge_ids)
    view = AmbientDouble(p)
    subs = _truncations(p, seed)
    inner = next(subs)
    ranks: list[int] = []
    run: list[tuple[int, list[dict[str, int]]]] = []
    for d in range(max_depth + 1):
        outer = next(subs)
        basis = kernel_at(p, inner, outer, view)
        ranks.append(len(basis))
        if core_edges <= inner.edges and core.vertices <= inner.vertices:
            run.append((d, basis))
            tail = run[-window:]
            if len(tail) == window and all(b == tail[0][1] for _, b in tail):
                return KernelResult(FpAbGroup(len(basis)), basis, tail[0][0], ranks)
        inner = outer
    return KernelResult(None, run[-1][1] if run else [], None, ranks)
