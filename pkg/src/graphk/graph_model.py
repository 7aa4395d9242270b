"""Graphs: finite multigraphs, their directed doubles, and infinite presentations.

Vertex and edge ids are strings.  The directed double of a geometric edge
``x`` joining ``u`` and ``v`` is the pair ``x`` (u -> v) and ``x~`` (v -> u);
all matrix bases are ordered lexicographically by these directed ids.

Infinite graphs are given by a finite connected core plus attachments:

* a ray ``r`` at ``v`` adds vertices ``r:1, r:2, ...`` and edges
  ``r:k`` joining ``r:(k-1)`` (``v`` for k = 1) to ``r:k``;
* a tree ``t`` at ``v`` with branching ``b`` gives ``v`` and every tree
  vertex ``b`` children.  Tree vertices are ``t:i1.i2...ik`` with each
  ``i`` in ``range(b)``; the edge into a vertex carries the vertex's name.

Attachment edges are oriented away from the core, so ``x`` points off the
core and ``x~`` points back toward it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Protocol, Union

from .zlinalg import OMEGA, Rank

__all__ = [
    "GraphError",
    "BAR",
    "bar",
    "UndirectedMultigraph",
    "DoubleGraph",
    "InfGraphPresentation",
    "Subgraph",
    "BettiLimit",
    "BwDoubleGraph",
    "double",
    "betti_finite",
    "connected_components",
    "contract",
    "contract_edge",
    "exhaustion_next",
    "seed_subgraph",
    "betti_limit",
    "branching_number",
    "bw_subgraph",
    "bw_extend",
    "rose",
    "AmbientDouble",
    "core_of",
]

BAR = "~"
_RESERVED = (":", BAR)


class GraphError(ValueError):
    pass


def bar(e: str) -> str:
    return e[:-1] if e.endswith(BAR) else e + BAR


def _check_id(kind: str, name: str) -> None:
    if not name or any(c in name for c in _RESERVED) or any(c.isspace() for c in name):
        raise GraphError(f"invalid {kind} id {name!r}: ids must be nonempty and avoid ':', '~' and spaces")


def _directed(eid: str, u: str, v: str):
    yield eid, u, v
    yield eid + BAR, v, u


class Ambient(Protocol):
    def has_vertex(self, v: str) -> bool: ...
    def incident(self, v: str) -> tuple[str, ...]: ...
    def endpoints(self, eid: str) -> tuple[str, str]: ...


@dataclass(frozen=True)
class UndirectedMultigraph:
    """Finite multigraph; loops and parallel edges allowed.

    ``edges`` holds ``(id, u, v)`` triples sorted by id; a loop repeats the vertex.
    """

    vertices: frozenset[str]
    edges: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", tuple(sorted(tuple(e) for e in self.edges)))
        seen = set()
        for eid, u, v in self.edges:
            if eid in seen:
                raise GraphError(f"duplicate edge id {eid!r}")
            seen.add(eid)
            for w in (u, v):
                if w not in self.vertices:
                    raise GraphError(f"edge {eid!r} references unknown vertex {w!r}")

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, str]] = ()) -> UndirectedMultigraph:
        vertices = list(vertices)
        edges = list(edges)
        for v in vertices:
            _check_id("vertex", v)
        for e in edges:
            _check_id("edge", e[0])
        return cls(frozenset(vertices), tuple(edges))

    @cached_property
    def _endpoints(self) -> dict[str, tuple[str, str]]:
        return {eid: (u, v) for eid, u, v in self.edges}

    @cached_property
    def _incident(self) -> dict[str, tuple[str, ...]]:
        inc: dict[str, list[str]] = {v: [] for v in self.vertices}
        for eid, u, v in self.edges:
            inc[u].append(eid)
            if v != u:
                inc[v].append(eid)
        return {v: tuple(es) for v, es in inc.items()}

    def has_vertex(self, v: str) -> bool:
        return v in self.vertices

    def incident(self, v: str) -> tuple[str, ...]:
        return self._incident[v]

    def endpoints(self, eid: str) -> tuple[str, str]:
        try:
            return self._endpoints[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    @property
    def edge_ids(self) -> list[str]:
        return [e for e, _, _ in self.edges]

    def degree(self, v: str) -> int:
        return sum(2 if self._endpoints[e][0] == self._endpoints[e][1] else 1
                   for e in self._incident[v])

    def is_connected(self) -> bool:
        return len(connected_components(self)) <= 1

    @property
    def is_finite(self) -> bool:
        return True


def connected_components(g: UndirectedMultigraph) -> list[frozenset[str]]:
    seen: set[str] = set()
    comps = []
    for start in sorted(g.vertices):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for e in g.incident(v):
                a, b = g.endpoints(e)
                w = b if a == v else a
                if w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def betti_finite(g: UndirectedMultigraph) -> int:
    """Cycle rank ``d1 - d0 + (number of components)``."""
    return len(g.edges) - len(g.vertices) + len(connected_components(g))


def rose(petals: int, vertex: str = "v") -> UndirectedMultigraph:
    return UndirectedMultigraph.build([vertex], [(f"u{j}", vertex, vertex) for j in range(1, petals + 1)])


@dataclass(frozen=True)
class DoubleGraph:
    vertices: frozenset[str]
    src: Mapping[str, str]
    rng: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "src", dict(self.src))
        object.__setattr__(self, "rng", dict(self.rng))
        if self.src.keys() != self.rng.keys():
            raise GraphError("source and range maps have different domains")
        for e in self.src:
            b = bar(e)
            if b not in self.src or b == e:
                raise GraphError(f"edge {e!r} has no reverse partner")
            if self.src[b] != self.rng[e] or self.rng[b] != self.src[e]:
                raise GraphError(f"edge {e!r} and {b!r} are not opposite")
            if self.src[e] not in self.vertices or self.rng[e] not in self.vertices:
                raise GraphError(f"edge {e!r} has an endpoint outside the vertex set")

    def __hash__(self):
        return hash((self.vertices, tuple(sorted(self.src.items())), tuple(sorted(self.rng.items()))))

    @cached_property
    def edges(self) -> tuple[str, ...]:
        return tuple(sorted(self.src))

    def bar(self, e: str) -> str:
        return bar(e)

    @cached_property
    def _out(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[self.src[e]].append(e)
        return {v: tuple(es) for v, es in out.items()}

    def out_edges(self, v: str) -> tuple[str, ...]:
        return self._out[v]

    def successors(self, e: str) -> list[str]:
        """Non-backtracking continuations of ``e``."""
        b = bar(e)
        return [f for f in self._out[self.rng[e]] if f != b]

    def is_loop(self, e: str) -> bool:
        return self.src[e] == self.rng[e]


def double(g: UndirectedMultigraph) -> DoubleGraph:
    src, rng = {}, {}
    for eid, u, v in g.edges:
        for d, a, b in _directed(eid, u, v):
            src[d], rng[d] = a, b
    return DoubleGraph(g.vertices, src, rng)


def contract(g: UndirectedMultigraph, eid: str) -> UndirectedMultigraph:
    """Contract a non-loop geometric edge; its second endpoint merges into the first."""
    keep, gone = g.endpoints(eid)
    if keep == gone:
        raise GraphError(f"cannot contract loop {eid!r}")
    ren = lambda w: keep if w == gone else w
    return UndirectedMultigraph(g.vertices - {gone},
                                tuple((e, ren(u), ren(v)) for e, u, v in g.edges if e != eid))


def contract_edge(d: DoubleGraph, e: str) -> DoubleGraph:
    """Contract directed edge ``e`` with its reverse; ``r(e)`` merges into ``s(e)``."""
    if e not in d.src:
        raise GraphError(f"unknown edge {e!r}")
    keep, gone = d.src[e], d.rng[e]
    if keep == gone:
        raise GraphError(f"cannot contract loop {e!r}")
    drop = {e, bar(e)}
    ren = lambda w: keep if w == gone else w
    return DoubleGraph(d.vertices - {gone},
                       {f: ren(s) for f, s in d.src.items() if f not in drop},
                       {f: ren(r) for f, r in d.rng.items() if f not in drop})


# ---------------------------------------------------------------------------
# infinite presentations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InfGraphPresentation:
    """Finite connected core with rays and uniformly branching trees attached."""

    core: UndirectedMultigraph
    rays: tuple[tuple[str, str], ...] = ()
    trees: tuple[tuple[str, str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(sorted(tuple(r) for r in self.rays)))
        object.__setattr__(self, "trees", tuple(sorted(tuple(t) for t in self.trees)))
        if not self.core.vertices:
            raise GraphError("core has no vertices")
        if not self.core.is_connected():
            raise GraphError("core is not connected")
        names = [r for r, _ in self.rays] + [t for t, _, _ in self.trees]
        if len(set(names)) != len(names):
            raise GraphError("duplicate attachment id")
        for name in names:
            _check_id("attachment", name)
        for _, v in self.rays:
            if v not in self.core.vertices:
                raise GraphError(f"ray attached at unknown vertex {v!r}")
        for t, v, b in self.trees:
            if v not in self.core.vertices:
                raise GraphError(f"tree attached at unknown vertex {v!r}")
            if not isinstance(b, int) or b < 2:
                raise GraphError(f"tree {t!r} needs branching degree >= 2, got {b!r}")

    @property
    def is_finite(self) -> bool:
        return not self.rays and not self.trees

    @cached_property
    def _ray_at(self) -> dict[str, str]:
        return dict(self.rays)

    @cached_property
    def _tree_at(self) -> dict[str, tuple[str, int]]:
        return {t: (v, b) for t, v, b in self.trees}

    @cached_property
    def _attached(self) -> dict[str, tuple[str, ...]]:
        extra: dict[str, list[str]] = {v: [] for v in self.core.vertices}
        for r, v in self.rays:
            extra[v].append(f"{r}:1")
        for t, v, b in self.trees:
            extra[v].extend(f"{t}:{i}" for i in range(b))
        return {v: tuple(es) for v, es in extra.items()}

    def _parse(self, name: str):
        head, sep, tail = name.partition(":")
        if not sep:
            return None
        if head in self._ray_at:
            if tail.isdigit() and int(tail) >= 1 and str(int(tail)) == tail:
                return ("ray", head, int(tail))
        elif head in self._tree_at:
            _, b = self._tree_at[head]
            parts = tail.split(".")
            if all(p.isdigit() and str(int(p)) == p and int(p) < b for p in parts):
                return ("tree", head, tuple(int(p) for p in parts))
        raise GraphError(f"unknown vertex or edge {name!r}")

    def _parent(self, name: str) -> str:
        kind, head, pos = self._parse(name)
        if kind == "ray":
            return self._ray_at[head] if pos == 1 else f"{head}:{pos - 1}"
        if len(pos) == 1:
            return self._tree_at[head][0]
        return f"{head}:" + ".".join(map(str, pos[:-1]))

    def has_vertex(self, v: str) -> bool:
        if v in self.core.vertices:
            return True
        try:
            return self._parse(v) is not None
        except GraphError:
            return False

    def incident(self, v: str) -> tuple[str, ...]:
        if v in self.core.vertices:
            return self.core.incident(v) + self._attached[v]
        kind, head, pos = self._parse(v)
        if kind == "ray":
            return (v, f"{head}:{pos + 1}")
        _, b = self._tree_at[head]
        return (v,) + tuple(f"{v}.{i}" for i in range(b))

    def endpoints(self, eid: str) -> tuple[str, str]:
        if ":" not in eid:
            return self.core.endpoints(eid)
        return (self._parent(eid), eid)

    def is_core_vertex(self, v: str) -> bool:
        return v in self.core.vertices


AmbientGraph = Union[UndirectedMultigraph, InfGraphPresentation]


def core_of(amb: AmbientGraph) -> UndirectedMultigraph:
    return amb.core if isinstance(amb, InfGraphPresentation) else amb


# ---------------------------------------------------------------------------
# exhaustion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subgraph:
    vertices: frozenset[str]
    edges: frozenset[str] = frozenset()

    def multigraph(self, amb: AmbientGraph) -> UndirectedMultigraph:
        return UndirectedMultigraph(self.vertices, tuple((e, *amb.endpoints(e)) for e in self.edges))


def _check_subgraph(amb: AmbientGraph, sub: Subgraph) -> None:
    for v in sub.vertices:
        if not amb.has_vertex(v):
            raise GraphError(f"vertex {v!r} is not in the ambient graph")
    for e in sub.edges:
        try:
            ends = amb.endpoints(e)
        except GraphError:
            raise GraphError(f"edge {e!r} is not in the ambient graph") from None
        if not set(ends) <= sub.vertices:
            raise GraphError(f"edge {e!r} has an endpoint outside the subgraph")


def seed_subgraph(amb: AmbientGraph, seed: Iterable[str]) -> Subgraph:
    """Subgraph induced on a finite vertex set; must be nonempty and connected."""
    verts = frozenset(seed)
    if not verts:
        raise GraphError("seed is empty")
    for v in verts:
        if not amb.has_vertex(v):
            raise GraphError(f"seed vertex {v!r} is not in the ambient graph")
    edges = frozenset(e for v in verts for e in amb.incident(v) if set(amb.endpoints(e)) <= verts)
    sub = Subgraph(verts, edges)
    if not sub.multigraph(amb).is_connected():
        raise GraphError("seed subgraph is not connected")
    return sub


def exhaustion_next(amb: AmbientGraph, sub: Subgraph) -> Subgraph:
    """Add every ambient edge touching ``sub`` together with its far endpoint."""
    _check_subgraph(amb, sub)
    verts, edges = set(sub.vertices), set(sub.edges)
    for v in sub.vertices:
        for e in amb.incident(v):
            edges.add(e)
            verts.update(amb.endpoints(e))
    return Subgraph(frozenset(verts), frozenset(edges))


@dataclass(frozen=True)
class BettiLimit:
    value: int | None
    step: int | None
    history: tuple[int, ...]

    @property
    def stable(self) -> bool:
        return self.value is not None

    def __str__(self):
        if self.stable:
            return f"{self.value} (stable from step {self.step})"
        return f"unstable after {len(self.history) - 1} steps"


def betti_limit(amb: AmbientGraph, seed: Iterable[str] | Subgraph | None = None,
                max_steps: int = 64) -> BettiLimit:
    """Betti number of an exhaustion, with the step where it settled.

    The sequence is final once the exhaustion contains every core edge:
    past that point only attachment edges with fresh far endpoints are added.
    A finite ambient graph is final at its fixed point.
    """
    core = core_of(amb)
    if seed is None:
        seed = [min(core.vertices)]
    sub = seed if isinstance(seed, Subgraph) else seed_subgraph(amb, seed)
    _check_subgraph(amb, sub)
    core_edges = set(core.edge_ids)
    history = []
    for _ in range(max_steps + 1):
        history.append(betti_finite(sub.multigraph(amb)))
        if core_edges <= sub.edges and core.vertices <= sub.vertices:
            value = history[-1]
            step = next(i for i, b in enumerate(history) if b == value)
            return BettiLimit(value, step, tuple(history))
        sub = exhaustion_next(amb, sub)
    return BettiLimit(None, None, tuple(history))


def branching_number(p: AmbientGraph) -> Rank:
    """Number of ends: rays counted one each, any branching tree gives omega."""
    if isinstance(p, UndirectedMultigraph):
        return 0
    if p.trees:
        return OMEGA
    return len(p.rays)


# ---------------------------------------------------------------------------
# black-and-white subgraphs
# ---------------------------------------------------------------------------

BLACK, WHITE = "black", "white"


@dataclass(frozen=True, eq=False)
class BwDoubleGraph:
    """Edges touching ``omega``; black when both ends lie in ``omega``."""

    ambient: AmbientGraph
    omega: frozenset[str]
    src: Mapping[str, str] = field(repr=False)
    rng: Mapping[str, str] = field(repr=False)
    color: Mapping[str, str] = field(repr=False)

    @cached_property
    def edges(self) -> tuple[str, ...]:
        return tuple(sorted(self.src))

    @property
    def black(self) -> list[str]:
        return [e for e in self.edges if self.color[e] == BLACK]

    @property
    def white(self) -> list[str]:
        return [e for e in self.edges if self.color[e] == WHITE]

    @cached_property
    def _out(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for e in self.edges:
            out.setdefault(self.src[e], []).append(e)
        return out

    def successors(self, e: str) -> list[str]:
        b = bar(e)
        return [f for f in self._out.get(self.rng[e], ()) if f != b]

    def covers(self, vertices: Iterable[str]) -> bool:
        return set(vertices) <= self.omega

    def __eq__(self, other):
        if not isinstance(other, BwDoubleGraph):
            return NotImplemented
        return (self.omega == other.omega and dict(self.src) == dict(other.src)
                and dict(self.rng) == dict(other.rng) and dict(self.color) == dict(other.color))

    def __hash__(self):
        return hash((self.omega, tuple(sorted(self.color.items()))))


def bw_subgraph(amb: AmbientGraph, omega: Iterable[str]) -> BwDoubleGraph:
    omega = frozenset(omega)
    src, rng, color = {}, {}, {}
    for v in omega:
        if not amb.has_vertex(v):
            raise GraphError(f"vertex {v!r} is not in the ambient graph")
        for eid in amb.incident(v):
            a, b = amb.endpoints(eid)
            c = BLACK if a in omega and b in omega else WHITE
            for d, s, r in _directed(eid, a, b):
                src[d], rng[d], color[d] = s, r, c
    return BwDoubleGraph(amb, omega, src, rng, color)


def bw_extend(b: BwDoubleGraph) -> BwDoubleGraph:
    """Elementary morphism: absorb the far endpoints of all white edges."""
    grown = set(b.omega)
    for e in b.white:
        grown.add(b.src[e])
        grown.add(b.rng[e])
    return bw_subgraph(b.ambient, grown)


class AmbientDouble:
    """Directed view of an ambient graph, built lazily edge by edge."""

    def __init__(self, amb: AmbientGraph):
        self.ambient = amb
        self._out: dict[str, tuple[str, ...]] = {}

    def ends(self, e: str) -> tuple[str, str]:
        if e.endswith(BAR):
            a, b = self.ambient.endpoints(e[:-1])
            return b, a
        return self.ambient.endpoints(e)

    def out_edges(self, w: str) -> tuple[str, ...]:
        if w not in self._out:
            out = []
            for x in self.ambient.incident(w):
                a, b = self.ambient.endpoints(x)
                if a == w:
                    out.append(x)
                if b == w:
                    out.append(x + BAR)
            self._out[w] = tuple(sorted(out))
        return self._out[w]

    def successors(self, e: str) -> list[str]:
        b = bar(e)
        return [f for f in self.out_edges(self.ends(e)[1]) if f != b]

    def directed_edges(self, sub: Subgraph) -> tuple[str, ...]:
        return tuple(sorted(d for x in sub.edges for d in (x, x + BAR)))
