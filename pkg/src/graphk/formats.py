"""Text formats for graphs and integer matrices.

Graph files hold one declaration per line; ``#`` starts a comment::

    V <vertex>
    E <edge> <vertex> <vertex>     # equal vertices make a loop
    R <ray> <vertex>               # one-sided infinite path
    T <tree> <vertex> <b>          # infinite tree, b >= 2 children everywhere

Matrix files start with ``rows cols`` followed by ``rows`` lines of integers.
"""

from __future__ import annotations

from pathlib import Path

from .graph_model import GraphError, InfGraphPresentation, UndirectedMultigraph, _check_id
from .zlinalg import IntMatrix

__all__ = ["ParseError", "parse_graph", "load_graph", "dump_graph", "parse_matrix", "load_matrix"]


class ParseError(ValueError):
    def __init__(self, line: int | None, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}" if line is not None else reason)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_graph(text: str) -> UndirectedMultigraph | InfGraphPresentation:
    vertices: dict[str, int] = {}
    edges: list[tuple[int, str, str, str]] = []
    rays: list[tuple[int, str, str]] = []
    trees: list[tuple[int, str, str, int]] = []
    names: dict[str, int] = {}

    def claim(name, lineno, kind):
        try:
            _check_id(kind, name)
        except GraphError as exc:
            raise ParseError(lineno, str(exc)) from None
        if name in names:
            raise ParseError(lineno, f"{kind} id {name!r} already declared on line {names[name]}")
        names[name] = lineno

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        tag, *args = line.split()
        arity = {"V": 1, "E": 3, "R": 2, "T": 3}.get(tag)
        if arity is None:
            raise ParseError(lineno, f"unknown declaration {tag!r} (expected V, E, R or T)")
        if len(args) != arity:
            raise ParseError(lineno, f"{tag} takes {arity} field(s), got {len(args)}")
        if tag == "V":
            try:
                _check_id("vertex", args[0])
            except GraphError as exc:
                raise ParseError(lineno, str(exc)) from None
            if args[0] in vertices:
                raise ParseError(lineno, f"vertex {args[0]!r} already declared on line {vertices[args[0]]}")
            vertices[args[0]] = lineno
        elif tag == "E":
            claim(args[0], lineno, "edge")
            edges.append((lineno, *args))
        elif tag == "R":
            claim(args[0], lineno, "ray")
            rays.append((lineno, *args))
        else:
            claim(args[0], lineno, "tree")
            try:
                b = int(args[2])
            except ValueError:
                raise ParseError(lineno, f"branching degree {args[2]!r} is not an integer") from None
            if b < 2:
                raise ParseError(lineno, f"branching degree must be >= 2, got {b}")
            trees.append((lineno, args[0], args[1], b))

    for lineno, _, *ends in edges:
        for v in ends:
            if v not in vertices:
                raise ParseError(lineno, f"unknown vertex {v!r}")
    for lineno, _, v, *_ in rays + trees:
        if v not in vertices:
            raise ParseError(lineno, f"attachment at unknown vertex {v!r}")
    if not vertices:
        raise ParseError(None, "graph has no vertices")

    core = UndirectedMultigraph(frozenset(vertices), tuple(e[1:] for e in edges))
    if not rays and not trees:
        return core
    try:
        return InfGraphPresentation(core, tuple(r[1:] for r in rays), tuple(t[1:] for t in trees))
    except GraphError as exc:
        raise ParseError(None, str(exc)) from None


def load_graph(path: str | Path) -> UndirectedMultigraph | InfGraphPresentation:
    return parse_graph(Path(path).read_text())


def dump_graph(g: UndirectedMultigraph | InfGraphPresentation) -> str:
    core = g.core if isinstance(g, InfGraphPresentation) else g
    lines = [f"V {v}" for v in sorted(core.vertices)]
    lines += [f"E {e} {u} {v}" for e, u, v in core.edges]
    if isinstance(g, InfGraphPresentation):
        lines += [f"R {r} {v}" for r, v in g.rays]
        lines += [f"T {t} {v} {b}" for t, v, b in g.trees]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> IntMatrix:
    lines = [(i, _strip(s)) for i, s in enumerate(text.splitlines(), start=1)]
    lines = [(i, s) for i, s in lines if s]
    if not lines:
        raise ParseError(None, "empty matrix file")
    lineno, header = lines[0]
    try:
        rows, cols = map(int, header.split())
    except ValueError:
        raise ParseError(lineno, "header must be 'rows cols'") from None
    if rows < 0 or cols < 0:
        raise ParseError(lineno, "negative dimension")
    body = lines[1:]
    if len(body) != rows:
        raise ParseError(body[-1][0] if body else lineno, f"expected {rows} rows, found {len(body)}")
    data = []
    for lineno, s in body:
        try:
            row = [int(x) for x in s.split()]
        except ValueError:
            raise ParseError(lineno, "non-integer entry") from None
        if len(row) != cols:
            raise ParseError(lineno, f"expected {cols} entries, found {len(row)}")
        data.append(row)
    return IntMatrix.from_rows(data, cols=cols)


def load_matrix(path: str | Path) -> IntMatrix:
    return parse_matrix(Path(path).read_text())
