import random

from hypothesis import strategies as st

from graphk.graph_model import InfGraphPresentation, UndirectedMultigraph, rose
from graphk.zlinalg import IntMatrix


def random_connected_multigraph(rng: random.Random, max_vertices=10, max_edges=14, min_edges=1):
    """Spanning tree plus extra edges; loops and parallel edges allowed."""
    n = rng.randint(1, max_vertices)
    vs = [f"v{i}" for i in range(n)]
    edges = [(f"t{i}", vs[rng.randrange(i)], vs[i]) for i in range(1, n)]
    target = rng.randint(max(n - 1, min_edges), max(max_edges, n - 1, min_edges))
    k = 0
    while len(edges) < target:
        edges.append((f"x{k}", rng.choice(vs), rng.choice(vs)))
        k += 1
    return UndirectedMultigraph.build(vs, edges)


def random_int_matrix(rng: random.Random, max_rows=8, max_cols=8, lo=-5, hi=5):
    m, n = rng.randint(0, max_rows), rng.randint(0, max_cols)
    return IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)], cols=n)


def rose_with_rays(m, n):
    return InfGraphPresentation(rose(m), tuple((f"r{i}", "v") for i in range(1, n + 1)))


@st.composite
def multigraphs(draw, max_vertices=6, max_extra=6, min_edges=1):
    n = draw(st.integers(1, max_vertices))
    vs = [f"v{i}" for i in range(n)]
    edges = [(f"t{i}", vs[draw(st.integers(0, i - 1))], vs[i]) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                          min_size=max(0, min_edges - len(edges)), max_size=max_extra))
    edges += [(f"x{k}", vs[a], vs[b]) for k, (a, b) in enumerate(extra)]
    return UndirectedMultigraph.build(vs, edges)


@st.composite
def int_matrices(draw, max_rows=6, max_cols=6, lo=-5, hi=5):
    m = draw(st.integers(0, max_rows))
    n = draw(st.integers(0, max_cols))
    rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=m, max_size=m))
    return IntMatrix.from_rows(rows, cols=n)


