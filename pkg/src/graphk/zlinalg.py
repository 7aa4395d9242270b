"""Exact integer linear algebra.

Everything here works over Python's arbitrary precision ``int``.  Two code
paths exist:

* :func:`snf` is a dense Smith normal form that tracks both unimodular
  transforms.  It is meant for small matrices and for diagnostics.
* The ``*_of_columns`` helpers work on sparse columns (``dict`` row -> value)
  and never build transforms.  They eliminate unit pivots first and only hand
  a (usually tiny) residual block to :func:`snf`.  The black-and-white stage
  groups of tree attachments run through these.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence, Union

__all__ = [
    "OMEGA",
    "IntMatrix",
    "SnfResult",
    "FpAbGroup",
    "snf",
    "invariant_factors",
    "cokernel",
    "kernel_basis",
    "subgroup_invariants",
    "cokernel_of_columns",
    "kernel_of_columns",
    "subgroup_of_columns",
    "hermite_rows",
    "determinant",
]


class _Omega:
    """Countably infinite rank.  Only equality and ordering against ints."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __str__(self):
        return "omega"

    def __reduce__(self):
        return (_Omega, ())

    def __gt__(self, other):
        return isinstance(other, int)

    def __ge__(self, other):
        return isinstance(other, int) or other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self


OMEGA = _Omega()

Rank = Union[int, _Omega]


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("matrix dimensions do not match entry count")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: int | None = None) -> IntMatrix:
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            if not data:
                raise ValueError("column count needed for a matrix with no rows")
            cols = len(data[0])
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[dict[int, int]]) -> IntMatrix:
        out = [[0] * len(columns) for _ in range(rows)]
        for j, col in enumerate(columns):
            for i, x in col.items():
                out[i][j] = x
        return cls(rows, len(columns), tuple(map(tuple, out)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def T(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.data)) if self.rows else
                         tuple(() for _ in range(self.cols)))

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        ocols = other.T.data
        return IntMatrix(self.rows, other.cols, tuple(
            tuple(sum(a * b for a, b in zip(row, c)) for c in ocols) for row in self.data))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.data, other.data)))

    def columns(self) -> list[dict[int, int]]:
        cols: list[dict[int, int]] = [{} for _ in range(self.cols)]
        for i, row in enumerate(self.data):
            for j, x in enumerate(row):
                if x:
                    cols[j][i] = x
        return cols

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> IntMatrix:
        return IntMatrix(len(rows), len(cols),
                         tuple(tuple(self.data[i][j] for j in cols) for i in rows))

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def __str__(self):
        return "\n".join(" ".join(map(str, r)) for r in self.data)


@dataclass(frozen=True)
class SnfResult:
    """``u @ a @ v == d`` with ``u``, ``v`` unimodular."""

    d: IntMatrix
    u: IntMatrix
    v: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.d[i, i] for i in range(min(self.d.rows, self.d.cols))]

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x)


def _canonical_factors(orders: Iterable[int]) -> tuple[int, list[int]]:
    """Turn a list of cyclic orders into (free rank, invariant factors)."""
    vals = [abs(int(x)) for x in orders if abs(int(x)) != 1]
    free = sum(1 for x in vals if x == 0)
    vals = [x for x in vals if x]
    # pairwise gcd/lcm sweep leaves a divisibility chain
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            a, b = vals[i], vals[j]
            g = gcd(a, b)
            vals[i], vals[j] = g, a // g * b
    return free, sorted(x for x in vals if x != 1)


@dataclass(frozen=True)
class FpAbGroup:
    """Finitely presented abelian group ``Z^free_rank + sum Z/t``.

    ``torsion`` is the ascending invariant factor list; every entry is at
    least 2 and divides the next, so field equality is isomorphism.
    """

    free_rank: Rank = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank is not OMEGA:
            if not isinstance(self.free_rank, int) or self.free_rank < 0:
                raise ValueError(f"bad free rank {self.free_rank!r}")
        t = tuple(self.torsion)
        if any(x < 2 for x in t) or any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"torsion {t} is not an invariant factor chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_orders(cls, orders: Iterable[int], extra_free: int = 0) -> FpAbGroup:
        """Direct sum of ``Z/n`` over ``orders`` (``n == 0`` meaning ``Z``)."""
        free, tors = _canonical_factors(orders)
        return cls(free + extra_free, tuple(tors))

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def torsion_order(self) -> int:
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def as_dict(self) -> dict:
        fr = "omega" if self.free_rank is OMEGA else self.free_rank
        return {"free_rank": fr, "torsion": list(self.torsion)}

    def __str__(self):
        parts = []
        if self.free_rank is OMEGA:
            parts.append("Z^omega")
        elif self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# dense Smith normal form
# ---------------------------------------------------------------------------

def _pick_pivot(a, t, m, n):
    best = None
    for i in range(t, m):
        row = a[i]
        for j in range(t, n):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
                if best[0] == 1:
                    return best
    return best


def snf(a: IntMatrix) -> SnfResult:
    """Smith normal form with transforms.

    Pivot choice is the smallest nonzero absolute value in the remaining
    block, ties broken by (row, column); the output is deterministic.
    """
    m, n = a.rows, a.cols
    A = a.tolist()
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for M in (A, V):
            for row in M:
                row[j], row[k] = row[k], row[j]

    def add_row(dst, src, q):
        # row_dst -= q * row_src
        rd, rs = A[dst], A[src]
        for j in range(n):
            if rs[j]:
                rd[j] -= q * rs[j]
        ud, us = U[dst], U[src]
        for j in range(m):
            if us[j]:
                ud[j] -= q * us[j]

    def add_col(dst, src, q):
        for M in (A, V):
            for row in M:
                if row[src]:
                    row[dst] -= q * row[src]

    t = 0
    while t < min(m, n):
        piv = _pick_pivot(A, t, m, n)
        if piv is None:
            break
        _, i, j = piv
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // p)
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // p)
            # a smaller remainder left in the pivot row or column becomes the new pivot
            best = None
            for i in range(t + 1, m):
                if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                    best = (abs(A[i][t]), i, None)
            for j in range(t + 1, n):
                if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                    best = (abs(A[t][j]), None, j)
            if best is not None:
                if best[1] is not None:
                    swap_rows(t, best[1])
                else:
                    swap_cols(t, best[2])
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    def freeze(M, r, c):
        return IntMatrix(r, c, tuple(map(tuple, M)))

    return SnfResult(freeze(A, m, n), freeze(U, m, m), freeze(V, n, n))


def determinant(a: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise ValueError("determinant of a non-square matrix")
    n = a.rows
    M = a.tolist()
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


# ---------------------------------------------------------------------------
# sparse elimination
# ---------------------------------------------------------------------------

def _unit_reduce(nrows: int, columns: Sequence[dict[int, int]]):
    """Eliminate +-1 pivots (row and column ops) from a sparse matrix.

    Returns ``(units, residual)`` where ``units`` is the number of pivots
    removed and ``residual`` is an :class:`IntMatrix` whose Smith form
    supplies the remaining invariant factors.  Cokernel and rank bookkeeping
    are preserved: coker(A) == coker(residual), rank(A) == units + rank(residual).
    """
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, dict[int, int]] = {}
    for j, col in enumerate(columns):
        c = {i: x for i, x in col.items() if x}
        cols[j] = c
        for i, x in c.items():
            rows.setdefault(i, {})[j] = x
    units = 0
    while True:
        best = None
        for j, col in cols.items():
            lc = len(col) - 1
            for i, x in col.items():
                if x == 1 or x == -1:
                    cost = (lc * (len(rows[i]) - 1), i, j)
                    if best is None or cost < best:
                        best = cost
                        if cost[0] == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pi, pj = best
        p = cols[pj][pi]
        prow = rows.pop(pi)
        pcol = cols.pop(pj)
        for j in prow:
            if j != pj:
                del cols[j][pi]
        for i, f in pcol.items():
            if i == pi:
                continue
            row = rows[i]
            del row[pj]
            q = f * p
            for j, x in prow.items():
                if j == pj:
                    continue
                v = row.get(j, 0) - q * x
                if v:
                    row[j] = v
                    cols[j][i] = v
                else:
                    row.pop(j, None)
                    cols[j].pop(i, None)
        units += 1
    # zero rows and columns carry no invariant factors
    rest_rows = sorted(i for i, r in rows.items() if r)
    rest_cols = sorted(j for j, c in cols.items() if c)
    ridx = {i: k for k, i in enumerate(rest_rows)}
    data = [[0] * len(rest_cols) for _ in rest_rows]
    for k, j in enumerate(rest_cols):
        for i, x in cols[j].items():
            data[ridx[i]][k] = x
    return units, IntMatrix(len(rest_rows), len(rest_cols), tuple(map(tuple, data)))


def invariant_factors(nrows: int, columns: Sequence[dict[int, int]]) -> tuple[int, list[int]]:
    """(rank, nonzero Smith diagonal entries excluding units) of a sparse matrix."""
    units, residual = _unit_reduce(nrows, columns)
    diag = snf(residual).diagonal if residual.rows and residual.cols else []
    nonzero = [x for x in diag if x]
    return units + len(nonzero), [x for x in nonzero if x != 1]


def cokernel_of_columns(nrows: int, columns: Sequence[dict[int, int]]) -> FpAbGroup:
    rank, factors = invariant_factors(nrows, columns)
    return FpAbGroup.from_orders(factors, extra_free=nrows - rank)


def cokernel(a: IntMatrix) -> FpAbGroup:
    """``Z^rows / image(a)`` in canonical form."""
    return cokernel_of_columns(a.rows, a.columns())


def _column_reduce(columns: list[list[dict[int, int]]]) -> list[dict[int, int]]:
    """Unimodular column operations until the ``main`` parts are echelon.

    Each column is ``[main, tag]``.  Returns the tags of the columns whose
    main part ended up zero; because the operations are unimodular and the
    surviving pivot columns are independent, those tags span exactly the
    tag-projection of the kernel of the main block.
    """
    active = set(range(len(columns)))
    by_row: dict[int, set[int]] = {}
    for k, (main, _) in enumerate(columns):
        for i in main:
            by_row.setdefault(i, set()).add(k)

    def axpy(dst, src, q):
        for part in (0, 1):
            d, s = columns[dst][part], columns[src][part]
            for i, x in s.items():
                v = d.get(i, 0) - q * x
                if v:
                    d[i] = v
                    if part == 0:
                        by_row.setdefault(i, set()).add(dst)
                else:
                    d.pop(i, None)
                    if part == 0:
                        by_row[i].discard(dst)

    while True:
        live = [(len(ks), i) for i, ks in by_row.items() if ks]
        if not live:
            break
        _, r = min(live)
        ks = by_row[r]
        while len(ks) > 1:
            c = min(ks, key=lambda k: (abs(columns[k][0][r]), len(columns[k][0]), k))
            p = columns[c][0][r]
            for k in sorted(ks - {c}):
                axpy(k, c, columns[k][0][r] // p)
        (c,) = ks
        active.discard(c)
        for i in columns[c][0]:
            by_row[i].discard(c)
        del by_row[r]
    return [columns[k][1] for k in sorted(active)]


def kernel_of_columns(ncols: int, columns: Sequence[dict[int, int]]) -> list[tuple[int, ...]]:
    """Kernel basis of a sparse matrix, in Hermite normal form."""
    work = [[dict(col), {j: 1}] for j, col in enumerate(columns)]
    tags = _column_reduce(work)
    vecs = []
    for t in tags:
        v = [0] * ncols
        for j, x in t.items():
            v[j] = x
        vecs.append(v)
    return hermite_rows(vecs)


def kernel_basis(a: IntMatrix) -> list[tuple[int, ...]]:
    """Basis of ``{x : a x = 0}`` in Z^cols, rows of a Hermite normal form.

    The kernel is saturated, so every basis vector is primitive.  Leading
    entries are positive.
    """
    return kernel_of_columns(a.cols, a.columns())


def hermite_rows(vectors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Zero rows are dropped; pivots are positive and entries above a pivot are
    reduced into ``[0, pivot)``.
    """
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    n = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < n:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            for r in nz[1:]:
                q = r[col] // p[col]
                for j in range(col, n):
                    r[j] -= q * p[j]
            nz = [r for r in nz if r[col]]
        p = nz[0]
        if p[col] < 0:
            p[:] = [-x for x in p]
        rows = [r for r in rows if r is not p and any(r)]
        for r in out:
            q = r[col] // p[col]
            if q:
                for j in range(col, n):
                    r[j] -= q * p[j]
        out.append(p)
        col += 1
    return [tuple(r) for r in out]


def subgroup_of_columns(nrows: int, relations: Sequence[dict[int, int]],
                        generators: Sequence[dict[int, int]]) -> FpAbGroup:
    """Subgroup of ``Z^nrows / span(relations)`` generated by ``generators``.

    The subgroup is ``Z^k / L`` where ``L`` collects the coefficient vectors
    ``c`` with ``sum c_i g_i`` in the relation span, i.e. the projection of
    ``ker [G | R]`` onto the generator coordinates.
    """
    work = [[dict(g), {k: 1}] for k, g in enumerate(generators)]
    work += [[dict(r), {}] for r in relations]
    tags = [t for t in _column_reduce(work) if t]
    return cokernel_of_columns(len(generators), tags)


def subgroup_invariants(ambient_relations: IntMatrix,
                        generators: Sequence[Sequence[int]]) -> FpAbGroup:
    n = ambient_relations.rows
    gens = []
    for g in generators:
        if len(g) != n:
            raise ValueError(f"generator of length {len(g)} in an ambient of rank {n}")
        gens.append({i: int(x) for i, x in enumerate(g) if x})
    return subgroup_of_columns(n, ambient_relations.columns(), gens)
