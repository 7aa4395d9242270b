"""Acceptance criteria, one test each; every test prints a single pass/fail line.

Run just these with ``pytest tests/test_acceptance.py -v -s``.
"""

import random
import time

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from graphk.cli import run_command
from graphk.graph_model import (
    InfGraphPresentation,
    UndirectedMultigraph,
    betti_finite,
    betti_limit,
    branching_number,
    double,
    rose,
)
from graphk.ktheory import (
    a_matrix,
    contract_and_compare,
    k0_closed_form,
    k0_formula_finite,
    k0_infinite,
    k1_closed_form,
    k1_infinite,
    k_groups_finite,
    phi_matrix,
    reduce_lemma,
)
from graphk.limitlab import colimit_k0, kernel_stable
from graphk.zlinalg import OMEGA, FpAbGroup, IntMatrix, cokernel, determinant, kernel_basis, snf
from helpers import multigraphs, random_connected_multigraph, rose_with_rays

GRID = [(m, n) for m in range(4) for n in range(1, 5)]


def test_criterion_01_finite_formula(report):
    rng = random.Random(1)
    start = time.perf_counter()
    graphs = [random_connected_multigraph(rng, max_vertices=10, max_edges=14) for _ in range(60)]
    graphs += [UndirectedMultigraph.build(["a", "b"], [("e", "a", "b")]), rose(1)]
    bad = []
    for g in graphs:
        k = k_groups_finite(g)
        if k.k0 != k0_formula_finite(betti_finite(g)) or k.k1.free_rank != k.k0.free_rank:
            bad.append(g)
    elapsed = time.perf_counter() - start
    betas = {betti_finite(g) for g in graphs}
    ok = not bad and elapsed < 10 and {0, 1} <= betas and all(len(g.edges) <= 14 for g in graphs)
    report(1, ok, f"{len(graphs)} graphs, beta in {sorted(betas)}, {len(bad)} mismatches, {elapsed:.2f}s")
    assert ok


def test_criterion_02_contraction(report):
    rng = random.Random(2)
    start = time.perf_counter()
    pairs = 0
    bad = []
    while pairs < 120:
        g = random_connected_multigraph(rng, max_vertices=10, max_edges=14)
        edges = [e for e, u, v in g.edges if u != v]
        if not edges:
            continue
        e = rng.choice(edges)
        rep = contract_and_compare(g, e)
        pairs += 1
        if not rep.ok:
            bad.append((g, e))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    report(2, ok, f"{pairs} (graph, edge) pairs, {len(bad)} failures, {elapsed:.2f}s")
    assert ok


def test_criterion_03_lemma_engine(report):
    rng = random.Random(3)
    bad = 0
    count = 250
    for _ in range(count):
        n = rng.randint(1, 8)
        H = rng.sample(range(n), rng.randint(0, n))
        rows = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
        for i in H:
            for j in H:
                rows[i][j] = int(i == j)
        t = IntMatrix.from_rows(rows, cols=n)
        s = reduce_lemma(t, H)
        if cokernel(s) != cokernel(t) or len(kernel_basis(s)) != len(kernel_basis(t)):
            bad += 1
    report(3, bad == 0, f"{count} matrices satisfying the block hypothesis, {bad} disagreements")
    assert bad == 0


def test_criterion_04_k0_rays(report):
    start = time.perf_counter()
    bad = []
    for m, n in GRID:
        p = rose_with_rays(m, n)
        want = FpAbGroup(m + n)
        closed = k0_closed_form(p)
        trace = colimit_k0(p, max_depth=8, window=3)
        v = trace.verdict
        images_clean = all(not s.image.torsion for s in trace.steps if s.image is not None)
        if not (closed == want and v.kind == "stabilized" and v.value == want
                and v.at_step + trace.window - 1 <= 8 and images_clean):
            bad.append((m, n, str(closed), str(v)))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30
    report(4, ok, f"{len(GRID)} presentations, K0 = Z^(m+n) by closed form and colimit, "
                  f"{len(bad)} failures, {elapsed:.2f}s")
    assert ok, bad


def test_criterion_05_k1_rays(report):
    bad = []
    for m, n in GRID:
        p = rose_with_rays(m, n)
        ks = kernel_stable(p)
        petals = {f"u{j}" for j in range(1, m + 1)}
        lattice = all(set(vec) <= petals | {x + "~" for x in petals}
                      and all(vec.get(u, 0) == -vec.get(u + "~", 0) for u in petals)
                      for vec in ks.basis)
        if not (k1_closed_form(p) == FpAbGroup(m) and ks.group == FpAbGroup(m) and lattice):
            bad.append((m, n))
    report(5, not bad, f"{len(GRID)} presentations, K1 = Z^m with basis in the u_j - bar(u_j) lattice, "
                       f"{len(bad)} failures")
    assert not bad


def test_criterion_06_counterexample(tmp_path, report):
    p = rose_with_rays(1, 1)
    k0, k1 = k0_infinite(p), k1_infinite(p)
    groups_ok = k0.group == k0.computed == FpAbGroup(2) and k1.group == k1.computed == FpAbGroup(1)
    f = tmp_path / "loop_ray.graph"
    f.write_text("V v\nE u1 v v\nR x v\n")
    doc, code = run_command(["verify", str(f)])
    (inf_check,) = [c for c in doc["checks"] if c["name"] == "k1_rank_vs_k0_free_rank"]
    inf_ok = code == 0 and inf_check["passed"] and "!=" in inf_check["details"]
    rng = random.Random(6)
    fin_ok = True
    for i in range(20):
        g = random_connected_multigraph(rng)
        path = tmp_path / f"g{i}.graph"
        path.write_text("".join(f"V {v}\n" for v in sorted(g.vertices))
                        + "".join(f"E {e} {u} {v}\n" for e, u, v in g.edges))
        d, c = run_command(["verify", str(path)])
        (chk,) = [x for x in d["checks"] if x["name"] == "k1_rank_vs_k0_free_rank"]
        fin_ok &= c == 0 and chk["passed"] and " = " in chk["details"]
    ok = groups_ok and inf_ok and fin_ok
    report(6, ok, f"loop + ray: K0 {k0.group}, K1 {k1.group}; verify reports "
                  f"'{inf_check['details'].split(' (')[0]}' and equality on 20 finite graphs")
    assert ok


def test_criterion_07_seed_independence(report):
    theta = UndirectedMultigraph.build(["a", "b"], [("x", "a", "b"), ("y", "a", "b"), ("z", "a", "b")])
    square = UndirectedMultigraph.build(["a", "b", "c", "d"],
                                        [("p", "a", "b"), ("q", "b", "c"), ("r", "c", "d"), ("s", "d", "a")])
    cases = [
        (rose_with_rays(1, 1), [["v"], ["r1:1"], ["r1:6"], ["v", "r1:1", "r1:2"]]),
        (rose_with_rays(2, 2), [["v"], ["r1:4"], ["r2:2", "r2:3"], ["r1:1", "v", "r2:1"]]),
        (InfGraphPresentation(theta, (("w", "b"),)), [["a"], ["b"], ["a", "b"], ["w:3"]]),
        (InfGraphPresentation(square, (("w", "a"), ("z", "c"))), [["a"], ["c"], ["b", "c"], ["z:5"]]),
        (InfGraphPresentation(rose(1), trees=(("t", "v", 2),)), [["v"], ["t:0"], ["t:1.0"], ["v", "t:1"]]),
    ]
    bad = []
    for p, seeds in cases:
        seen = set()
        for seed in seeds:
            v = colimit_k0(p, seed=seed).verdict
            ks = kernel_stable(p, seed=seed)
            seen.add((betti_limit(p, seed).value, v.kind, v.value, ks.group,
                      tuple(tuple(sorted(b.items())) for b in ks.basis)))
        if len(seen) != 1:
            bad.append((p, seen))
    report(7, not bad, f"{len(cases)} presentations x 4 seeds, {len(bad)} seed-dependent results")
    assert not bad


def test_criterion_08_operator(report):
    rng = random.Random(8)
    count, bad = 120, 0
    for _ in range(count):
        d = double(random_connected_multigraph(rng))
        a = a_matrix(d)
        zero_one = all(x in (0, 1) for row in a.tolist() for x in row)
        no_back = all(a[i, d.edges.index(d.bar(e))] == 0 for i, e in enumerate(d.edges))
        if not (phi_matrix(d).m == a.T and zero_one and no_back):
            bad += 1
    report(8, bad == 0, f"{count} random double graphs, Phi = A^T, A is 0-1 without backtracking, {bad} failures")
    assert bad == 0


_DIVERGENCE: list[tuple] = []


@settings(max_examples=25, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
@given(multigraphs(max_vertices=4, max_extra=3), st.data())
def _divergence_property(g, data):
    v = data.draw(st.sampled_from(sorted(g.vertices)))
    p = InfGraphPresentation(g, trees=(("t", v, 2),))
    beta = betti_finite(g)
    verdict = colimit_k0(p).verdict
    bounds = verdict.rank_lower_bounds
    extra = [b - beta for b in bounds]
    # Type II counting: every binary branching adds one free class, so the
    # excess over beta is the leaf count of the truncated tree and doubles per step
    counting = bool(extra) and extra[0] >= 2 and extra[0] & (extra[0] - 1) == 0 \
        and all(y == 2 * x for x, y in zip(extra, extra[1:]))
    ok = (branching_number(p) is OMEGA and verdict.kind == "diverging" and len(bounds) >= 5
          and all(x < y for x, y in zip(bounds, bounds[1:])) and counting)
    _DIVERGENCE.append((ok, bounds))
    assert ok, (g, v, verdict)


def test_criterion_09_divergence(report):
    _DIVERGENCE.clear()
    try:
        _divergence_property()
        ok = True
    except AssertionError:
        ok = False
    fixed = colimit_k0(InfGraphPresentation(rose(1), trees=(("t", "v", 2),))).verdict.rank_lower_bounds
    ok = ok and fixed == [1 + 2 ** (n + 1) for n in range(len(fixed))]
    report(9, ok, f"{len(_DIVERGENCE)} random cores + binary tree diverge with leaf-count rank bounds; "
                  f"rose(1) + tree bounds {fixed}")
    assert ok


def test_criterion_10_zlinalg(report):
    rng = random.Random(10)
    snf_bad = kern_bad = det_bad = 0
    count = 600
    for _ in range(count):
        m, n = rng.randint(0, 8), rng.randint(0, 8)
        a = IntMatrix.from_rows([[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)], cols=n)
        r = snf(a)
        snf_bad += r.u @ a @ r.v != r.d
        kern_bad += r.rank + len(kernel_basis(a)) != a.cols
    dets = 0
    while dets < 200:
        n = rng.randint(1, 8)
        a = IntMatrix.from_rows([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
        det = determinant(a)
        if det == 0:
            continue
        dets += 1
        g = cokernel(a)
        det_bad += g.free_rank != 0 or g.torsion_order != abs(det)
    ok = not (snf_bad or kern_bad or det_bad)
    report(10, ok, f"{count} SNFs ({snf_bad} bad), {count} rank-nullity ({kern_bad} bad), "
                   f"{dets} |det| = torsion order ({det_bad} bad)")
    assert ok
