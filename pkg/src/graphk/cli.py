"""Command line entry point: ``graphk <command> ...``.

Every command prints one JSON document.  Exit status is 0 when all checks
pass, 1 when a check fails and 2 on bad input or an unsupported option.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .graph_model import (
    GraphError,
    InfGraphPresentation,
    UndirectedMultigraph,
    betti_finite,
    betti_limit,
    branching_number,
    bw_subgraph,
    contract,
    double,
    exhaustion_next,
    seed_subgraph,
)
from .ktheory import (
    a_matrix,
    bw_group,
    canonical_reduce,
    consistent_with_omega,
    contract_and_compare,
    k0_formula_finite,
    k0_infinite,
    k1_formula_finite,
    k1_infinite,
    k_groups_finite,
    phi_matrix,
)
from .formats import ParseError, load_graph, load_matrix
from .limitlab import DEFAULT_DEPTH, MAX_DEPTH, colimit_k0, kernel_stable
from .zlinalg import OMEGA, FpAbGroup, cokernel, snf

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _render(g: FpAbGroup | None):
    return None if g is None else g.as_dict()


def _rank(r):
    return "omega" if r is OMEGA else r


def _check(name: str, passed: bool, details: str = "") -> dict:
    if not passed and not details:
        details = "check failed"
    return {"name": name, "passed": bool(passed), "details": details}


class Run:
    """Shared state for one graph command."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.graph = load_graph(args.file)
        self.finite = isinstance(self.graph, UndirectedMultigraph)
        self.core = self.graph if self.finite else self.graph.core
        self.seed = args.seed_omega.split(",") if getattr(args, "seed_omega", None) else None
        self.doc = {
            "command": command,
            "input": self._summary(),
            "betti": betti_finite(self.core),
            "gamma": _rank(branching_number(self.graph)),
            "k0": None,
            "k1": None,
            "method": None,
            "checks": [],
            "trace": None,
        }

    def _summary(self) -> dict:
        g = self.graph
        return {
            "path": str(self.args.file),
            "finite": self.finite,
            "vertices": len(self.core.vertices),
            "edges": len(self.core.edges),
            "rays": 0 if self.finite else len(g.rays),
            "trees": 0 if self.finite else len(g.trees),
        }

    def require_finite_ok(self):
        if self.finite:
            if not self.core.edges:
                raise UsageError("empty edge set: K-theory needs at least one edge")
            if not self.core.is_connected():
                raise UsageError("graph is not connected: K-theory commands need a connected graph")

    def check(self, name, passed, details=""):
        self.doc["checks"].append(_check(name, passed, details))

    @property
    def depth(self):
        return self.args.depth

    @property
    def window(self):
        return self.args.window


def cmd_info(run: Run):
    bl = betti_limit(run.graph, run.seed)
    run.doc["betti_limit"] = {"value": bl.value, "step": bl.step, "history": list(bl.history)}
    run.check("betti_limit_matches_betti", bl.value == run.doc["betti"],
              f"exhaustion gives {bl}, core formula gives {run.doc['betti']}")


def cmd_k0(run: Run):
    m = run.args.method
    run.doc["method"] = m
    if run.finite:
        run.require_finite_ok()
        if m == "limit":
            raise UsageError("--method limit needs an infinite graph; use formula, matrix or both")
        beta = run.doc["betti"]
        if m == "formula":
            run.doc["k0"] = _render(k0_formula_finite(beta))
            return
        kg = k_groups_finite(run.graph)
        run.doc["k0"] = _render(kg.k0)
        if m == "both":
            f = k0_formula_finite(beta)
            run.check("k0_formula_vs_matrix", f == kg.k0, f"formula {f}, matrix {kg.k0}")
        return
    if m == "matrix":
        raise UsageError("--method matrix needs a finite graph; use formula, limit or both")
    method = {"formula": "closed_form"}.get(m, m)
    res = k0_infinite(run.graph, method, run.seed, run.depth, run.window)
    run.doc["k0"] = _render(res.group)
    if res.detail is not None:
        run.doc["trace"] = res.detail.as_dict()
    if m == "both":
        run.check("k0_closed_form_vs_limit", res.agree,
                  f"closed form {res.closed_form}, limit {res.computed or res.note}")
    elif m == "limit" and res.group is None:
        run.check("k0_limit", consistent_with_omega(res.detail.verdict) and branching_number(run.graph) is OMEGA,
                  res.note)


def cmd_k1(run: Run):
    m = run.args.method
    run.doc["method"] = m
    if run.finite:
        run.require_finite_ok()
        beta = run.doc["betti"]
        if m == "formula":
            run.doc["k1"] = _render(k1_formula_finite(beta))
            return
        kg = k_groups_finite(run.graph)
        run.doc["k1"] = _render(kg.k1)
        run.doc["kernel_basis"] = [{e: x for e, x in zip(kg.edge_order, v) if x} for v in kg.k1_basis]
        if m == "both":
            f = k1_formula_finite(beta)
            run.check("k1_formula_vs_kernel", f == kg.k1, f"torsion-free part of formula {f}, kernel {kg.k1}")
        return
    method = {"formula": "closed_form"}.get(m, m)
    res = k1_infinite(run.graph, method, run.seed, run.depth, run.window)
    run.doc["k1"] = _render(res.group)
    if res.detail is not None:
        run.doc["kernel_basis"] = res.detail.basis
    if m == "both":
        run.check("k1_closed_form_vs_kernel", res.agree,
                  f"closed form {res.closed_form}, kernel {res.computed or res.note}")


def cmd_contract(run: Run):
    edge = run.args.edge
    if edge not in run.core.edge_ids:
        raise UsageError(f"unknown core edge {edge!r}")
    u, v = run.core.endpoints(edge)
    if u == v:
        raise UsageError(f"cannot contract loop {edge!r}")
    if run.finite:
        run.require_finite_ok()
        rep = contract_and_compare(run.graph, edge)
        run.doc["k0"], run.doc["k1"] = _render(rep.before.k0), _render(rep.before.k1)
        run.doc["contraction"] = {"edge": edge, "before": {"k0": _render(rep.before.k0), "k1": _render(rep.before.k1)},
                                  "after": {"k0": _render(rep.after.k0), "k1": _render(rep.after.k1)}}
        run.check("k_groups_equal", rep.groups_equal, f"before {rep.before.k0}/{rep.before.k1}, "
                                                        f"after {rep.after.k0}/{rep.after.k1}")
        run.check("lemma_route_equals_contracted_matrix", rep.lemma_route_equal)
        return
    before = _infinite_groups(run.graph, run)
    after = _infinite_groups(_contract_presentation(run.graph, edge), run)
    run.doc["k0"], run.doc["k1"] = _render(before[0]), _render(before[1])
    run.doc["contraction"] = {"edge": edge, "before": {"k0": _render(before[0]), "k1": _render(before[1])},
                              "after": {"k0": _render(after[0]), "k1": _render(after[1])}}
    run.check("k_groups_equal", before == after, f"before {before}, after {after}")


def _contract_presentation(p: InfGraphPresentation, edge: str) -> InfGraphPresentation:
    keep, gone = p.core.endpoints(edge)
    ren = lambda w: keep if w == gone else w
    return InfGraphPresentation(contract(p.core, edge), tuple((r, ren(v)) for r, v in p.rays),
                                tuple((t, ren(v), b) for t, v, b in p.trees))


def _infinite_groups(p: InfGraphPresentation, run: Run, seed=None):
    """(K0, K1) by limit and kernel; K0 is ``Z^omega`` when the limit diverges."""
    trace = colimit_k0(p, seed=seed, max_depth=run.depth, window=run.window)
    ks = kernel_stable(p, seed=seed, max_depth=run.depth, window=run.window)
    v = trace.verdict
    k0 = v.value if v.kind == "stabilized" else FpAbGroup(OMEGA) if consistent_with_omega(v) else None
    return k0, ks.group


def cmd_trace(run: Run):
    trace = colimit_k0(run.graph, seed=run.seed, max_depth=run.depth, window=run.window)
    run.doc["method"] = "limit"
    run.doc["trace"] = trace.as_dict()
    if trace.verdict.kind == "stabilized":
        run.doc["k0"] = _render(trace.verdict.value)
    out = Path(run.args.out)
    out.write_text(trace.to_json() + "\n" if run.args.format == "json" else trace.to_csv())
    run.doc["output"] = {"path": str(out), "format": run.args.format}


def cmd_verify(run: Run):
    run.doc["method"] = "both"
    if run.finite:
        run.require_finite_ok()
        _verify_finite(run)
    else:
        _verify_infinite(run)


def _operator_checks(run: Run, g: UndirectedMultigraph):
    if not g.edges:
        return
    d = double(g)
    a = a_matrix(d)
    run.check("phi_equals_a_transpose", phi_matrix(d).m == a.T)
    idx = {e: i for i, e in enumerate(d.edges)}
    zero_one = all(x in (0, 1) for row in a.data for x in row)
    no_back = all(a[idx[e], idx[d.bar(e)]] == 0 for e in d.edges)
    run.check("a_matrix_zero_one_non_backtracking", zero_one and no_back,
              "" if zero_one and no_back else f"0-1: {zero_one}, bar entries zero: {no_back}")


def _verify_finite(run: Run):
    g, beta = run.graph, run.doc["betti"]
    _operator_checks(run, g)
    kg = k_groups_finite(g)
    run.doc["k0"], run.doc["k1"] = _render(kg.k0), _render(kg.k1)
    f = k0_formula_finite(beta)
    run.check("k0_formula_vs_matrix", f == kg.k0, f"formula {f}, matrix {kg.k0}")
    eq = kg.k1.free_rank == kg.k0.free_rank
    run.check("k1_rank_vs_k0_free_rank", eq,
              f"K1 rank {kg.k1.free_rank} {'=' if eq else '!='} K0 free rank {kg.k0.free_rank} "
              "(equality expected for finite graphs)")
    note = ""
    if beta == 1:
        note = "; the reading K1 = Z^beta would give rank 1, the kernel has rank 2"
    run.check("k1_is_torsion_free_part_of_k0", kg.k1 == k1_formula_finite(beta),
              f"kernel {kg.k1}, torsion-free part of formula {k1_formula_finite(beta)}{note}")
    bl = betti_limit(g, run.seed)
    run.check("betti_limit_matches_betti", bl.value == beta, f"exhaustion gives {bl}")
    allblack = bw_group(bw_subgraph(g, g.vertices)).group
    run.check("all_black_group_equals_k0", allblack == kg.k0, f"all-black {allblack}, k0 {kg.k0}")
    for e, u, v in g.edges:
        if u == v:
            continue
        rep = contract_and_compare(g, e)
        run.check(f"contraction_invariance[{e}]", rep.ok,
                  f"after: {rep.after.k0}/{rep.after.k1}, lemma route {'agrees' if rep.lemma_route_equal else 'differs'}")
    red = canonical_reduce(g).core
    rk = k_groups_finite(red) if red.edges else None
    same = rk.same_groups(kg) if rk else kg.k0.is_trivial and kg.k1.is_trivial
    run.check("canonical_reduce_preserves_k_groups", same,
              f"rose({len(red.edges)}): K0 {rk.k0 if rk else 0}, K1 {rk.k1 if rk else 0}")


def _verify_infinite(run: Run):
    p, beta = run.graph, run.doc["betti"]
    gamma = branching_number(p)
    bl = betti_limit(p, run.seed)
    run.check("betti_limit_matches_betti", bl.value == beta, f"exhaustion gives {bl}")
    sub = seed_subgraph(p, run.seed or [min(p.core.vertices)])
    for _ in range(2):
        sub = exhaustion_next(p, sub)
    _operator_checks(run, sub.multigraph(p))

    r0 = k0_infinite(p, "both", run.seed, run.depth, run.window)
    r1 = k1_infinite(p, "both", run.seed, run.depth, run.window)
    run.doc["k0"], run.doc["k1"] = _render(r0.group), _render(r1.group)
    run.doc["trace"] = r0.detail.as_dict()
    run.doc["kernel_basis"] = r1.detail.basis
    run.check("k0_closed_form_vs_limit", r0.agree, f"closed form {r0.closed_form}, limit {r0.computed or r0.note}")
    images = [s.image for s in r0.detail.steps if s.image is not None]
    torsion_free = bool(images) and all(not g.torsion for g in images)
    run.check("k0_torsion_vanishes", torsion_free,
              "all stable images torsion-free" if torsion_free else f"images {[str(g) for g in images]}")
    run.check("k1_closed_form_vs_kernel", r1.agree, f"closed form {r1.closed_form}, kernel {r1.computed or r1.note}")
    core_edges = {e for x in p.core.edge_ids for e in (x, x + "~")}
    support = {e for vec in r1.detail.basis for e in vec}
    run.check("kernel_support_in_core", support <= core_edges,
              f"support outside core: {sorted(support - core_edges)}" if support - core_edges else "")
    k0_rank = r0.closed_form.free_rank
    k1_rank = r1.closed_form.free_rank
    run.check("k1_rank_vs_k0_free_rank", k0_rank > k1_rank,
              f"K1 rank {k1_rank} != K0 free rank {_rank(k0_rank)} "
              f"(inequality expected for infinite graphs: gamma = {_rank(gamma)} >= 1)")
    base = _infinite_groups(p, run, run.seed)
    for e, u, v in p.core.edges:
        if u == v:
            continue
        other = _infinite_groups(_contract_presentation(p, e), run)
        run.check(f"contraction_invariance[{e}]", other == base and None not in base,
                  f"before {tuple(map(str, base))}, after {tuple(map(str, other))}")
    red = _infinite_groups(canonical_reduce(p), run)
    run.check("canonical_reduce_preserves_k_groups", red == base,
              f"reduced {tuple(map(str, red))}, original {tuple(map(str, base))}")


def cmd_snf(args) -> tuple[dict, int]:
    a = load_matrix(args.file)
    res = snf(a)
    ok = res.u @ a @ res.v == res.d
    doc = {
        "command": "snf",
        "input": {"path": str(args.file), "rows": a.rows, "cols": a.cols},
        "snf": {"diagonal": res.diagonal, "d": res.d.tolist(), "u": res.u.tolist(), "v": res.v.tolist()},
        "cokernel": cokernel(a).as_dict(),
        "checks": [_check("u_a_v_equals_d", ok)],
    }
    return doc, EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"info": cmd_info, "k0": cmd_k0, "k1": cmd_k1, "contract": cmd_contract,
            "trace": cmd_trace, "verify": cmd_verify}


def _depth(text: str) -> int:
    d = int(text)
    if not 0 <= d <= MAX_DEPTH:
        raise argparse.ArgumentTypeError(f"depth must be between 0 and {MAX_DEPTH}")
    return d


def _window(text: str) -> int:
    w = int(text)
    if w < 2:
        raise argparse.ArgumentTypeError("window must be at least 2")
    return w


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", type=Path)
        p.add_argument("--seed-omega", help="comma separated seed vertices for exhaustions")
        p.add_argument("--depth", type=_depth, default=DEFAULT_DEPTH)
        p.add_argument("--window", type=_window, default=3)
        return p

    graph_cmd("info", "Betti number, branching number and a summary")
    graph_cmd("k0", "K0 of the graph algebra").add_argument(
        "--method", choices=["formula", "matrix", "limit", "both"], default="both")
    graph_cmd("k1", "K1 of the graph algebra").add_argument(
        "--method", choices=["formula", "kernel", "both"], default="both")
    graph_cmd("contract", "K-groups before and after contracting a core edge").add_argument("edge")
    t = graph_cmd("trace", "export the direct-limit trace")
    t.add_argument("--out", required=True)
    t.add_argument("--format", choices=["json", "csv"], default="json")
    graph_cmd("verify", "run every cross-check")
    s = sub.add_parser("snf", help="Smith normal form of a matrix file")
    s.add_argument("file", type=Path)
    return parser


def run_command(argv: list[str] | None = None) -> tuple[dict, int]:
    """Parse ``argv`` and return ``(document, exit code)`` without printing."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "snf":
            return cmd_snf(args)
        run = Run(args, args.command)
        COMMANDS[args.command](run)
    except (ParseError, GraphError, UsageError, OSError) as exc:
        return {"command": args.command, "error": str(exc)}, EXIT_INPUT
    failed = [c for c in run.doc["checks"] if not c["passed"]]
    return run.doc, EXIT_CHECK_FAILED if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        doc, code = run_command(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INPUT if exc.code else EXIT_OK
    stream = sys.stderr if "error" in doc else sys.stdout
    print(json.dumps(doc, indent=2), file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
