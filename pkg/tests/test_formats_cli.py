import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from graphk.cli import main, run_command
from graphk.formats import ParseError, dump_graph, parse_graph, parse_matrix
from graphk.graph_model import InfGraphPresentation, UndirectedMultigraph

DATA = Path(__file__).resolve().parent.parent / "data" / "graphs"


def write(tmp_path, text, name="g.graph"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing ---------------------------------------------------------------

def test_parse_finite_and_infinite():
    g = parse_graph("V v\nE u1 v v  # loop\n")
    assert isinstance(g, UndirectedMultigraph) and g.edges == (("u1", "v", "v"),)
    p = parse_graph("V v\nE u1 v v\nR x v\nT t v 3\n")
    assert isinstance(p, InfGraphPresentation)
    assert p.rays == (("x", "v"),) and p.trees == (("t", "v", 3),)


@pytest.mark.parametrize("text, line, needle", [
    ("V v\nQ v\n", 2, "unknown declaration"),
    ("V v\nE a v\n", 2, "takes 3"),
    ("V v\nE a v w\n", 2, "unknown vertex"),
    ("V v\nV v\n", 2, "already declared"),
    ("V v\nE a v v\nR a v\n", 3, "already declared"),
    ("V v\nT t v 1\n", 2, ">= 2"),
    ("V v\nT t v two\n", 2, "not an integer"),
    ("V v\nR x w\n", 2, "unknown vertex"),
    ("V v\nE a~ v v\n", 2, "a~"),
])
def test_parse_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(ParseError) as exc:
        parse_graph(text)
    assert exc.value.line == line
    assert needle in str(exc.value)
    assert str(exc.value).startswith(f"line {line}:")


def test_parse_rejects_empty_and_disconnected_core():
    with pytest.raises(ParseError):
        parse_graph("# nothing\n")
    with pytest.raises(ParseError):
        parse_graph("V a\nV b\nR x a\n")


def test_dump_round_trip():
    for f in DATA.glob("*.graph"):
        g = parse_graph(f.read_text())
        assert parse_graph(dump_graph(g)) == g


def test_parse_matrix():
    m = parse_matrix("2 3\n1 2 3\n4 5 6\n")
    assert m.tolist() == [[1, 2, 3], [4, 5, 6]]
    with pytest.raises(ParseError) as exc:
        parse_matrix("2 2\n1 2\n3\n")
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_matrix("2 2\n1 2\n")
    with pytest.raises(ParseError):
        parse_matrix("1 1\nx\n")


# -- commands --------------------------------------------------------------

def test_k0_loop_ray():
    doc, code = run_command(["k0", str(DATA / "loop_ray.graph")])
    assert code == 0
    assert doc["k0"] == {"free_rank": 2, "torsion": []}
    assert doc["method"] == "both"
    assert [c["name"] for c in doc["checks"]] == ["k0_closed_form_vs_limit"]
    assert all(c["passed"] for c in doc["checks"])
    assert doc["trace"]["verdict"]["kind"] == "stabilized"


def test_top_level_keys():
    doc, _ = run_command(["info", str(DATA / "rose3.graph")])
    assert list(doc)[:9] == ["command", "input", "betti", "gamma", "k0", "k1", "method", "checks", "trace"]


def test_verify_rose3():
    doc, code = run_command(["verify", str(DATA / "rose3.graph")])
    assert code == 0
    assert doc["k0"] == {"free_rank": 3, "torsion": [2]}
    assert doc["k1"] == {"free_rank": 3, "torsion": []}
    assert all(c["passed"] and c["details"] is not None for c in doc["checks"])


def test_verify_infinite_inputs():
    for name in ("loop_ray", "theta_ray", "ray", "loop_binary_tree"):
        doc, code = run_command(["verify", str(DATA / f"{name}.graph")])
        assert code == 0, [c for c in doc["checks"] if not c["passed"]]
    doc, _ = run_command(["verify", str(DATA / "loop_binary_tree.graph")])
    assert doc["gamma"] == "omega"
    assert doc["k0"] == {"free_rank": "omega", "torsion": []}


def test_rank_check_reports_inequality_for_loop_ray():
    doc, code = run_command(["verify", str(DATA / "loop_ray.graph")])
    (c,) = [c for c in doc["checks"] if c["name"] == "k1_rank_vs_k0_free_rank"]
    assert c["passed"] and "K1 rank 1 != K0 free rank 2" in c["details"]
    assert doc["k0"]["free_rank"] == 2 and doc["k1"]["free_rank"] == 1


def test_snf_zero_matrix():
    doc, code = run_command(["snf", str(DATA / "zero2.mat")])
    assert code == 0
    assert doc["snf"]["diagonal"] == [0, 0]
    assert doc["cokernel"] == {"free_rank": 2, "torsion": []}


def test_k1_methods(tmp_path):
    f = str(DATA / "theta_ray.graph")
    doc, code = run_command(["k1", f, "--method", "kernel"])
    assert code == 0 and doc["k1"]["free_rank"] == 2 and len(doc["kernel_basis"]) == 2
    doc, _ = run_command(["k1", str(DATA / "rose3.graph"), "--method", "formula"])
    assert doc["k1"] == {"free_rank": 3, "torsion": []}


def test_k0_methods_finite():
    f = str(DATA / "rose3.graph")
    for m in ("formula", "matrix", "both"):
        doc, code = run_command(["k0", f, "--method", m])
        assert code == 0 and doc["k0"] == {"free_rank": 3, "torsion": [2]}


def test_unsupported_combinations_exit_2():
    doc, code = run_command(["k0", str(DATA / "rose3.graph"), "--method", "limit"])
    assert code == 2 and "infinite" in doc["error"]
    doc, code = run_command(["k0", str(DATA / "loop_ray.graph"), "--method", "matrix"])
    assert code == 2 and "finite" in doc["error"]


def test_parse_error_exit_2(tmp_path, capsys):
    f = write(tmp_path, "V v\nE a v w\n")
    assert main(["verify", f]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"].startswith("line 2:")


def test_missing_file_exit_2(tmp_path):
    _, code = run_command(["info", str(tmp_path / "missing.graph")])
    assert code == 2


def test_bad_flags_exit_2(capsys):
    assert main(["k0", str(DATA / "rose3.graph"), "--depth", "65"]) == 2
    assert main(["k0", str(DATA / "rose3.graph"), "--window", "1"]) == 2
    capsys.readouterr()


def test_empty_and_disconnected_inputs(tmp_path):
    _, code = run_command(["k0", write(tmp_path, "V v\n")])
    assert code == 2
    _, code = run_command(["k0", write(tmp_path, "V a\nV b\nE l a a\nE m b b\n")])
    assert code == 2
    doc, code = run_command(["info", write(tmp_path, "V v\n")])
    assert code == 0 and doc["betti"] == 0


def test_contract_command():
    doc, code = run_command(["contract", str(DATA / "theta_ray.graph"), "e1"])
    assert code == 0
    c = doc["contraction"]
    assert c["before"] == c["after"]
    assert c["after"]["k0"] == {"free_rank": 3, "torsion": []}
    _, code = run_command(["contract", str(DATA / "rose3.graph"), "u1"])
    assert code == 2
    _, code = run_command(["contract", str(DATA / "rose3.graph"), "nope"])
    assert code == 2


def test_contract_finite(tmp_path):
    f = write(tmp_path, "V a\nV b\nV c\nE x a b\nE y b c\nE z c a\n")
    doc, code = run_command(["contract", f, "x"])
    assert code == 0
    assert doc["contraction"]["after"]["k0"] == {"free_rank": 2, "torsion": []}


def test_trace_json_and_csv(tmp_path):
    out = tmp_path / "t.json"
    doc, code = run_command(["trace", str(DATA / "loop_ray.graph"), "--out", str(out)])
    assert code == 0 and doc["output"]["format"] == "json"
    saved = json.loads(out.read_text())
    assert saved == doc["trace"]
    out = tmp_path / "t.csv"
    run_command(["trace", str(DATA / "loop_ray.graph"), "--out", str(out), "--format", "csv"])
    rows = list(csv.DictReader(out.open()))
    assert rows and {r["verdict"] for r in rows} == {"stabilized"}


def test_seed_option_changes_nothing_observable():
    f = str(DATA / "theta_ray.graph")
    a, _ = run_command(["k0", f])
    b, _ = run_command(["k0", f, "--seed-omega", "x:3"])
    assert a["k0"] == b["k0"]
    assert a["trace"]["verdict"]["value"] == b["trace"]["verdict"]["value"]


def test_output_is_byte_deterministic():
    cmd = [sys.executable, "-m", "graphk", "verify", str(DATA / "theta_ray.graph")]
    runs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1]
    env_cmd = cmd[:]
    other = subprocess.run(env_cmd, capture_output=True, check=True,
                           env={"PYTHONHASHSEED": "123", "PATH": "/usr/bin:/bin"}).stdout
    assert other == runs[0]
