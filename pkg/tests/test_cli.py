"""End-to-end command-line scenarios, driven through main()."""

import json
import math

import pytest

from localflow.cli import main
from localflow.formats import parse_artifact, parse_demands, parse_graph

EDGE_GRAPH = "2 1\n0 1\n"


def _files(tmp_path, graph, demands):
    gp = tmp_path / "g.txt"
    dp = tmp_path / "b.txt"
    gp.write_text(graph)
    dp.write_text(demands)
    return str(gp), str(dp)


# ------------------------------------------------------------------ solve

def test_solve_writes_flow_artifact_to_stdout(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    assert main(["solve", gp, dp, "--eps", "0.2"]) == 0
    doc = parse_artifact(capsys.readouterr().out)
    assert doc["kind"] == "flow"
    assert 0.8 <= doc["flows"][0][0] <= 1.0


def test_solve_overload_yields_certificate_exit(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 2.0\n1 -2.0\n")
    out = tmp_path / "cert.txt"
    assert main(["solve", gp, dp, "--eps", "0.2", "--out", str(out)]) == 2
    assert "certificate ->" in capsys.readouterr().out
    doc = parse_artifact(out.read_text())
    assert doc["kind"] == "cut-certificate"
    assert doc["certificate"].s == (0,)
    # and the verifier agrees
    assert main(["verify", gp, dp, str(out)]) == 0
    assert "cut-certificate artifact verifies" in capsys.readouterr().out


def test_solve_then_verify_round_trip(tmp_path, capsys):
    gp, dp = _files(tmp_path, "4 4\n0 1\n1 2\n2 3\n3 0\n",
                    "1\n0 1.0\n2 -1.0\n")
    art = tmp_path / "flow.txt"
    assert main(["solve", gp, dp, "--eps", "0.1", "--out", str(art)]) == 0
    capsys.readouterr()
    assert main(["verify", gp, dp, str(art)]) == 0
    assert "flow artifact verifies" in capsys.readouterr().out


def test_solve_multi_certificate_round_trip(tmp_path, capsys):
    # two commodities each pushing a unit across the same single edge
    gp, dp = _files(tmp_path, EDGE_GRAPH,
                    "2\n1 0 1.0\n1 1 -1.0\n2 0 1.0\n2 1 -1.0\n")
    art = tmp_path / "cert.txt"
    assert main(["solve", gp, dp, "--eps", "0.1", "--k", "2",
                 "--out", str(art)]) == 2
    doc = parse_artifact(art.read_text())
    assert doc["kind"] == "potential-certificate"
    capsys.readouterr()
    assert main(["verify", gp, dp, str(art)]) == 0


def test_solve_usage_errors(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    assert main(["solve", gp, dp, "--eps", "1.5"]) == 1
    assert "eps must lie in" in capsys.readouterr().err
    assert main(["solve", gp, dp, "--eps", "0.2", "--k", "3"]) == 1
    assert "does not match" in capsys.readouterr().err
    bad = tmp_path / "bad.txt"
    bad.write_text("2 9\n0 1\n")
    assert main(["solve", str(bad), dp, "--eps", "0.2"]) == 1
    err = capsys.readouterr().err
    assert "bad.txt" in err and "line 2" in err


def test_solve_stats_json(tmp_path):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    stats_path = tmp_path / "stats.json"
    art = tmp_path / "flow.txt"
    assert main(["solve", gp, dp, "--eps", "0.25", "--audit",
                 "--out", str(art), "--stats", str(stats_path)]) == 0
    doc = json.loads(stats_path.read_text())
    assert doc["kind"] == "single"
    assert doc["audit"] == {"enabled": True, "violations": 0, "first": None}
    assert doc["totals"]["work"] > 0
    assert "series" not in doc


# ----------------------------------------------------------------- verify

def test_verify_flags_corrupted_flow(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    art = tmp_path / "flow.txt"
    assert main(["solve", gp, dp, "--eps", "0.2", "--out", str(art)]) == 0
    doc = parse_artifact(art.read_text())
    t = doc["iterations"]
    num = doc["numerators"][0][0]  # parsed back as a float
    # keep the numerator but tamper with the published flow value
    lines = art.read_text().splitlines()
    lines = [ln if not ln.startswith("flow 1") else
             f'flow 1 {{"0": 0.123}}' for ln in lines]
    art.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["verify", gp, dp, str(art)]) == 3
    err = capsys.readouterr().err
    assert f"does not equal numerator {num} / {t}" in err
    assert err.count("FAIL:") >= 1


def test_verify_rejects_non_strict_cut(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    art = tmp_path / "cut.txt"
    art.write_text("kind: cut-certificate\nb_of_s: 1.0\nboundary: 1\n"
                   "volume: 1\nvertex 0\n")
    assert main(["verify", gp, dp, str(art)]) == 3
    assert "does not exceed" in capsys.readouterr().err


def test_verify_cut_needs_single_commodity(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH,
                    "2\n1 0 1.0\n1 1 -1.0\n2 1 1.0\n2 0 -1.0\n")
    art = tmp_path / "cut.txt"
    art.write_text("kind: cut-certificate\nb_of_s: 2.0\nboundary: 1\n"
                   "volume: 1\nvertex 0\n")
    assert main(["verify", gp, dp, str(art)]) == 3
    assert "single-commodity" in capsys.readouterr().err


def test_verify_honours_eps_override(tmp_path, capsys):
    gp, dp = _files(tmp_path, EDGE_GRAPH, "1\n0 1.0\n1 -1.0\n")
    art = tmp_path / "flow.txt"
    assert main(["solve", gp, dp, "--eps", "0.3", "--out", str(art)]) == 0
    capsys.readouterr()
    # demanding a tolerance the run never promised should fail
    assert main(["verify", gp, dp, str(art), "--eps", "1e-9"]) == 3


# -------------------------------------------------------------------- gen

def test_gen_path_exact_bytes(capsys):
    assert main(["gen", "--kind", "path", "--n", "3"]) == 0
    assert capsys.readouterr().out == "3 2\n0 1\n1 2\n"


def test_gen_is_deterministic(tmp_path):
    def run(tag):
        gp = tmp_path / f"g{tag}.txt"
        dp = tmp_path / f"b{tag}.txt"
        assert main(["gen", "--kind", "random-regular", "--n", "30",
                     "--d", "3", "--seed", "7", "--k", "2",
                     "--demand", "random-balanced 6 3.0",
                     "--out-graph", str(gp), "--out-demands", str(dp)]) == 0
        return gp.read_bytes(), dp.read_bytes()

    assert run("a") == run("b")


def test_gen_random_balanced_demand_properties(tmp_path):
    gp = tmp_path / "g.txt"
    dp = tmp_path / "b.txt"
    assert main(["gen", "--kind", "random-gnm", "--n", "40", "--m", "80",
                 "--seed", "3", "--demand", "random-balanced 10 5.0",
                 "--out-graph", str(gp), "--out-demands", str(dp)]) == 0
    (b,) = parse_demands(dp.read_text())
    assert len(b) == 10
    assert math.fsum(abs(x) for x in b.values()) == pytest.approx(5.0)
    assert math.fsum(b.values()) == pytest.approx(0.0, abs=1e-12)
    g = parse_graph(gp.read_text())
    assert g.n == 40 and g.m == 80


def test_gen_pairs_spec(tmp_path):
    dp = tmp_path / "b.txt"
    assert main(["gen", "--kind", "path", "--n", "5", "--k", "2",
                 "--demand", "pairs 1 0 3 1.5 2 1 2 0.5",
                 "--out-graph", str(tmp_path / "g.txt"),
                 "--out-demands", str(dp)]) == 0
    assert parse_demands(dp.read_text()) == [{0: 1.5, 3: -1.5},
                                             {1: 0.5, 2: -0.5}]


def test_gen_usage_errors(tmp_path, capsys):
    assert main(["gen", "--kind", "grid", "--n", "4"]) == 1
    assert "--rows is required" in capsys.readouterr().err
    assert main(["gen", "--kind", "path", "--n", "3",
                 "--demand", "pairs 1 0 1"]) == 1
    assert "groups of" in capsys.readouterr().err
    assert main(["gen", "--kind", "path", "--n", "3",
                 "--demand", "random-balanced 2 1.0"]) == 1
    assert "--out-demands is required" in capsys.readouterr().err


# ------------------------------------------------------------------ bench

def test_bench_table_shape(tmp_path):
    out = tmp_path / "table.txt"
    assert main(["bench", "--ms", "2000,4000", "--support", "4",
                 "--l1", "2.0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].split() == ["m", "n", "eps", "T", "work", "bound",
                                "work/bound"]
    for row, m in zip(lines[1:], (2000, 4000)):
        cols = row.split()
        assert int(cols[0]) == m and int(cols[1]) == m // 2
        assert float(cols[6]) < 2.0  # the locality budget holds with margin


def test_argparse_errors_become_exit_1(capsys):
    assert main(["solve"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["frobnicate"]) == 1
