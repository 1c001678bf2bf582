"""Text formats: graphs, demands, and solve artifacts."""

import pytest

from localflow import CutCertificate, PotentialCertificate, build_graph
from localflow.formats import (FormatError, format_cut_artifact,
                               format_demands, format_flow_artifact,
                               format_graph, format_potential_artifact,
                               parse_artifact, parse_demands, parse_graph)


# ----------------------------------------------------------------- graphs

def test_graph_round_trip_is_stable():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    text = format_graph(g)
    assert text == "4 4\n0 1\n1 2\n2 3\n0 2\n"
    assert format_graph(parse_graph(text)) == text


def test_graph_parser_skips_blanks_and_comments():
    g = parse_graph("# a graph\n\n3 2\n# first edge\n0 1\n\n1 2\n")
    assert g.n == 3 and g.m == 2


def test_graph_parser_error_lines():
    with pytest.raises(FormatError, match="line 1: empty graph"):
        parse_graph("")
    with pytest.raises(FormatError, match="header must be"):
        parse_graph("1 2 3\n")
    with pytest.raises(FormatError, match="promises 2 edges") as ei:
        parse_graph("2 2\n0 1\n")
    assert ei.value.lineno == 2
    with pytest.raises(FormatError, match="endpoint must be an integer") as ei:
        parse_graph("# c\n2 1\nx 1\n")
    assert ei.value.lineno == 3
    with pytest.raises(FormatError, match="edge line must be"):
        parse_graph("2 1\n0 1 9\n")


def test_graph_parser_wraps_build_errors_at_header():
    with pytest.raises(FormatError, match="self-loop") as ei:
        parse_graph("2 1\n1 1\n")
    assert ei.value.lineno == 1
    with pytest.raises(FormatError, match="out of range"):
        parse_graph("2 1\n0 5\n")


# ---------------------------------------------------------------- demands

def test_demands_single_commodity_accumulates():
    bs = parse_demands("1\n0 0.5\n0 0.25\n1 -0.75\n")
    assert bs == [{0: 0.75, 1: -0.75}]


def test_demands_multi_commodity():
    bs = parse_demands("2\n1 0 1.0\n1 3 -1.0\n2 2 0.5\n2 0 -0.5\n")
    assert bs == [{0: 1.0, 3: -1.0}, {2: 0.5, 0: -0.5}]


def test_demands_round_trip_exact():
    for bs in ([{0: 0.1, 7: -0.1}],
               [{0: 1.0, 1: -1.0}, {}, {2: 1 / 3, 5: -1 / 3}]):
        assert parse_demands(format_demands(bs)) == bs


def test_demands_error_lines():
    with pytest.raises(FormatError, match="commodity count must be >= 1"):
        parse_demands("0\n")
    with pytest.raises(FormatError, match="'v value'"):
        parse_demands("1\n1 0 1.0\n")
    with pytest.raises(FormatError, match="'j v value'"):
        parse_demands("2\n0 1.0\n")
    with pytest.raises(FormatError, match="outside 1..2") as ei:
        parse_demands("2\n3 0 1.0\n")
    assert ei.value.lineno == 2
    with pytest.raises(FormatError, match="must be finite"):
        parse_demands("1\n0 inf\n")
    with pytest.raises(FormatError, match="empty demand"):
        parse_demands("# nothing\n")


# -------------------------------------------------------------- artifacts

def test_flow_artifact_round_trip():
    flows = [{0: 0.8, 2: -0.25}, {}]
    numerators = [{0: 61, 2: -19}, {}]
    residuals = [{1: 0.001}, {0: -0.5}]
    text = format_flow_artifact(0.1, 76, flows, numerators, residuals)
    doc = parse_artifact(text)
    assert doc["kind"] == "flow"
    assert doc["eps"] == 0.1
    assert doc["iterations"] == 76
    assert doc["flows"] == flows
    assert doc["numerators"] == numerators  # ints come back as exact floats
    assert all(x == int(x) for d in doc["numerators"] for x in d.values())
    assert doc["residuals"] == residuals


def test_cut_artifact_round_trip():
    cert = CutCertificate(s=(0, 3, 5), b_of_s=-2.5, boundary=2, volume=7)
    doc = parse_artifact(format_cut_artifact(cert))
    assert doc["kind"] == "cut-certificate"
    assert doc["certificate"] == cert


def test_potential_artifact_round_trip():
    cert = PotentialCertificate(phi={(0, 0): 0.1, (4, 1): -2.0, (2, 0): 1.5},
                                lhs=3.25, rhs=1.125)
    text = format_potential_artifact(cert)
    # body is sorted by (commodity, vertex), commodity labels 1-based
    assert text.splitlines()[3:] == ["phi 1 0 0.1", "phi 1 2 1.5",
                                     "phi 2 4 -2.0"]
    doc = parse_artifact(text)
    assert doc["kind"] == "potential-certificate"
    assert doc["certificate"] == cert


def test_artifact_error_lines():
    with pytest.raises(FormatError, match="empty artifact"):
        parse_artifact("\n# only comments\n")
    with pytest.raises(FormatError, match="must open with 'kind:"):
        parse_artifact("eps: 0.1\n")
    with pytest.raises(FormatError, match="unknown artifact kind"):
        parse_artifact("kind: nonsense\n")
    with pytest.raises(FormatError, match="missing the 'eps:' header"):
        parse_artifact("kind: flow\niterations: 5\ncommodities: 1\n")
    with pytest.raises(FormatError, match="bad JSON") as ei:
        parse_artifact("kind: flow\neps: 0.1\niterations: 5\n"
                       "commodities: 1\nflow 1 {bad\n")
    assert ei.value.lineno == 5
    with pytest.raises(FormatError, match="outside 1..1"):
        parse_artifact("kind: flow\neps: 0.1\niterations: 5\n"
                       "commodities: 1\nflow 2 {}\n")
    with pytest.raises(FormatError, match="'vertex v'"):
        parse_artifact("kind: cut-certificate\nb_of_s: 2.0\nboundary: 1\n"
                       "volume: 1\nvertex 0 0\n")
    with pytest.raises(FormatError, match="must be >= 1"):
        parse_artifact("kind: potential-certificate\nlhs: 2.0\nrhs: 1.0\n"
                       "phi 0 0 1.0\n")
