"""Graph construction, boundary/volume queries, and the incidence operator."""

import pytest
from hypothesis import given, settings, strategies as st

from localflow import apply_incidence, boundary_size, build_graph, volume


def test_single_edge():
    g = build_graph(2, [(0, 1)])
    assert g.n == 2
    assert g.m == 1
    assert list(g.deg) == [1, 1]


def test_triangle_degrees():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert list(g.deg) == [2, 2, 2]
    assert g.m == 3


def test_self_loop_rejected():
    with pytest.raises(ValueError, match="self-loop"):
        build_graph(2, [(0, 0)])


def test_endpoint_out_of_range_names_edge_index():
    with pytest.raises(ValueError, match="edge 1"):
        build_graph(2, [(0, 1), (0, 2)])


def test_vertex_count_must_be_positive():
    with pytest.raises(ValueError):
        build_graph(0, [])


def test_parallel_edges_are_distinct():
    g = build_graph(2, [(0, 1), (0, 1)])
    assert g.m == 2
    assert list(g.deg) == [2, 2]
    assert boundary_size(g, {0}) == 2


def test_boundary_examples():
    tri = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert boundary_size(tri, {0}) == 2
    assert boundary_size(tri, {0, 1, 2}) == 0
    path = build_graph(3, [(0, 1), (1, 2)])
    assert boundary_size(path, {1}) == 2


def test_volume_examples():
    tri = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert volume(tri, {0, 1}) == 4
    assert volume(tri, set()) == 0
    edge = build_graph(2, [(0, 1)])
    assert volume(edge, {0, 1}) == 2


def test_membership_query_rejects_unknown_vertex():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        boundary_size(g, {5})


def test_apply_incidence_sign_convention():
    g = build_graph(2, [(0, 1)])
    assert apply_incidence(g, {0: 1.0}) == {0: 1.0, 1: -1.0}


def test_apply_incidence_zero_flow():
    g = build_graph(3, [(0, 1), (1, 2)])
    assert apply_incidence(g, {}) == {}


def test_apply_incidence_circulation_cancels():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert apply_incidence(g, {0: 1.0, 1: 1.0, 2: 1.0}) == {}


def test_apply_incidence_rejects_bad_edge_id():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError, match="edge id"):
        apply_incidence(g, {7: 1.0})


def test_adjacency_layout_is_consistent():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)])
    assert g.indptr[-1] == 2 * g.m
    assert int(g.deg.sum()) == 2 * g.m
    # every edge id appears exactly twice, once per sign
    per_edge_signs = {}
    for idx in range(2 * g.m):
        per_edge_signs.setdefault(int(g.adj_edge[idx]), []).append(
            int(g.adj_sign[idx]))
    assert all(sorted(s) == [-1, 1] for s in per_edge_signs.values())
    # adjacency blocks are sorted by edge id
    for v in range(g.n):
        ids = [int(g.adj_edge[i]) for i in range(g.indptr[v], g.indptr[v + 1])]
        assert ids == sorted(ids)


def test_graph_arrays_are_frozen():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        g.deg[0] = 5


@st.composite
def graphs(draw, max_n=10, max_m=20):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, max_m))
    edges = []
    for _ in range(m):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 2))
        if v >= u:
            v += 1
        edges.append((u, v))
    return build_graph(n, edges)


def _sparse_flow(draw, g):
    vals = st.floats(-3, 3, allow_nan=False, width=32)
    support = draw(st.sets(st.integers(0, g.m - 1), max_size=g.m))
    return {e: draw(vals) for e in support}


@given(st.data())
@settings(max_examples=200)
def test_incidence_is_linear(data):
    g = data.draw(graphs())
    f1 = _sparse_flow(data.draw, g)
    f2 = _sparse_flow(data.draw, g)
    combined = dict(f1)
    for e, x in f2.items():
        combined[e] = combined.get(e, 0.0) + x
    lhs = apply_incidence(g, combined)
    b1 = apply_incidence(g, f1)
    b2 = apply_incidence(g, f2)
    rhs = dict(b1)
    for v, x in b2.items():
        rhs[v] = rhs.get(v, 0.0) + x
    for v in set(lhs) | set(rhs):
        assert lhs.get(v, 0.0) == pytest.approx(rhs.get(v, 0.0), abs=1e-9)


@given(st.data())
@settings(max_examples=200)
def test_incidence_output_sums_to_zero(data):
    g = data.draw(graphs())
    f = _sparse_flow(data.draw, g)
    out = apply_incidence(g, f)
    assert sum(out.values()) == pytest.approx(0.0, abs=1e-9)


@given(st.data())
@settings(max_examples=200)
def test_boundary_complement_symmetry(data):
    g = data.draw(graphs())
    s = data.draw(st.sets(st.integers(0, g.n - 1), max_size=g.n))
    comp = set(range(g.n)) - s
    assert boundary_size(g, s) == boundary_size(g, comp)
