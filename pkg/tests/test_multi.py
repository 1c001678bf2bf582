"""k-commodity rounds and solver, including the k=1 collapse onto the
single-commodity path."""

import pytest

from localflow import (
    build_graph,
    solve_multi,
    solve_single,
    verify_flow_output,
    verify_potential_certificate,
)
from localflow.generators import (grid_graph, random_balanced_demand,
                                  random_gnm_graph, random_regular_graph)
from localflow.multi import (MultiState, flow_step, precheck_multi,
                             rounded_potential, solve_multi_reference,
                             termination_check, update_weights)
from localflow.sources import edge_congestion


def edge_in_8():
    """One edge (0, 1) embedded in n=8 so the threshold sits at 8."""
    return build_graph(8, [(0, 1)])


def test_precheck_multi_overloaded_vertex():
    g = build_graph(2, [(0, 1)])
    bs = [{0: 2.0, 1: -2.0}]
    cert = precheck_multi(g, bs)
    assert cert is not None
    assert cert.phi == {(0, 0): 1.0}
    assert cert.lhs == 2.0
    assert cert.rhs == 1.0
    assert verify_potential_certificate(g, bs, cert).ok


def test_precheck_multi_sign_follows_demand():
    g = build_graph(2, [(0, 1)])
    cert = precheck_multi(g, [{}, {1: -3.0, 0: 3.0}])
    assert cert is not None
    assert cert.phi in ({(0, 1): 1.0}, {(1, 1): -1.0})


def test_precheck_multi_quiet_cases():
    g = build_graph(2, [(0, 1)])
    assert precheck_multi(g, [{0: 1.0, 1: -1.0}]) is None
    assert precheck_multi(g, [{}]) is None


def test_flow_step_picks_largest_absolute_drop():
    g = edge_in_8()
    state = MultiState(g, [{0: 0.5, 1: -0.5}, {0: 0.5, 1: -0.5}], 0.2,
                       iterations=10)
    state.weights.set_value((0, 0, +1), 8.0)    # delta_0 = +8
    state.weights.set_value((1, 1, +1), 16.0)   # delta_1 = -16
    state._refresh(0, 0)
    state._refresh(1, 1)
    assert flow_step(state) == {0: (1, -1)}


def test_flow_step_tie_goes_to_smallest_commodity():
    g = edge_in_8()
    state = MultiState(g, [{0: 0.5, 1: -0.5}, {0: 0.5, 1: -0.5}], 0.2,
                       iterations=10)
    state.weights.set_value((0, 0, +1), 8.0)
    state.weights.set_value((0, 1, +1), 8.0)
    state._refresh(0, 0)
    state._refresh(0, 1)
    assert flow_step(state) == {0: (0, 1)}


def test_flow_step_all_flat_is_empty():
    g = edge_in_8()
    state = MultiState(g, [{0: 0.5, 1: -0.5}], 0.2, iterations=10)
    assert flow_step(state) == {}


def test_update_weights_scales_by_degree():
    g = build_graph(3, [(0, 1), (1, 2)])  # deg(1) = 2
    state = MultiState(g, [{}, {1: 1.0}], 0.2, iterations=10)
    update_weights(state, {})
    alpha = state.alpha
    assert state.weights.value((1, 1, +1)) == pytest.approx(1 + alpha / 2)
    assert state.weights.value((1, 1, -1)) == pytest.approx(1 - alpha / 2)
    assert state.cum_residual[(1, 1)] == pytest.approx(0.5)
    # the other commodity's pair at the same vertex is untouched
    assert state.weights.value((1, 0, +1)) == 1.0


def test_termination_on_flat_active_component():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    state = MultiState(g, [{0: 1.0}], 0.2, iterations=10)
    for v in range(4):
        state.tracked.setdefault(v, None)
        state.pair_order.setdefault(v, {})[0] = None
        state.weights.set_value((v, 0, +1), 8.0)
        state._refresh(v, 0)
    f = flow_step(state)
    assert f == {}
    assert termination_check(state, f) is True


def test_solve_multi_two_units_on_one_edge_is_infeasible():
    g = build_graph(2, [(0, 1)])
    bs = [{0: 1.0, 1: -1.0}, {0: 1.0, 1: -1.0}]
    res = solve_multi(g, bs, 0.05)
    assert res.is_certificate
    cert = res.certificate
    assert cert.lhs > cert.rhs
    assert verify_potential_certificate(g, bs, cert).ok
    assert res.stats.terminated


def test_solve_multi_shares_one_edge_feasibly():
    g = build_graph(2, [(0, 1)])
    bs = [{0: 0.4, 1: -0.4}, {0: 0.4, 1: -0.4}]
    res = solve_multi(g, bs, 0.1)
    assert res.is_flow
    report = verify_flow_output(g, bs, res.flows, 0.1)
    assert report.ok, report.messages
    for j in range(2):
        for v in (0, 1):
            assert abs(res.residuals[j].get(v, 0.0)) <= 0.1 + 1e-9
    total = sum(abs(res.numerators[j].get(0, 0)) for j in range(2))
    assert total <= res.iterations


def test_solve_multi_leaves_quiet_commodity_alone():
    g = grid_graph(3, 3)
    res = solve_multi(g, [{0: 1.0, 8: -1.0}, {}], 0.3)
    assert res.is_flow
    assert res.flows[1] == {}
    assert res.residuals[1] == {}


def test_solve_multi_validates_inputs():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        solve_multi(g, [], 0.2)
    with pytest.raises(ValueError):
        solve_multi(g, [{0: 1.0, 1: -1.0}], 1.5)
    with pytest.raises(ValueError):
        solve_multi(g, [{9: 1.0}], 0.2)


def test_per_iteration_single_winner_keeps_congestion_exact():
    g = grid_graph(4, 4)
    bs = [random_balanced_demand(g, 4, 3.0, seed=[21, j]) for j in range(3)]
    res = solve_multi(g, bs, 0.2)
    if res.is_flow:
        for e in set().union(*res.numerators):
            assert sum(abs(res.numerators[j].get(e, 0))
                       for j in range(3)) <= res.iterations
        cong = edge_congestion(res.flows)
        assert max(cong.values(), default=0.0) <= 1.0 + 1e-9


# -------------------------------------------- kernel vs reference driver

MULTI_PARITY = [
    (grid_graph(4, 4),
     [{0: 1.0, 15: -1.0}, {3: 1.0, 12: -1.0}], 0.3),
    (random_regular_graph(18, 4, seed=3),
     [random_balanced_demand(random_regular_graph(18, 4, seed=3), 4, 3.0,
                             seed=[77, j]) for j in range(3)], 0.3),
    (build_graph(2, [(0, 1)]),
     [{0: 1.0, 1: -1.0}, {0: 1.0, 1: -1.0}], 0.25),  # certificate path
]


@pytest.mark.parametrize("case", range(len(MULTI_PARITY)))
def test_multi_kernel_matches_reference(case):
    g, bs, eps = MULTI_PARITY[case]
    fast = solve_multi(g, bs, eps, audit=True)
    slow = solve_multi_reference(g, bs, eps, audit=True)
    assert fast.is_flow == slow.is_flow
    assert fast.stats.iterations_executed == slow.stats.iterations_executed
    if fast.is_flow:
        assert fast.numerators == slow.numerators
        assert fast.flows == slow.flows
        assert fast.residuals == slow.residuals
    else:
        assert fast.certificate.phi == slow.certificate.phi
        assert fast.certificate.lhs == slow.certificate.lhs
        assert fast.certificate.rhs == slow.certificate.rhs
    for field in ("scans", "weight_updates", "flow_entries", "touched",
                  "terminated", "audit_violation_count"):
        assert getattr(fast.stats, field) == getattr(slow.stats, field), field
    assert list(fast.stats.series["work"]) == list(slow.stats.series["work"])


# ------------------------------------------------------------ k=1 collapse

def _k1_instance(i):
    import numpy as np
    rng = np.random.default_rng([55, i])
    n = int(rng.integers(8, 41))
    g = random_gnm_graph(n, 2 * n, rng)
    b = random_balanced_demand(g, 4, float(rng.choice([2.0, 4.0])), rng)
    eps = float(rng.choice([0.3, 0.2]))
    return g, b, eps


@pytest.mark.parametrize("i", range(12))
def test_k1_collapses_onto_single_commodity_solver(i):
    g, b, eps = _k1_instance(i)
    multi = solve_multi(g, [b], eps)
    single = solve_single(g, b, eps)
    assert multi.is_flow == single.is_flow
    assert multi.stats.iterations_executed == single.stats.iterations_executed
    assert multi.stats.scans == single.stats.scans
    assert multi.stats.touched == single.stats.touched
    if multi.is_flow:
        assert multi.numerators[0] == single.numerators  # bitwise integers
        assert multi.flows[0] == single.flow
        assert multi.residuals[0] == single.residual
