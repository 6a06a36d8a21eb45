from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import flowgames as fg
from flowgames.model import CongestionSpec, Population


def flow1(*vals):
    return fg.FlowProfile((tuple(F(v) for v in vals),))


def test_verify_we_elfarol_hand_values(elfarol):
    # c_a = 1 always; c_b = |4 y_b - 2|
    assert fg.verify_we(elfarol, flow1(F(1, 2), F(1, 2)), "0") == F(1, 2)
    assert fg.verify_we(elfarol, flow1(F(3, 4), F(1, 4)), "0") == 0
    assert fg.verify_we(elfarol, flow1(F(1, 4), F(3, 4)), "0") == 0
    assert fg.verify_we(elfarol, flow1(1, 0), "0") == 0
    assert fg.verify_we(elfarol, flow1(0, 1), "0") == 1


def test_pigou_potential_solution(pigou_network):
    res = fg.solve_we_potential(pigou_network.congestion, "0", tol=1e-10)
    assert fg.flow_linf(res.flow, flow1(0, 1)) <= 1e-8
    assert abs(res.potential_value - 0.5) <= 1e-8
    assert res.max_violation <= 1e-8


def test_potential_value_exact(pigou_network):
    spec = pigou_network.congestion
    # Phi(y) = y_a + y_b^2 / 2
    assert fg.potential_value(spec, flow1(0, 1), "0") == F(1, 2)
    assert fg.potential_value(spec, flow1(F(1, 4), F(3, 4)), "0") == F(1, 4) + F(9, 32)


def test_potential_gradient_matches_costs_on_grid(pigou_network):
    spec = pigou_network.congestion
    for f in fg.grid_flows(pigou_network, 8):
        grad = fg.potential_gradient(spec, f, "0")
        assert grad[0][0] == fg.eval_cost(pigou_network, "traffic", "a", f, "0")
        assert grad[0][1] == fg.eval_cost(pigou_network, "traffic", "b", f, "0")


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=64))
def test_gradient_is_cost_everywhere(q):
    spec = CongestionSpec(
        resources=("e1", "e2"),
        latencies={("e1", "0"): (F(1), F(2)), ("e2", "0"): (F(0), F(1), F(3))},
        actions={("p", "a"): ("e1",), ("p", "b"): ("e1", "e2")},
        populations=(Population("p", ("a", "b")),),
        states=("0",),
        prior=(F(1),),
    )
    game = fg.congestion_to_game(spec)
    f = fg.FlowProfile(((q, 1 - q),))
    grad = fg.potential_gradient(spec, f, "0")
    assert grad[0][0] == fg.eval_cost(game, "p", "a", f, "0")
    assert grad[0][1] == fg.eval_cost(game, "p", "b", f, "0")


def test_identical_parallel_edges_split_evenly():
    spec = CongestionSpec(
        resources=("e1", "e2"),
        latencies={("e1", "0"): (F(0), F(1)), ("e2", "0"): (F(0), F(1))},
        actions={("p", "a"): ("e1",), ("p", "b"): ("e2",)},
        populations=(Population("p", ("a", "b")),),
        states=("0",),
        prior=(F(1),),
    )
    game = fg.congestion_to_game(spec)
    res = fg.solve_we_potential(spec, "0", tol=1e-10)
    assert fg.flow_linf(res.flow, flow1(F(1, 2), F(1, 2))) <= 1e-8
    for act in ("a", "b"):
        assert abs(float(fg.eval_cost(game, "p", act, res.flow, "0")) - 0.5) <= 1e-8


def test_zero_latencies_make_everything_an_equilibrium():
    spec = CongestionSpec(
        resources=("e1", "e2"),
        latencies={("e1", "0"): (F(0),), ("e2", "0"): (F(0),)},
        actions={("p", "a"): ("e1",), ("p", "b"): ("e2",)},
        populations=(Population("p", ("a", "b")),),
        states=("0",),
        prior=(F(1),),
    )
    game = fg.congestion_to_game(spec)
    for f in fg.grid_flows(game, 5):
        assert fg.verify_we(game, f, "0") == 0


def test_enumerate_elfarol_three_equilibria(elfarol):
    flows = fg.enumerate_we_grid(elfarol, "0", resolution=16, tol=1e-8)
    assert len(flows) == 3
    targets = [flow1(1, 0), flow1(F(3, 4), F(1, 4)), flow1(F(1, 4), F(3, 4))]
    for t in targets:
        assert min(fg.flow_linf(f, t) for f in flows) <= 1e-6


def test_enumerate_pigou_single_equilibrium(pigou_network):
    flows = fg.enumerate_we_grid(pigou_network, "0", resolution=16, tol=1e-8)
    assert len(flows) == 1
    assert fg.flow_linf(flows[0], flow1(0, 1)) <= 1e-6


def test_br_solver_reaches_equilibrium(elfarol):
    res = fg.solve_we_br(elfarol, "0", flow1(0, 1), tol=1e-8)
    assert res.max_violation <= 1e-8
    assert float(fg.verify_we(elfarol, res.flow, "0")) <= 1e-8
    assert res.potential_value is None


def test_br_solver_keeps_equilibrium_start(elfarol):
    res = fg.solve_we_br(elfarol, "0", flow1(1, 0), tol=1e-8)
    assert fg.flow_linf(res.flow, flow1(1, 0)) == 0


def test_multistart_results_all_verify(elfarol):
    results = fg.solve_we_multistart(elfarol, "0", tol=1e-8)
    assert results
    for res in results:
        assert float(fg.verify_we(elfarol, res.flow, "0")) <= 1e-8


def test_action_relabeling_equivariance(elfarol):
    # same game with the action order reversed: the WE set swaps coordinates
    pop = Population("crowd", ("b", "a"))
    swapped = fg.GameSpec((pop,), elfarol.states, elfarol.prior, dict(elfarol.costs))
    flows = fg.enumerate_we_grid(swapped, "0", resolution=16, tol=1e-8)
    originals = fg.enumerate_we_grid(elfarol, "0", resolution=16, tol=1e-8)
    swapped_set = sorted(tuple(map(float, f.flows[0]))[::-1] for f in flows)
    original_set = sorted(tuple(map(float, f.flows[0])) for f in originals)
    assert len(swapped_set) == len(original_set)
    for got, want in zip(swapped_set, original_set):
        assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-6


def test_solver_input_validation(elfarol, pigou_network):
    with pytest.raises(ValueError):
        fg.solve_we_br(elfarol, "0", flow1(1, 0), tol=0.0)
    with pytest.raises(ValueError):
        fg.solve_we_potential(pigou_network.congestion, "0", tol=-1.0)
