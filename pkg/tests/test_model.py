from fractions import Fraction as F

import pytest

import flowgames as fg
from flowgames.model import CostParseError, EvaluationError, Population


def flow1(*vals):
    return fg.FlowProfile((tuple(F(v) for v in vals),))


def test_parse_format_canonical():
    # canonical strings survive a parse/format round trip unchanged
    for text in [
        "1",
        "3 - 3*theta",
        "max(2 - 4*y[b], 4*y[b] - 2)",
        "2/3*y[a]",
        "y[a]^2",
        "-y[a]",
        "min(y[a], 2)",
    ]:
        assert fg.format_expr(fg.parse_cost(text)) == text


def test_parse_format_normalizes():
    assert fg.format_expr(fg.parse_cost("y[a] ** 2")) == "y[a]^2"
    assert fg.format_expr(fg.parse_cost("2 / 3 * y[a]")) == "2/3*y[a]"


def test_parse_error_columns():
    # .column is 0-based; the message renders it 1-based
    cases = [
        ("2 +", 3),
        ("", 0),
        ("y[", 2),
        ("max(1, 2", 8),
        ("3 * * 2", 4),
        ("foo(1)", 0),
    ]
    for text, col in cases:
        with pytest.raises(CostParseError) as err:
            fg.parse_cost(text)
        assert err.value.column == col
        assert f"column {col + 1}" in str(err.value)


def test_division_only_in_rational_literals():
    with pytest.raises(CostParseError):
        fg.parse_cost("y[a] / 2")
    with pytest.raises(CostParseError):
        fg.parse_cost("1 / y[a]")


def test_eval_exact_on_rationals(elfarol):
    c_b = fg.eval_cost(elfarol, "crowd", "b", flow1(F(1, 2), F(1, 2)), "0")
    assert c_b == 0
    assert isinstance(c_b, F)
    assert fg.eval_cost(elfarol, "crowd", "b", flow1(F(3, 4), F(1, 4)), "0") == 1
    assert fg.eval_cost(elfarol, "crowd", "b", flow1(1, 0), "0") == 2


def test_eval_float_input_gives_float(elfarol):
    c_b = fg.eval_cost(elfarol, "crowd", "b", fg.FlowProfile(((0.5, 0.5),)), "0")
    assert isinstance(c_b, float)
    assert abs(c_b) < 1e-12


def test_theta_substitutes_state(pigou_info):
    f = flow1(F(1, 2), F(1, 2))
    assert fg.eval_cost(pigou_info, "traffic", "a", f, "0") == 3
    assert fg.eval_cost(pigou_info, "traffic", "a", f, "1") == 0
    assert fg.eval_cost(pigou_info, "traffic", "b", f, "0") == 1


def test_theta_needs_numeric_state_name():
    pop = Population("crowd", ("a", "b"))
    game = fg.GameSpec(
        (pop,),
        ("wet",),
        (F(1),),
        {("crowd", "a"): fg.parse_cost("theta"), ("crowd", "b"): fg.parse_cost("1")},
    )
    with pytest.raises(EvaluationError):
        fg.eval_cost(game, "crowd", "a", flow1(F(1, 2), F(1, 2)), "wet")


def test_unknown_action_reference_rejected_at_eval():
    pop = Population("crowd", ("a", "b"))
    game = fg.GameSpec(
        (pop,),
        ("0",),
        (F(1),),
        {("crowd", "a"): fg.parse_cost("y[zzz]"), ("crowd", "b"): fg.parse_cost("1")},
    )
    with pytest.raises(ValueError):
        fg.eval_cost(game, "crowd", "a", flow1(F(1, 2), F(1, 2)), "0")


def test_power_and_minmax_eval():
    pop = Population("p", ("a", "b"))
    game = fg.GameSpec(
        (pop,),
        ("0",),
        (F(1),),
        {
            ("p", "a"): fg.parse_cost("y[a]^2 + min(y[a], 2)"),
            ("p", "b"): fg.parse_cost("max(y[a], y[b], 1)"),
        },
    )
    f = flow1(F(3, 4), F(1, 4))
    assert fg.eval_cost(game, "p", "a", f, "0") == F(9, 16) + F(3, 4)
    assert fg.eval_cost(game, "p", "b", f, "0") == 1


def test_flow_profile_validation():
    with pytest.raises(ValueError):
        fg.FlowProfile(((F(-1, 4), F(5, 4)),))
    with pytest.raises(ValueError):
        fg.FlowProfile(((F(1, 4), F(1, 4)),))  # sums to 1/2, mass defaults to 1
    # explicit masses allow sub-population scale
    f = fg.FlowProfile(((F(1, 4), F(1, 4)),), masses=(F(1, 2),))
    assert f.flows[0] == (F(1, 4), F(1, 4))


def test_outcome_atoms_get_canonical_order():
    a = flow1(1, 0)
    b = flow1(F(1, 2), F(1, 2))
    first = fg.Outcome({"0": ((a, F(1, 3)), (b, F(2, 3)))})
    second = fg.Outcome({"0": ((b, F(2, 3)), (a, F(1, 3)))})
    assert first.per_state == second.per_state
    assert first == second


def test_outcome_validation():
    f = flow1(1, 0)
    with pytest.raises(ValueError):
        fg.Outcome({})
    with pytest.raises(ValueError):
        fg.Outcome({"0": ()})
    with pytest.raises(ValueError):
        fg.Outcome({"0": ((f, F(-1, 2)), (f, F(3, 2)))})
    with pytest.raises(ValueError):
        fg.Outcome({"0": ((f, F(1, 2)),)})  # weights sum to 1/2


def test_population_validation():
    with pytest.raises(ValueError):
        Population("p", ("a", "a"))
    with pytest.raises(ValueError):
        Population("p", ())


def test_game_spec_validation():
    pop = Population("p", ("a", "b"))
    costs = {("p", "a"): fg.parse_cost("1"), ("p", "b"): fg.parse_cost("2")}
    with pytest.raises(ValueError):
        fg.GameSpec((pop,), ("0", "1"), (F(1),), costs)  # prior length mismatch
    with pytest.raises(ValueError):
        fg.GameSpec((pop,), ("0",), (F(1),), {("p", "a"): fg.parse_cost("1")})


def test_validate_game_numeric_problems():
    pop = Population("p", ("a", "b"))
    costs = {("p", "a"): fg.parse_cost("1"), ("p", "b"): fg.parse_cost("2")}
    game = fg.GameSpec((pop,), ("0", "1"), (F(1, 2), F(1, 3)), costs)
    problems = fg.validate_game(game)
    assert any("prior" in p for p in problems)


def test_validate_game_accepts_bundled(elfarol, pigou_info, pigou_network):
    assert fg.validate_game(elfarol) == []
    assert fg.validate_game(pigou_info) == []
    assert fg.validate_game(pigou_network) == []


def test_social_cost_elfarol(elfarol):
    assert fg.social_cost(elfarol, flow1(1, 0), "0") == 1
    assert fg.social_cost(elfarol, flow1(F(1, 2), F(1, 2)), "0") == F(1, 2)
    assert fg.social_cost(elfarol, flow1(F(3, 4), F(1, 4)), "0") == 1


def test_congestion_costs_are_latency_sums(pigou_network):
    f = flow1(F(1, 4), F(3, 4))
    assert fg.eval_cost(pigou_network, "traffic", "a", f, "0") == 1
    assert fg.eval_cost(pigou_network, "traffic", "b", f, "0") == F(3, 4)


def test_parse_rational():
    assert fg.parse_rational("1/3") == F(1, 3)
    assert fg.parse_rational("0.25") == F(1, 4)
    assert fg.parse_rational("2") == 2
    with pytest.raises(ValueError):
        fg.parse_rational("one third")
