from fractions import Fraction as F

import pytest

import flowgames as fg


def flow1(*vals):
    return fg.FlowProfile((tuple(F(v) for v in vals),))


def test_cwe_elfarol_distribution_binds(elfarol, elfarol_cwe):
    # 2/3 on (1/2,1/2) and 1/3 on (1,0): switching a to b trades the
    # 1/3 gain at the split flow against the 1/3 loss at the vertex
    report = fg.check_cwe(elfarol, elfarol_cwe.per_state["0"], "0")
    assert report.concept == "cwe"
    assert report.worst_violation == 0
    assert report.witness == ("crowd", "a", "b")


def test_cwe_point_mass_equilibrium(pigou_info):
    report = fg.check_cwe(pigou_info, ((flow1(0, 1), F(1)),), "0")
    assert report.worst_violation == 0


def test_cwe_detects_violation(pigou_info):
    report = fg.check_cwe(pigou_info, ((flow1(1, 0), F(1)),), "0")
    assert report.worst_violation == 2  # everyone pays 3, the other road costs 1
    assert report.witness == ("traffic", "a", "b")


def test_cwe_rejects_bad_distribution(elfarol):
    with pytest.raises(ValueError):
        fg.check_cwe(elfarol, ((flow1(1, 0), F(1, 2)),), "0")


def test_ccwe_elfarol_distribution(elfarol, elfarol_cwe):
    # expected social cost 2/3 equals the opt-out cost of b exactly
    report = fg.check_ccwe(elfarol, elfarol_cwe.per_state["0"], "0")
    assert report.concept == "ccwe"
    assert report.worst_violation == 0
    assert report.witness[-1] == "b"


def test_bcwe_pigou_outcome_binds(pigou_info, pigou_bcwe):
    report = fg.check_bcwe(pigou_info, pigou_bcwe)
    assert report.concept == "bcwe"
    assert report.worst_violation == 0
    assert isinstance(report.worst_violation, F)
    assert report.witness == ("traffic", "a", "b")


def test_bcwe_binding_pair_values(pigou_info, pigou_bcwe):
    # both sides of the binding (a, b) constraint evaluate to 3/4
    obey = F(0)
    deviate = F(0)
    for state, atoms in pigou_bcwe.per_state.items():
        p = pigou_info.prior_of(state)
        for f, w in atoms:
            y_a = f.flows[0][0]
            obey += p * w * y_a * fg.eval_cost(pigou_info, "traffic", "a", f, state)
            deviate += p * w * y_a * fg.eval_cost(pigou_info, "traffic", "b", f, state)
    assert obey == F(3, 4)
    assert deviate == F(3, 4)


def test_bcwe_expected_social_cost(pigou_info, pigou_bcwe):
    total = F(0)
    for state, atoms in pigou_bcwe.per_state.items():
        p = pigou_info.prior_of(state)
        for f, w in atoms:
            total += p * w * fg.social_cost(pigou_info, f, state)
    assert total == 1


def test_bcwe_full_disclosure_has_slack(pigou_info):
    outcome = fg.Outcome(
        {"0": ((flow1(0, 1), F(1)),), "1": ((flow1(1, 0), F(1)),)}
    )
    report = fg.check_bcwe(pigou_info, outcome)
    assert report.worst_violation == F(-1, 2)


def test_bcwe_constant_map_fails(pigou_info):
    outcome = fg.Outcome(
        {"0": ((flow1(1, 0), F(1)),), "1": ((flow1(1, 0), F(1)),)}
    )
    report = fg.check_bcwe(pigou_info, outcome)
    assert report.worst_violation == F(1, 2)
    assert report.witness == ("traffic", "a", "b")


def test_sbcwe_constant_map_fails(pigou_info):
    flow_map = {"0": flow1(1, 0), "1": flow1(1, 0)}
    report = fg.check_sbcwe(pigou_info, flow_map)
    assert report.concept == "sbcwe"
    assert report.worst_violation == F(1, 2)


def test_sbcwe_full_disclosure_passes(pigou_info):
    flow_map = {"0": flow1(0, 1), "1": flow1(1, 0)}
    report = fg.check_sbcwe(pigou_info, flow_map)
    assert report.worst_violation <= 0


def test_sbcwe_from_bcwe_barycenters(pigou_info, pigou_bcwe):
    flow_map, report = fg.sbcwe_from_bcwe(pigou_info, pigou_bcwe)
    assert flow_map["0"].flows[0] == (F(1, 2), F(1, 2))
    assert flow_map["1"].flows[0] == (F(1), F(0))
    # linear costs here, so averaging preserves obedience and total cost
    assert report.hypotheses_hold
    assert report.check.worst_violation == 0
    assert report.input_cost == 1
    assert report.output_cost == 1


def test_cbcwe_pigou_outcome(pigou_info, pigou_bcwe):
    report = fg.check_cbcwe(pigou_info, pigou_bcwe)
    assert report.concept == "cbcwe"
    assert report.worst_violation == 0
    assert report.witness[-1] == "b"


def test_cbcwe_constant_map_fails(pigou_info):
    outcome = fg.Outcome(
        {"0": ((flow1(1, 0), F(1)),), "1": ((flow1(1, 0), F(1)),)}
    )
    report = fg.check_cbcwe(pigou_info, outcome)
    assert report.worst_violation == F(1, 2)
