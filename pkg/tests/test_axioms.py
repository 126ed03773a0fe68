import json
from fractions import Fraction as F

import pytest

from riparian.axioms import (
    AXIOMS,
    DEFAULT_AXIOMS,
    SATISFIED,
    VIOLATED,
    AxiomReport,
    SampleConfig,
    axiom_matrix,
    check_additivity,
    check_axiom,
    check_budget_additivity,
    check_budget_linearity,
    check_continuity_heuristic,
    check_equal_single_polluters,
    check_equal_treatment_equal_claims,
    check_merging_splitting,
    check_scale_invariance,
    check_top_consistency,
    check_upstream_invariance,
    deserialize_case,
    gen_problems,
    render_matrix,
    replay,
    run_axiom,
    sample_problems,
    serialize_case,
    unit_problem,
)
from riparian.core import is_redistribution, validate_problem
from riparian.datasets import BASE_TABLE, tuojiang
from riparian.rules import CapGamma, OpaqueGamma, RuleSpec, geometric

GEO = RuleSpec("geometric", F(1, 2))
AVG = RuleSpec("averaging", F(1, 2))
PROP = RuleSpec("proportional")
FT = RuleSpec("full_transfer")

EX1 = validate_problem([2, 5, 5, 3], 5)


def evaluate(name, rule, **case):
    return AXIOMS[name].evaluate(rule, case)


# gen_problems ------------------------------------------------------------------


def test_generator_is_deterministic():
    cfg = SampleConfig(n_min=2, n_max=6)
    assert list(gen_problems(1, cfg, 50)) == list(gen_problems(1, cfg, 50))
    assert list(gen_problems(1, cfg, 50)) != list(gen_problems(2, cfg, 50))


def test_generator_sizes_and_budget():
    for p in gen_problems(3, SampleConfig(n_min=2, n_max=6), 300):
        assert 2 <= p.n <= 6
        assert 0 <= p.budget <= p.total


def test_generator_redistribution_only():
    assert all(is_redistribution(p) for p in gen_problems(5, SampleConfig(redistribution_only=True), 200))


def test_generator_never_all_zero():
    for p in gen_problems(9, SampleConfig(zero_claim_probability=1.0), 100):
        assert p.total > 0


def test_generator_float_mode():
    ps = sample_problems(4, 20, SampleConfig(exact=False))
    assert all(not p.exact for p in ps)


@pytest.mark.parametrize("kwargs", [{"n_min": 3, "n_max": 2}, {"claim_max": 0}, {"zero_claim_probability": 2}])
def test_degenerate_config_rejected(kwargs):
    with pytest.raises(ValueError):
        SampleConfig(**kwargs)


# per-axiom worked values ---------------------------------------------------------


def test_scale_invariance_example():
    lhs, rhs = evaluate("scale-invariance", GEO, problem=EX1, mu=3)
    assert lhs == rhs == [1, 3, 4, 7]


def test_scale_by_one_is_identity():
    lhs, rhs = evaluate("scale-invariance", AVG, problem=EX1, mu=1)
    assert lhs == rhs


def test_budget_additivity_example():
    lhs, rhs = evaluate("budget-additivity", GEO, problem=EX1, first=2)
    assert lhs == rhs
    r = (1, 3, 4, 7)
    assert list(geometric(EX1.with_claims(EX1.claims, 2), F(1, 2))) == [F(2, 15) * v for v in r]


def test_budget_additivity_tuojiang_halves():
    p = tuojiang()
    lhs, rhs = evaluate("budget-additivity", RuleSpec("averaging", F(1, 4)), problem=p, first=p.budget / 2)
    assert lhs == rhs
    for v, printed in zip(lhs, BASE_TABLE["averaging"][1]):
        assert abs(float(v) - printed) <= 0.01


def test_upstream_invariance_example():
    p = validate_problem([2, 5, 5, 3], 15)
    before, after = evaluate("upstream-invariance", GEO, problem=p, index=2, delta=3)
    assert before == after == [1, 3]
    before, after = evaluate("upstream-invariance", AVG, problem=p, index=2, delta=3)
    assert before == after == [1, F(5, 2)]


def test_single_polluters_default_and_extended():
    lhs, rhs = evaluate("equal-single-polluters", GEO, n=4, budget=8, i=0, j=2)
    assert lhs == rhs == [4]
    lhs, rhs = evaluate("equal-single-polluters", GEO, n=4, budget=8, i=0, j=3)
    assert (lhs, rhs) == ([4], [8])
    assert check_equal_single_polluters(GEO).satisfied
    extended = check_equal_single_polluters(GEO, extended=True)
    assert extended.verdict == VIOLATED
    assert replay(extended, GEO)
    assert check_equal_single_polluters(PROP, extended=True).satisfied


def test_top_consistency_examples():
    lhs, rhs = evaluate("top-consistency", GEO, problem=validate_problem([2, 5, 5, 3], 15))
    assert lhs == rhs == [3, 4, 7]
    lhs, rhs = evaluate("top-consistency", AVG, problem=validate_problem([2, 2, 2], 6))
    assert lhs == [1, 4] and rhs == [F(3, 2), F(7, 2)]


def test_top_consistency_two_agents_trivial():
    for rule in (GEO, AVG, PROP, FT):
        lhs, rhs = evaluate("top-consistency", rule, problem=validate_problem([3, 1], 4))
        assert lhs == rhs


def test_top_consistency_precondition_skip():
    # none of the shipped rules over-award agent 1, so use a stub that does
    def greedy(p):
        return [p.budget] + [0] * (p.n - 1)

    assert evaluate("top-consistency", greedy, problem=validate_problem([1, 9], 10)) is None
    report = run_axiom("top-consistency", RuleSpec("proportional"), [({"problem": validate_problem([2, 0], 2)}, False)])
    assert report.skipped == 1 and report.satisfied


def test_top_consistency_report_counts_skips():
    sample = sample_problems(7, 200)
    report = check_top_consistency(PROP, sample, 7)
    assert report.satisfied
    assert report.skipped > 0
    assert report.sample_size == len(sample) + 1


def test_equal_claims_checker():
    assert check_equal_treatment_equal_claims(PROP, sample_problems(7, 100), 7).satisfied
    assert check_equal_treatment_equal_claims(FT, sample_problems(7, 100), 7).verdict == VIOLATED


def test_equal_claims_examples():
    x = PROP(validate_problem([3, 7, 3], 6))
    assert x[0] == x[2] == F(18, 13)
    lhs, rhs = evaluate("equal-claims", GEO, problem=validate_problem([1, 1], 2), i=0, j=1)
    assert (lhs, rhs) == ([F(1, 2)], [F(3, 2)])
    lhs, rhs = evaluate("equal-claims", FT, problem=validate_problem([2, 2], 4), i=0, j=1)
    assert (lhs, rhs) == ([0], [4])


def test_additivity_fixture():
    lhs, rhs = evaluate("additivity", GEO, first=validate_problem([2, 0, 0], 1), second=validate_problem([0, 1, 0], 1))
    assert lhs[0] == F(2, 3) and rhs[0] == F(1, 2)
    report = check_additivity(GEO, [], 7)
    assert report.verdict == VIOLATED
    case = deserialize_case(report.counterexample["case"])
    assert case["first"].claims == (2, 0, 0)


def test_additivity_full_transfer_and_equal_ratio_proportional():
    assert check_additivity(FT, sample_problems(7, 200), 7).satisfied
    lhs, rhs = evaluate("additivity", PROP, first=validate_problem([2, 4], 3), second=validate_problem([1, 3], 2))
    assert lhs == rhs
    assert check_additivity(PROP, sample_problems(7, 200), 7).verdict == VIOLATED


def test_merging_splitting_examples():
    assert list(AVG(unit_problem(3))) == [F(1, 2), 0, F(1, 2)]
    assert list(GEO(unit_problem(3))) == [F(1, 2), F(1, 4), F(1, 4)]
    assert evaluate("merging-splitting", GEO, n=3, i=0) == ([F(3, 4)], [F(1, 2)])
    report = check_merging_splitting(GEO)
    assert report.verdict == VIOLATED
    assert report.counterexample["case"]["n"] == 3
    assert check_merging_splitting(AVG).satisfied
    assert check_merging_splitting(FT).satisfied


def test_budget_linearity_examples():
    lhs, rhs = evaluate("budget-linearity", GEO, problem=validate_problem([2, 5, 5, 3], 15), alpha=F(1, 3))
    assert lhs == rhs == [F(1, 3), 1, F(4, 3), F(7, 3)]
    lhs, rhs = evaluate("budget-linearity", AVG, problem=EX1, alpha=0)
    assert lhs == rhs == [0, 0, 0, 0]
    p = tuojiang()
    lhs, rhs = evaluate("budget-linearity", RuleSpec("averaging", F(3, 4)), problem=p, alpha=p.budget / p.total)
    assert lhs == rhs
    for v, printed in zip(lhs, BASE_TABLE["averaging"][3]):
        assert abs(float(v) - printed) <= 0.01


def test_continuity_heuristic():
    sample = sample_problems(7, 30)
    for rule in (GEO, PROP):
        report = check_continuity_heuristic(rule, sample)
        assert report.satisfied and not report.conclusive
    step = OpaqueGamma(lambda t: t * 0 if t < 1 else t / 2, "step")
    near = validate_problem([F(1) - F(1, 10**7), 1, 1], 2)
    report = check_continuity_heuristic(RuleSpec("generalized_geometric", step), [near])
    assert report.verdict == VIOLATED
    assert not report.conclusive


# reports ------------------------------------------------------------------------


@pytest.mark.parametrize("rule", [GEO, AVG, PROP, FT])
def test_linear_family_axioms_hold(rule):
    sample = sample_problems(11, 60)
    for check in (check_scale_invariance, check_budget_additivity, check_upstream_invariance, check_budget_linearity):
        assert check(rule, sample, 11).satisfied, (check.__name__, rule.name)


def test_capped_retention_is_not_scale_invariant():
    rule = RuleSpec("generalized_geometric", CapGamma(2))
    sample = sample_problems(11, 60)
    report = check_scale_invariance(rule, sample, 11)
    assert report.verdict == VIOLATED and replay(report, rule)
    # retained shares depend on claims only, so budget stays linear
    assert check_budget_linearity(rule, sample, 11).satisfied
    assert check_budget_additivity(rule, sample, 11).satisfied


def test_reports_are_deterministic():
    a = check_axiom("equal-claims", GEO, seed=3, samples=100).to_dict()
    b = check_axiom("equal-claims", GEO, seed=3, samples=100).to_dict()
    assert a == b


def test_violations_replay_from_json():
    report = check_axiom("top-consistency", AVG, seed=7, samples=50)
    assert report.verdict == VIOLATED
    data = json.loads(report.to_json())
    assert replay(data)
    assert set(data) >= {"axiom", "rule", "verdict", "counterexample", "seed", "sample_size"}


def test_satisfied_report_has_no_counterexample_and_does_not_replay():
    report = check_axiom("scale-invariance", GEO, samples=50)
    assert report.verdict == SATISFIED and report.counterexample is None
    assert not replay(report)


def test_case_serialization_round_trip():
    case = {"problem": validate_problem([F(1, 3), 2], F(1, 2)), "alpha": F(2, 7), "i": 1}
    assert deserialize_case(json.loads(json.dumps(serialize_case(case)))) == case


def test_shrinking_reduces_size():
    report = check_axiom("equal-claims", GEO, seed=7, samples=200)
    case = deserialize_case(report.counterexample["case"])
    assert case["problem"].n == 2
    assert replay(report, GEO)


def test_float_sampling_runs():
    report = check_axiom("budget-linearity", GEO, seed=7, samples=100, config=SampleConfig(exact=False))
    assert report.satisfied


def test_matrix_for_endpoint_rules():
    matrix = axiom_matrix([PROP, FT], seed=7, samples=200)
    failing = {r: {a for a, rep in row.items() if not rep.satisfied} for r, row in matrix.items()}
    assert failing == {"prop": {"additivity"}, "ft": {"equal-claims"}}
    text = render_matrix(matrix)
    assert text.endswith("\n") and "additivity" in text


def test_unknown_axiom():
    with pytest.raises(KeyError):
        check_axiom("nope", GEO)
    assert "continuity" not in DEFAULT_AXIOMS


def test_report_to_dict_fields():
    r = AxiomReport("a", "prop", SATISFIED, None, 3, 7)
    assert r.mark == "Y" and r.to_dict()["sample_size"] == 3
