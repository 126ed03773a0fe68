import math
from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from conftest import rational_problems
from riparian.analysis import (
    argmax_gamma_per_agent,
    claims_bounded,
    compare_families,
    gamma_grid,
    min_gamma_claims_bounded,
    min_lambda_claims_bounded,
    min_lambda_search,
    round_half_up,
    sweep_gamma,
    threshold_search,
)
from riparian.core import validate_problem
from riparian.datasets import CITIES, BASE_TABLE, TABLE_PARAMS, THRESHOLDS, problem
from riparian.rules import averaging, geometric


@pytest.mark.parametrize("key, family, printed", THRESHOLDS)
def test_reference_thresholds(key, family, printed):
    p = problem(key)
    if family == "geometric":
        value, tol = min_gamma_claims_bounded(p).value, 1e-3
    else:
        value, tol = float(min_lambda_claims_bounded(p).value), 5e-3
    assert abs(value - printed) <= tol


def test_equal_claims_threshold_closed_form():
    res = min_gamma_claims_bounded(problem("small_c"), tol=1e-7)
    assert abs(res.value - (3 - math.sqrt(3)) / 2) <= 1e-6
    assert res.binding_agent == 2
    assert res.single_interval


def test_threshold_is_feasible_and_tight():
    p = problem("tuojiang")
    res = min_gamma_claims_bounded(p)
    fp = p.to_float()
    assert claims_bounded(fp, geometric(fp, res.value), tol=1e-9).bounded
    assert not claims_bounded(fp, geometric(fp, res.value - 2e-4)).bounded


def test_lambda_closed_form_matches_search():
    for key in ("tuojiang", "hat", "tilde", "small_c"):
        p = problem(key)
        closed = float(min_lambda_claims_bounded(p).value)
        assert abs(closed - min_lambda_search(p, tol=1e-7).value) <= 1e-6


def test_lambda_full_precision_value():
    assert abs(float(min_lambda_claims_bounded(problem("tuojiang")).value) - 0.9395) < 5e-5


def test_lambda_zero_when_mouth_covers_budget():
    p = validate_problem([1, 1, 9], 5)
    assert min_lambda_claims_bounded(p).value == 0


def test_threshold_zero_when_full_transfer_bounded():
    res = min_gamma_claims_bounded(validate_problem([1, 1, 9], 5))
    assert res.value == 0.0 and res.binding_agent is None


def test_threshold_reports_disjoint_intervals(caplog):
    p = validate_problem([1.0], 1.0)

    def fake(q, t):
        # over the claim only inside (0.2, 0.7)
        return [2.0] if 0.2 < t < 0.7 else [0.5]

    res = threshold_search(p, fake, "demo")
    assert len(res.intervals) == 2 and not res.single_interval
    assert res.value == 0.0 and res.intervals[1][0] == 0.7
    assert "disjoint" in caplog.text


def test_threshold_dict():
    d = min_gamma_claims_bounded(problem("tuojiang")).to_dict(CITIES)
    assert d["binding_agent"] in CITIES and d["family"] == "geometric"


def test_claims_bounded_examples():
    p = problem("tuojiang")
    res = claims_bounded(p, geometric(p, F(1, 2)))
    assert not res.bounded and CITIES[res.worst_agent] == "Ziyang"
    assert abs(float(res.max_excess) - (11.94 - 2.13)) < 0.01
    res = claims_bounded(p, averaging(p, F(1, 2)))
    assert CITIES[res.worst_agent] == "Luzhou"
    assert abs(float(res.max_excess) - (38.16 - 15.18)) < 0.01


def test_sweep_matches_reference_columns():
    p = problem("tuojiang")
    sw = sweep_gamma(p, 5)
    assert sw.grid == (0.0, 0.25, 0.5, 0.75, 1.0)
    for row, printed in zip(sw.awards, BASE_TABLE["geometric"]):
        assert all(abs(a - b) <= 0.01 for a, b in zip(row, printed))


def test_sweep_endpoints_and_csv():
    p = problem("example1")
    sw = sweep_gamma(p, 2)
    assert sw.awards[0] == (0.0, 0.0, 0.0, 5.0)
    text = sw.to_csv(["1", "2", "3", "4"])
    assert text.splitlines()[0] == "gamma,1,2,3,4" and text.endswith("\n")
    with pytest.raises(ValueError):
        gamma_grid(1)


def test_sweep_mouth_non_increasing():
    col = sweep_gamma(problem("tuojiang"), 1001).column(5)
    assert all(b <= a + 1e-9 for a, b in zip(col, col[1:]))


@settings(max_examples=100, deadline=None)
@given(rational_problems(min_n=2, max_n=8))
def test_sweep_monotone_ends(p):
    sw = sweep_gamma(p, 41)
    first, mouth = sw.column(0), sw.column(p.n - 1)
    assert all(b >= a - 1e-9 for a, b in zip(first, first[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(mouth, mouth[1:]))


def test_argmax_tuojiang():
    p = problem("tuojiang")
    best = argmax_gamma_per_agent(p)
    assert best[0] == 1.0
    assert best[5] == 0.0
    fp = p.to_float()
    dense = [k / 10000 for k in range(10001)]
    for i in range(1, 5):
        values = [geometric(fp, g)[i] for g in dense]
        k = max(range(len(dense)), key=values.__getitem__)
        assert abs(best[i] - dense[k]) <= 2e-4, CITIES[i]
        assert geometric(fp, best[i])[i] >= values[k] - 1e-9


def test_round_half_up():
    assert round_half_up(F(1, 8)) == Decimal("0.13")
    assert round_half_up(0.125) == Decimal("0.13")
    assert round_half_up(2.675) == Decimal("2.68")
    assert round_half_up(F(-1, 8)) == Decimal("-0.13")


def test_compare_families_render():
    p = problem("tuojiang")
    table = compare_families(p, TABLE_PARAMS, CITIES)
    text = table.render()
    assert "Luzhou" in text and "gamma=1/2" in text and "lambda=3/4" in text
    assert text.splitlines()[-1].split()[-1] == "64.30"
    csv = table.to_csv()
    assert csv.splitlines()[0].startswith("agent,claim,gamma=0")
    with pytest.raises(ValueError):
        compare_families(p, [F(3, 2)])
