import math
from fractions import Fraction

import pytest
from hypothesis import strategies as st

import riparian.core
import riparian.rules
from riparian.core import validate_problem

AUDIT = {"allocations": 0}


def _audited(original):
    def wrapper(p, awards):
        alloc = original(p, awards)
        xs = alloc.awards
        if p.exact:
            assert all(x >= 0 for x in xs) and sum(xs) == p.budget, (p, xs)
        else:
            assert all(x >= 0 for x in xs), (p, xs)
            assert abs(math.fsum(xs) - p.budget) <= 1e-9 * max(1.0, p.budget), (p, xs)
        AUDIT["allocations"] += 1
        return alloc

    return wrapper


@pytest.fixture(autouse=True, scope="session")
def audit_every_allocation():
    """Re-check balance and non-negativity on every allocation any rule builds."""
    original = riparian.core.make_allocation
    riparian.rules.make_allocation = _audited(original)
    yield AUDIT
    riparian.rules.make_allocation = original


fractions_ = st.builds(Fraction, st.integers(0, 400), st.integers(1, 12))
unit_fractions = st.builds(lambda a, b: Fraction(min(a, b), max(a, b, 1)), st.integers(0, 60), st.integers(1, 60))


@st.composite
def rational_problems(draw, min_n=1, max_n=12, redistribution=False):
    claims = draw(st.lists(fractions_, min_size=min_n, max_size=max_n))
    if sum(claims) == 0:
        claims[draw(st.integers(0, len(claims) - 1))] = draw(st.builds(Fraction, st.integers(1, 50), st.integers(1, 6)))
    total = sum(claims)
    budget = total if redistribution else total * draw(unit_fractions)
    return validate_problem(claims, budget)


@pytest.fixture
def worked():
    return validate_problem([2, 5, 5, 3], 5)


@pytest.fixture
def tuojiang():
    from riparian.datasets import tuojiang

    return tuojiang(exact=True)
