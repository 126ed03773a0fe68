"""Domain types and the numeric contract shared by every other module.

Quantities come in two interchangeable backends: exact rationals
(:class:`fractions.Fraction`) and floats.  A :class:`Problem` is exact when
all of its inputs are ints, Fractions or decimal strings; any float input
switches it to float mode unless ``exact=True`` is requested, in which case
floats are read through their shortest decimal representation (``0.1`` becomes
``1/10``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Sequence, Union

Quantity = Union[Fraction, float]

#: Absolute tolerance used for float-mode equality.
FLOAT_TOL = 1e-9


class ValidationError(ValueError):
    """Base class for every invalid-input error raised by this package."""


class EmptyClaims(ValidationError):
    def __init__(self) -> None:
        super().__init__("claims vector is empty (n >= 1 required)")


class NegativeClaim(ValidationError):
    def __init__(self, index, value=None) -> None:
        self.index = index
        super().__init__(f"claim at position {index} is negative ({value})")


class ZeroAggregateClaim(ValidationError):
    def __init__(self) -> None:
        super().__init__("aggregate claim must be positive")


class NegativeBudget(ValidationError):
    def __init__(self, value) -> None:
        super().__init__(f"budget is negative ({value})")


class BudgetExceedsAggregate(ValidationError):
    def __init__(self, budget, total) -> None:
        self.budget = budget
        self.total = total
        super().__init__(f"budget {budget} exceeds aggregate claim {total}")


class ParameterOutOfRange(ValidationError):
    def __init__(self, name: str, value) -> None:
        super().__init__(f"parameter {name}={value} is outside [0, 1]")


def to_quantity(value, exact: bool) -> Quantity:
    """Convert ``value`` into the requested backend.

    Strings are parsed as decimals (``"4.17"``) or fractions (``"7/3"``).
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not quantities")
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, Rational)):
            return Fraction(value)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValidationError(f"non-finite quantity {value!r}")
            return Fraction(repr(value))
        if isinstance(value, (str, Decimal)):
            return Fraction(str(value).strip())
        raise TypeError(f"cannot interpret {value!r} as a quantity")
    if isinstance(value, str):
        value = Fraction(value.strip())
    out = float(value)
    if not math.isfinite(out):
        raise ValidationError(f"non-finite quantity {value!r}")
    return out


def is_exact_value(value) -> bool:
    return isinstance(value, (int, Rational, str, Decimal)) and not isinstance(value, bool)


def infer_exact(values: Iterable) -> bool:
    return all(is_exact_value(v) for v in values)


def quantities_equal(a, b, tol: float = FLOAT_TOL) -> bool:
    """Exact comparison when both sides are rational, else ``|a-b| <= tol``."""
    if isinstance(a, Rational) and isinstance(b, Rational):
        return a == b
    return abs(float(a) - float(b)) <= tol


def vectors_equal(xs: Sequence, ys: Sequence, tol: float = FLOAT_TOL) -> bool:
    return len(xs) == len(ys) and all(quantities_equal(x, y, tol) for x, y in zip(xs, ys))


def format_quantity(value) -> str:
    """Render a Fraction as a reduced ``p/q`` (or integer) and a float via repr."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


@dataclass(frozen=True)
class Problem:
    """A claims vector (upstream first) together with a budget."""

    claims: tuple
    budget: Quantity

    @property
    def n(self) -> int:
        return len(self.claims)

    @property
    def total(self) -> Quantity:
        return sum(self.claims, self._zero())

    @property
    def exact(self) -> bool:
        return isinstance(self.budget, Fraction)

    @property
    def ratio(self) -> Quantity:
        """Budget over aggregate claim, the common scaling factor E/C."""
        return self.budget / self.total

    def _zero(self) -> Quantity:
        return Fraction(0) if isinstance(self.budget, Fraction) else 0.0

    def with_claims(self, claims: Sequence, budget=None) -> "Problem":
        return validate_problem(claims, self.budget if budget is None else budget, exact=self.exact)

    def to_float(self) -> "Problem":
        return Problem(tuple(float(c) for c in self.claims), float(self.budget))

    def __str__(self) -> str:
        inner = ", ".join(format_quantity(c) for c in self.claims)
        return f"(({inner}), {format_quantity(self.budget)})"


def validate_problem(claims: Iterable, budget, exact: bool | None = None) -> Problem:
    """Build a :class:`Problem`, checking every invariant.

    ``exact=None`` infers the backend from the inputs.
    """
    raw = list(claims)
    if exact is None:
        exact = infer_exact(raw + [budget])
    if not raw:
        raise EmptyClaims()
    values = tuple(to_quantity(c, exact) for c in raw)
    for i, c in enumerate(values, start=1):
        if c < 0:
            raise NegativeClaim(i, c)
    budget_q = to_quantity(budget, exact)
    total = sum(values, Fraction(0) if exact else 0.0)
    if total <= 0:
        raise ZeroAggregateClaim()
    if budget_q < 0:
        raise NegativeBudget(budget_q)
    if budget_q > total:
        # Float inputs that agree to within tolerance are clamped to C.
        if not exact and budget_q - total <= FLOAT_TOL:
            budget_q = total
        else:
            raise BudgetExceedsAggregate(budget_q, total)
    return Problem(values, budget_q)


def is_redistribution(p: Problem) -> bool:
    """True when the budget equals the aggregate claim."""
    return quantities_equal(p.budget, p.total)


@dataclass(frozen=True)
class Allocation:
    """Non-negative awards summing to the budget of the problem they solve."""

    awards: tuple

    def __iter__(self) -> Iterator:
        return iter(self.awards)

    def __len__(self) -> int:
        return len(self.awards)

    def __getitem__(self, i):
        return self.awards[i]

    @property
    def total(self):
        return sum(self.awards)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.awards)

    def __str__(self) -> str:
        return ", ".join(format_quantity(x) for x in self.awards)


class UnbalancedAllocation(AssertionError):
    pass


def make_allocation(p: Problem, awards: Sequence) -> Allocation:
    """Wrap ``awards`` after checking balance and non-negativity against ``p``.

    Every rule in the package funnels its output through here.
    """
    awards = tuple(awards)
    if len(awards) != p.n:
        raise UnbalancedAllocation(f"expected {p.n} awards, got {len(awards)}")
    if p.exact:
        if any(x < 0 for x in awards) or sum(awards) != p.budget:
            raise UnbalancedAllocation(f"awards {awards} do not balance budget {p.budget}")
    else:
        slack = max(FLOAT_TOL, 1e-12 * abs(float(p.budget)))
        if any(x < -slack for x in awards):
            raise UnbalancedAllocation(f"negative award in {awards}")
        if abs(math.fsum(awards) - p.budget) > slack:
            raise UnbalancedAllocation(f"awards {awards} do not balance budget {p.budget}")
        awards = tuple(max(0.0, x) for x in awards)
    return Allocation(awards)
