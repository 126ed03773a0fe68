"""Claims-boundedness thresholds, parameter sweeps and family comparisons."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from scipy.optimize import minimize_scalar

from .core import Allocation, Problem, format_quantity
from .rules import averaging, geometric

log = logging.getLogger(__name__)

SCAN_STEP = 1e-3
BISECT_TOL = 1e-6
SWEEP_POINTS = 1001


class Boundedness(NamedTuple):
    bounded: bool
    max_excess: object
    worst_agent: int


def claims_bounded(p: Problem, x: Allocation | Sequence, tol: float = 0.0) -> Boundedness:
    """Check ``x_i <= c_i`` for every agent.

    ``worst_agent`` is the 0-based index with the largest ``x_i - c_i`` (first
    one on ties); ``max_excess`` is clipped at zero.
    """
    diffs = [a - c for a, c in zip(x, p.claims)]
    worst = max(range(len(diffs)), key=lambda i: (diffs[i], -i))
    excess = max(diffs[worst], diffs[worst] * 0)
    return Boundedness(excess <= tol, excess, worst)


@dataclass(frozen=True)
class ThresholdResult:
    family: str
    value: float
    intervals: tuple[tuple[float, float], ...]
    binding_agent: int | None
    tolerance: float
    single_interval: bool = True
    method: str = "grid+bisection"

    def to_dict(self, agent_ids: Sequence[str] | None = None) -> dict:
        binding = self.binding_agent
        if binding is not None and agent_ids is not None:
            binding = agent_ids[binding]
        return {
            "family": self.family,
            "value": float(self.value),
            "binding_agent": binding,
            "feasible_intervals": [list(map(float, iv)) for iv in self.intervals],
            "single_interval": self.single_interval,
            "tolerance": self.tolerance,
            "method": self.method,
        }


def _feasible(rule: Callable, p: Problem, param: float, slack: float) -> bool:
    return claims_bounded(p, rule(p, param), tol=slack).bounded


def threshold_search(
    p: Problem,
    rule: Callable[[Problem, float], Allocation],
    family: str,
    tol: float = BISECT_TOL,
    step: float = SCAN_STEP,
) -> ThresholdResult:
    """Lowest parameter in ``[0, 1]`` at which ``rule`` is claims-bounded.

    The feasible set is not assumed to be an interval: a grid scan records
    every feasible run, and bisection sharpens the lower end of the lowest one.
    The parameter value 1 must be feasible.
    """
    fp = p if not p.exact else p.to_float()
    slack = 1e-12 * max(1.0, float(fp.total))
    steps = max(1, round(1 / step))
    grid = [k / steps for k in range(steps + 1)]
    flags = [_feasible(rule, fp, g, slack) for g in grid]
    if not flags[-1]:
        raise ValueError(f"{family} rule is not claims-bounded even at parameter 1")

    runs: list[list[int]] = []
    for k, ok in enumerate(flags):
        if ok and (k == 0 or not flags[k - 1]):
            runs.append([k, k])
        elif ok:
            runs[-1][1] = k
    intervals = tuple((grid[a], grid[b]) for a, b in runs)
    if len(runs) > 1:
        log.warning("%s threshold: %d disjoint feasible intervals on the grid", family, len(runs))

    first = runs[0][0]
    if first == 0:
        return ThresholdResult(family, 0.0, intervals, None, tol, len(runs) == 1)
    lo, hi = grid[first - 1], grid[first]
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _feasible(rule, fp, mid, slack):
            hi = mid
        else:
            lo = mid
    binding = claims_bounded(fp, rule(fp, lo)).worst_agent
    return ThresholdResult(family, hi, intervals, binding, tol, len(runs) == 1)


def min_gamma_claims_bounded(p: Problem, tol: float = BISECT_TOL, step: float = SCAN_STEP) -> ThresholdResult:
    return threshold_search(p, geometric, "geometric", tol=tol, step=step)


def min_lambda_claims_bounded(p: Problem) -> ThresholdResult:
    """Closed form for averaging rules.

    Only the mouth can exceed its claim, so the threshold solves
    ``lam * (E/C) * c_n + (1 - lam) * E = c_n``.
    """
    e, c_n = p.budget, p.claims[-1]
    if e <= c_n:
        return ThresholdResult("averaging", e * 0, ((0.0, 1.0),), None, 0.0, True, "closed form: E <= c_n")
    value = (e - c_n) / (e - p.ratio * c_n)
    return ThresholdResult(
        "averaging", value, ((float(value), 1.0),), p.n - 1, 0.0, True, "closed form: (E - c_n) / (E - c_n E/C)"
    )


def min_lambda_search(p: Problem, tol: float = BISECT_TOL) -> ThresholdResult:
    """Grid + bisection version of :func:`min_lambda_claims_bounded`."""
    return threshold_search(p, averaging, "averaging", tol=tol)


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    awards: tuple[tuple[float, ...], ...]

    def column(self, agent: int) -> tuple[float, ...]:
        return tuple(row[agent] for row in self.awards)

    def to_csv(self, agent_ids: Sequence[str]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gamma", *agent_ids])
        for g, row in zip(self.grid, self.awards):
            writer.writerow([repr(g), *(repr(x) for x in row)])
        return buf.getvalue()

    def to_dict(self, agent_ids: Sequence[str]) -> dict:
        return {
            "gamma": list(self.grid),
            "awards": {a: list(self.column(i)) for i, a in enumerate(agent_ids)},
        }


def gamma_grid(points: int = SWEEP_POINTS) -> tuple[float, ...]:
    if points < 2:
        raise ValueError("a sweep needs at least 2 grid points")
    return tuple(k / (points - 1) for k in range(points))


def sweep_gamma(p: Problem, grid: int | Sequence = SWEEP_POINTS) -> SweepResult:
    """Geometric awards of every agent along a grid of gamma values."""
    values = gamma_grid(grid) if isinstance(grid, int) else tuple(grid)
    if len(values) < 2 or any(not 0 <= g <= 1 for g in values):
        raise ValueError("grid must hold at least 2 values inside [0, 1]")
    fp = p.to_float()
    rows = tuple(geometric(fp, float(g)).as_floats() for g in values)
    return SweepResult(tuple(float(g) for g in values), rows)


def argmax_gamma_per_agent(p: Problem, tol: float = 1e-6, step: float = SCAN_STEP) -> list[float]:
    """For each agent, the gamma at which its geometric award peaks.

    Grid scan first, then a bounded Brent/golden-section search on the two grid
    cells around the best point.  Ties go to the smaller gamma.
    """
    fp = p.to_float()
    grid = gamma_grid(round(1 / step) + 1)
    table = [geometric(fp, g).as_floats() for g in grid]
    out = []
    for i in range(fp.n):
        values = [row[i] for row in table]
        best = max(range(len(grid)), key=lambda k: (values[k], -k))
        a, b = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
        res = minimize_scalar(
            lambda g: -geometric(fp, min(max(g, 0.0), 1.0))[i],
            bounds=(a, b),
            method="bounded",
            options={"xatol": tol},
        )
        cand = [(values[best], grid[best])]
        if res.success:
            g = min(max(float(res.x), 0.0), 1.0)
            cand.append((geometric(fp, g)[i], g))
        top = max(v for v, _ in cand)
        # Anything within float noise of the peak counts as a tie.
        out.append(min(g for v, g in cand if v >= top - 1e-12 * max(1.0, abs(top))))
    return out


def round_half_up(value, places: int = 2) -> Decimal:
    if isinstance(value, Fraction):
        d = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        d = Decimal(repr(float(value)))
    return d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class FamilyTable:
    """Geometric and averaging awards side by side, one column per parameter."""

    agents: tuple[str, ...]
    claims: tuple
    params: tuple
    geometric: tuple[tuple, ...]
    averaging: tuple[tuple, ...]
    budget: object = None

    def columns(self) -> list[tuple[str, tuple]]:
        cols = [(f"gamma={format_quantity(g)}", col) for g, col in zip(self.params, self.geometric)]
        cols += [(f"lambda={format_quantity(l)}", col) for l, col in zip(self.params, self.averaging)]
        return cols

    def render(self) -> str:
        cols = self.columns()
        head = ["agent", "claim", *(name for name, _ in cols)]
        rows = [head]
        for i, agent in enumerate(self.agents):
            rows.append([agent, str(round_half_up(self.claims[i])), *(str(round_half_up(col[i])) for _, col in cols)])
        total_claim = sum(self.claims)
        rows.append(["Total", str(round_half_up(total_claim)), *(str(round_half_up(sum(col))) for _, col in cols)])
        widths = [max(len(r[j]) for r in rows) for j in range(len(head))]
        lines = ["  ".join(cell.ljust(w) if j == 0 else cell.rjust(w) for j, (cell, w) in enumerate(zip(r, widths))) for r in rows]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        writer.writerow(["agent", "claim", *(name for name, _ in cols)])
        for i, agent in enumerate(self.agents):
            writer.writerow([agent, format_quantity(self.claims[i]), *(str(round_half_up(col[i])) for _, col in cols)])
        return buf.getvalue()


def compare_families(p: Problem, params: Sequence, agents: Sequence[str] | None = None) -> FamilyTable:
    agents = tuple(agents or (str(i) for i in range(1, p.n + 1)))
    for t in params:
        if not 0 <= t <= 1:
            raise ValueError(f"parameter {t} outside [0, 1]")
    geo = tuple(geometric(p, t).awards for t in params)
    avg = tuple(averaging(p, t).awards for t in params)
    return FamilyTable(agents, p.claims, tuple(params), geo, avg, p.budget)
