"""Axioms as executable, sample-based checks.

Each axiom is described by a case generator (how to build test instances
from sampled problems), an evaluator (the two vectors the axiom says must be
equal) and optionally a shrinker used to minimize counterexamples.  A
"satisfied" verdict only ever means "no violation on this sample".
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .core import Problem, ValidationError, format_quantity, validate_problem
from .rules import RuleSpec, parse_rule_spec

SATISFIED = "satisfied-on-sample"
VIOLATED = "violated"

#: Float-mode differences below this are never reported as violations.
REPORT_THRESHOLD = 1e-6


# ---------------------------------------------------------------------------
# Problem generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleConfig:
    n_min: int = 2
    n_max: int = 6
    claim_max: int = 20
    #: Exact claims are multiples of ``1 / denominator``.
    denominator: int = 4
    redistribution_only: bool = False
    zero_claim_probability: float = 0.15
    exact: bool = True

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.claim_max <= 0 or self.denominator <= 0:
            raise ValueError("claim range must be non-degenerate")
        if not 0 <= self.zero_claim_probability <= 1:
            raise ValueError("zero_claim_probability must lie in [0, 1]")


def gen_problems(seed: int, config: SampleConfig = SampleConfig(), count: int | None = None) -> Iterator[Problem]:
    """Deterministic stream of random problems (infinite unless ``count``)."""
    rng = random.Random(seed)
    emitted = 0
    while count is None or emitted < count:
        n = rng.randint(config.n_min, config.n_max)
        claims = [_draw_claim(rng, config) for _ in range(n)]
        claims = [c * 0 if rng.random() < config.zero_claim_probability else c for c in claims]
        if sum(claims) <= 0:
            # Never emit an all-zero claims vector.
            k = rng.randrange(n)
            while claims[k] <= 0:
                claims[k] = _draw_claim(rng, config)
        total = sum(claims)
        if config.redistribution_only:
            budget = total
        elif config.exact:
            budget = total * Fraction(rng.randint(0, 60), 60)
        else:
            budget = total * rng.random()
        yield validate_problem(claims, budget, exact=config.exact)
        emitted += 1


def _draw_claim(rng: random.Random, config: SampleConfig):
    if config.exact:
        return Fraction(rng.randint(0, config.claim_max * config.denominator), config.denominator)
    return rng.uniform(0, config.claim_max)


def sample_problems(seed: int, size: int, config: SampleConfig = SampleConfig()) -> list[Problem]:
    return list(gen_problems(seed, config, size))


# ---------------------------------------------------------------------------
# Reports and counterexample serialization
# ---------------------------------------------------------------------------


@dataclass
class AxiomReport:
    axiom: str
    rule: str
    verdict: str
    counterexample: dict | None
    sample_size: int
    seed: int | None
    skipped: int = 0
    conclusive: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return self.verdict == SATISFIED

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @property
    def mark(self) -> str:
        return "Y" if self.satisfied else "N"


def _ser(value):
    if isinstance(value, Problem):
        return {"claims": [_ser(c) for c in value.claims], "budget": _ser(value.budget)}
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_ser(v) for v in value]
    if isinstance(value, dict):
        return {k: _ser(v) for k, v in value.items()}
    return value


def _de(value):
    if isinstance(value, dict) and set(value) == {"claims", "budget"}:
        return validate_problem([_de(c) for c in value["claims"]], _de(value["budget"]))
    if isinstance(value, dict):
        return {k: _de(v) for k, v in value.items()}
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, list):
        return [_de(v) for v in value]
    return value


def serialize_case(case: dict) -> dict:
    return _ser(case)


def deserialize_case(data: dict) -> dict:
    return _de(data)


# ---------------------------------------------------------------------------
# Axiom definitions
# ---------------------------------------------------------------------------

Evaluation = tuple  # (lhs vector, rhs vector) or None when the precondition fails


@dataclass(frozen=True)
class Axiom:
    name: str
    evaluate: Callable[[RuleSpec, dict], Evaluation | None]
    shrink: Callable[[dict], Iterable[dict]] | None = None
    #: Returns (violated, agent, difference) for an evaluation.
    compare: Callable | None = None


def _redistribution(p: Problem) -> Problem:
    return p if p.budget == p.total else validate_problem(p.claims, p.total, exact=p.exact)


def _same_ratio(p: Problem, claims: Sequence) -> Problem | None:
    total = sum(claims, p.budget * 0)
    if total <= 0:
        return None
    return validate_problem(claims, p.ratio * total, exact=p.exact)


def _shrunk_problems(p: Problem, keep: Sequence[int] = ()) -> Iterator[tuple[Problem, list[int]]]:
    """Smaller variants of ``p`` with the same budget/claims ratio.

    Yields ``(problem, index_map)`` where ``index_map[new] = old``.
    """
    n = p.n
    if n > 1:
        for k in range(n):
            if k in keep:
                continue
            idx = [i for i in range(n) if i != k]
            q = _same_ratio(p, [p.claims[i] for i in idx])
            if q is not None:
                yield q, idx
    ident = list(range(n))
    one = p.budget ** 0
    zero = p.budget * 0
    for claims in ([one if c > 0 else zero for c in p.claims], [(c // 1) * one for c in p.claims]):
        if claims != list(p.claims):
            q = _same_ratio(p, claims)
            if q is not None:
                yield q, ident


def _vec_add(xs, ys):
    return [x + y for x, y in zip(xs, ys)]


def _vec_scale(a, xs):
    return [a * x for x in xs]


# scale invariance ----------------------------------------------------------


def _eval_scale(rule: RuleSpec, case: dict):
    p, mu = case["problem"], case["mu"]
    scaled = validate_problem([mu * c for c in p.claims], mu * p.budget, exact=p.exact)
    return list(rule(scaled)), _vec_scale(mu, rule(p))


def _shrink_scale(case):
    for q, _ in _shrunk_problems(case["problem"]):
        yield {**case, "problem": q}


# budget additivity -----------------------------------------------------------


def _eval_budget_additivity(rule, case):
    p, first = case["problem"], case["first"]
    a = rule(p.with_claims(p.claims, first))
    b = rule(p.with_claims(p.claims, p.budget - first))
    return list(rule(p)), _vec_add(a, b)


def _shrink_budget_additivity(case):
    p, first = case["problem"], case["first"]
    if p.budget == 0:
        return
    share = first / p.budget
    for q, _ in _shrunk_problems(p):
        yield {"problem": q, "first": q.budget * share}


# upstream invariance ---------------------------------------------------------


def _eval_upstream(rule, case):
    p, i, delta = case["problem"], case["index"], case["delta"]
    raised = list(p.claims)
    raised[i] = raised[i] + delta
    q = validate_problem(raised, p.budget + delta, exact=p.exact)
    return list(rule(p))[:i], list(rule(q))[:i]


def _shrink_upstream(case):
    p, i = case["problem"], case["index"]
    for q, idx in _shrunk_problems(p, keep=[i]):
        yield {**case, "problem": q, "index": idx.index(i)}


# equal treatment of equal single polluters -----------------------------------


def single_polluter(n: int, position: int, budget) -> Problem:
    claims = [budget * 0] * n
    claims[position] = budget
    return validate_problem(claims, budget)


def _eval_single_polluters(rule, case):
    n, e, i, j = case["n"], case["budget"], case["i"], case["j"]
    return [rule(single_polluter(n, i, e))[i]], [rule(single_polluter(n, j, e))[j]]


# top consistency ---------------------------------------------------------------


def _eval_top(rule, case):
    p = case["problem"]
    if p.n < 2:
        return None
    x = rule(p)
    if x[0] > p.claims[0]:
        return None
    reduced_claims = [p.claims[1] + (p.claims[0] - x[0]), *p.claims[2:]]
    reduced = validate_problem(reduced_claims, p.budget - x[0], exact=p.exact)
    return list(x)[1:], list(rule(reduced))


def _shrink_top(case):
    for q, _ in _shrunk_problems(case["problem"]):
        yield {"problem": q}


# equal treatment of equal claims ----------------------------------------------


def _eval_equal_claims(rule, case):
    p, i, j = case["problem"], case["i"], case["j"]
    x = rule(p)
    return [x[i]], [x[j]]


def _shrink_equal_claims(case):
    p, i, j = case["problem"], case["i"], case["j"]
    for q, idx in _shrunk_problems(p, keep=[i, j]):
        yield {"problem": q, "i": idx.index(i), "j": idx.index(j)}


# additivity -------------------------------------------------------------------


def _eval_additivity(rule, case):
    p, q = case["first"], case["second"]
    combined = validate_problem(_vec_add(p.claims, q.claims), p.budget + q.budget, exact=p.exact)
    return list(rule(combined)), _vec_add(rule(p), rule(q))


def _shrink_additivity(case):
    p, q = case["first"], case["second"]
    if p.n < 2:
        return
    for k in range(p.n):
        idx = [i for i in range(p.n) if i != k]
        a = _same_ratio(p, [p.claims[i] for i in idx])
        b = _same_ratio(q, [q.claims[i] for i in idx])
        if a is not None and b is not None:
            yield {"first": a, "second": b}


# merging/splitting proofness --------------------------------------------------


def unit_problem(n: int) -> Problem:
    return validate_problem([1] + [0] * (n - 1), 1)


def _eval_merging(rule, case):
    n, i = case["n"], case["i"]
    big, small = rule(unit_problem(n)), rule(unit_problem(n - 1))
    return [big[i] + big[i + 1]], [small[i]]


# budget linearity ---------------------------------------------------------------


def _eval_linearity(rule, case):
    p, alpha = case["problem"], case["alpha"]
    full = _redistribution(p)
    part = validate_problem(full.claims, alpha * full.total, exact=p.exact)
    return list(rule(part)), _vec_scale(alpha, rule(full))


def _shrink_linearity(case):
    for q, _ in _shrunk_problems(case["problem"]):
        yield {**case, "problem": q}


# continuity (heuristic) -----------------------------------------------------------


def _perturbed(p: Problem, coord: int, delta) -> Problem | None:
    claims = list(p.claims)
    budget = p.budget
    if coord == p.n:
        budget = budget + delta
    else:
        claims[coord] = claims[coord] + delta
    try:
        return validate_problem(claims, budget, exact=p.exact)
    except ValidationError:
        return None


def _eval_continuity(rule, case):
    p = case["problem"]
    q = _perturbed(p, case["coord"], case["delta"])
    if q is None:
        return None
    return list(rule(q)), list(rule(p))


def _lipschitz_compare(lhs, rhs, case):
    gaps = [abs(a - b) for a, b in zip(lhs, rhs)]
    k = max(range(len(gaps)), key=gaps.__getitem__)
    return gaps[k] > case["bound"] * abs(case["delta"]), k, gaps[k]


AXIOMS: dict[str, Axiom] = {
    "scale-invariance": Axiom("scale-invariance", _eval_scale, _shrink_scale),
    "budget-additivity": Axiom("budget-additivity", _eval_budget_additivity, _shrink_budget_additivity),
    "upstream-invariance": Axiom("upstream-invariance", _eval_upstream, _shrink_upstream),
    "equal-single-polluters": Axiom("equal-single-polluters", _eval_single_polluters),
    "top-consistency": Axiom("top-consistency", _eval_top, _shrink_top),
    "equal-claims": Axiom("equal-claims", _eval_equal_claims, _shrink_equal_claims),
    "additivity": Axiom("additivity", _eval_additivity, _shrink_additivity),
    "merging-splitting": Axiom("merging-splitting", _eval_merging),
    "budget-linearity": Axiom("budget-linearity", _eval_linearity, _shrink_linearity),
    "continuity": Axiom("continuity", _eval_continuity, compare=_lipschitz_compare),
}

#: Axioms run by default; continuity is heuristic and opt-in.
DEFAULT_AXIOMS = tuple(name for name in AXIOMS if name != "continuity")

#: Axiom rows compared in the family matrix.
FAMILY_AXIOMS = (
    "scale-invariance",
    "budget-additivity",
    "equal-single-polluters",
    "upstream-invariance",
    "top-consistency",
    "merging-splitting",
)


def _exact_compare(lhs, rhs, case=None):
    for k, (a, b) in enumerate(zip(lhs, rhs)):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            if a != b:
                return True, k, a - b
        elif abs(a - b) > REPORT_THRESHOLD:
            return True, k, a - b
    return False, None, 0


def _first_violation(axiom: Axiom, rule: RuleSpec, case: dict):
    try:
        ev = axiom.evaluate(rule, case)
    except ValidationError:
        return None
    if ev is None:
        return None
    lhs, rhs = ev
    compare = axiom.compare or _exact_compare
    violated, agent, diff = compare(lhs, rhs, case)
    if not violated:
        return None
    return lhs, rhs, agent, diff


def _minimize(axiom: Axiom, rule: RuleSpec, case: dict, found, budget_s: float = 2.0):
    if axiom.shrink is None:
        return case, found
    deadline = time.monotonic() + budget_s
    improved = True
    while improved and time.monotonic() < deadline:
        improved = False
        for cand in axiom.shrink(case):
            hit = _first_violation(axiom, rule, cand)
            if hit is not None:
                case, found, improved = cand, hit, True
                break
    return case, found


def _counterexample(axiom: Axiom, case: dict, found, exact: bool) -> dict:
    lhs, rhs, agent, diff = found
    return {
        "case": serialize_case(case),
        "agent": agent,
        "lhs": [format_quantity(v) for v in lhs],
        "rhs": [format_quantity(v) for v in rhs],
        "difference": format_quantity(diff),
        "exact": exact,
    }


def run_axiom(
    name: str,
    rule: RuleSpec,
    cases: Iterable[tuple[dict, bool]],
    seed: int | None = None,
    minimize: bool = True,
) -> AxiomReport:
    """Evaluate ``cases`` (pairs of case and "is a fixture" flag) until the
    first violation.  Fixture counterexamples are reported as given."""
    axiom = AXIOMS[name]
    size = skipped = 0
    for case, fixture in cases:
        size += 1
        try:
            ev = axiom.evaluate(rule, case)
        except ValidationError:
            ev = None
        if ev is None:
            skipped += 1
            continue
        found = _first_violation(axiom, rule, case)
        if found is None:
            continue
        if minimize and not fixture:
            case, found = _minimize(axiom, rule, case, found)
        exact = _case_is_exact(case)
        return AxiomReport(
            name, rule.name, VIOLATED, _counterexample(axiom, case, found, exact), size, seed, skipped,
            conclusive=name != "continuity",
        )
    return AxiomReport(name, rule.name, SATISFIED, None, size, seed, skipped, conclusive=name != "continuity")


def _case_is_exact(case: dict) -> bool:
    for v in case.values():
        if isinstance(v, Problem):
            return v.exact
        if isinstance(v, float):
            return False
    return True


def replay(report: AxiomReport | dict, rule: RuleSpec | None = None) -> bool:
    """Re-evaluate a serialized counterexample; True iff it still violates."""
    data = report.to_dict() if isinstance(report, AxiomReport) else report
    cx = data.get("counterexample")
    if not cx:
        return False
    rule = rule or parse_rule_spec(data["rule"])
    case = deserialize_case(cx["case"])
    axiom = AXIOMS[data["axiom"]]
    return _first_violation(axiom, rule, case) is not None


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------


def _rng(seed):
    return random.Random(0 if seed is None else seed)


def _positive(rng: random.Random, exact: bool, lo=1, hi=40, den=8):
    if exact:
        return Fraction(rng.randint(lo, hi), rng.randint(1, den))
    return rng.uniform(0.1, 10.0)


def _unit(rng: random.Random, exact: bool):
    return Fraction(rng.randint(0, 24), 24) if exact else rng.random()


def check_scale_invariance(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    rng = _rng(seed)
    cases = (({"problem": p, "mu": _positive(rng, p.exact)}, False) for p in sample)
    return run_axiom("scale-invariance", rule, cases, seed)


def check_budget_additivity(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    rng = _rng(seed)
    cases = (({"problem": p, "first": p.budget * _unit(rng, p.exact)}, False) for p in sample)
    return run_axiom("budget-additivity", rule, cases, seed)


def check_upstream_invariance(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    """Sample problems are moved onto the redistribution domain (budget = C)."""
    rng = _rng(seed)

    def cases():
        for p in sample:
            q = _redistribution(p)
            i = rng.randrange(1, q.n) if q.n > 1 else 0
            yield {"problem": q, "index": i, "delta": _positive(rng, q.exact)}, False

    return run_axiom("upstream-invariance", rule, cases(), seed)


def check_equal_single_polluters(
    rule: RuleSpec,
    n_range: tuple[int, int] = (2, 8),
    positions: Sequence[int] | None = None,
    extended: bool = False,
    budgets: Sequence = (Fraction(1), Fraction(8), Fraction(7, 3)),
) -> AxiomReport:
    """Compare the lone polluter's award across positions.

    Positions are 1-based.  By default the mouth is excluded (positions
    ``1..n-1``); ``extended=True`` includes it.
    """

    def cases():
        for n in range(max(n_range[0], 2), n_range[1] + 1):
            if positions is not None:
                pos = [k - 1 for k in positions if 1 <= k <= n]
            else:
                pos = list(range(n if extended else n - 1))
            for e in budgets:
                for j in pos[1:]:
                    yield {"n": n, "budget": e, "i": pos[0], "j": j}, False

    report = run_axiom("equal-single-polluters", rule, cases(), None)
    if extended:
        report.notes.append("extended mode: mouth position included")
    return report


def check_top_consistency(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    """Fixture ((2,2,2),6) first, then the sample moved onto budget = C.

    Instances whose first award exceeds the first claim are skipped and counted,
    as are those whose reduced problem has zero aggregate claim (for example
    ``((11/4, 0), 11/4)`` under a rule that awards agent 1 its whole claim):
    the reduced instance lies outside the problem domain.
    """
    fixture = validate_problem([2, 2, 2], 6)
    cases = [({"problem": fixture}, True)] + [({"problem": _redistribution(p)}, False) for p in sample]
    return run_axiom("top-consistency", rule, cases, seed)


def check_equal_treatment_equal_claims(
    rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None
) -> AxiomReport:
    rng = _rng(seed)

    def cases():
        for p in sample:
            if p.n < 2:
                continue
            i, j = sorted(rng.sample(range(p.n), 2))
            claims = list(p.claims)
            source = claims[i] if claims[i] > 0 else claims[j]
            claims[i] = claims[j] = source
            q = _same_ratio(p, claims)
            if q is not None:
                yield {"problem": q, "i": i, "j": j}, False

    return run_axiom("equal-claims", rule, cases(), seed)


def check_additivity(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    """Pairs each sampled problem with a fresh same-size partner.

    The pair ``((2,0,0),1)`` / ``((0,1,0),1)`` always runs first.
    """
    rng = _rng(seed)

    def cases():
        first = validate_problem([2, 0, 0], 1)
        second = validate_problem([0, 1, 0], 1)
        yield {"first": first, "second": second}, True
        for p in sample:
            claims = [_positive(rng, p.exact, lo=0, hi=40, den=4) * (rng.random() > 0.15) for _ in range(p.n)]
            if sum(claims) <= 0:
                claims[-1] = _positive(rng, p.exact)
            partner = validate_problem(claims, sum(claims) * _unit(rng, p.exact), exact=p.exact)
            yield {"first": p, "second": partner}, False

    return run_axiom("additivity", rule, cases(), seed)


def check_merging_splitting(rule: RuleSpec, n_max: int = 8) -> AxiomReport:
    cases = (({"n": n, "i": i}, False) for n in range(2, n_max + 1) for i in range(n - 1))
    return run_axiom("merging-splitting", rule, cases, None)


def check_budget_linearity(rule: RuleSpec, sample: Sequence[Problem], seed: int | None = None) -> AxiomReport:
    rng = _rng(seed)
    cases = (({"problem": _redistribution(p), "alpha": _unit(rng, p.exact)}, False) for p in sample)
    return run_axiom("budget-linearity", rule, cases, seed)


def check_continuity_heuristic(
    rule: RuleSpec,
    sample: Sequence[Problem],
    eps=Fraction(1, 10**6),
    lipschitz: float = 100.0,
) -> AxiomReport:
    """Non-conclusive probe: nudges each claim and the budget by +/-eps and
    flags award jumps larger than ``lipschitz * eps``."""

    def cases():
        for p in sample:
            step = eps if p.exact else float(eps)
            bound = Fraction(lipschitz) if p.exact else float(lipschitz)
            for coord in range(p.n + 1):
                for sign in (1, -1):
                    yield {"problem": p, "coord": coord, "delta": sign * step, "bound": bound}, False

    report = run_axiom("continuity", rule, cases(), None, minimize=False)
    report.notes.append(f"heuristic: Lipschitz budget {lipschitz}, eps {format_quantity(eps)}")
    return report


def check_axiom(name: str, rule: RuleSpec, seed: int = 7, samples: int = 500, config: SampleConfig | None = None):
    """Run one named axiom with the default sampling setup."""
    if name not in AXIOMS:
        raise KeyError(name)
    config = config or SampleConfig()
    sample = sample_problems(seed, samples, config)
    if name == "scale-invariance":
        return check_scale_invariance(rule, sample, seed)
    if name == "budget-additivity":
        return check_budget_additivity(rule, sample, seed)
    if name == "upstream-invariance":
        return check_upstream_invariance(rule, sample, seed)
    if name == "equal-single-polluters":
        return check_equal_single_polluters(rule)
    if name == "top-consistency":
        return check_top_consistency(rule, sample, seed)
    if name == "equal-claims":
        return check_equal_treatment_equal_claims(rule, sample, seed)
    if name == "additivity":
        return check_additivity(rule, sample, seed)
    if name == "merging-splitting":
        return check_merging_splitting(rule)
    if name == "budget-linearity":
        return check_budget_linearity(rule, sample, seed)
    return check_continuity_heuristic(rule, sample)


def axiom_matrix(
    rules: Sequence[RuleSpec],
    seed: int = 7,
    samples: int = 500,
    axioms: Sequence[str] = DEFAULT_AXIOMS,
    config: SampleConfig | None = None,
) -> dict[str, dict[str, AxiomReport]]:
    """Run every axiom against every rule: ``{rule name: {axiom: report}}``."""
    return {rule.name: {a: check_axiom(a, rule, seed, samples, config) for a in axioms} for rule in rules}


def render_matrix(matrix: dict[str, dict[str, AxiomReport]]) -> str:
    rules = list(matrix)
    axioms = list(next(iter(matrix.values()))) if matrix else []
    width = max([len(a) for a in axioms] + [5])
    cols = [max(len(r), 1) for r in rules]
    lines = ["axiom".ljust(width) + "  " + "  ".join(r.rjust(w) for r, w in zip(rules, cols))]
    for a in axioms:
        marks = [matrix[r][a].mark.rjust(w) for r, w in zip(rules, cols)]
        lines.append(a.ljust(width) + "  " + "  ".join(marks))
    return "\n".join(lines) + "\n"
