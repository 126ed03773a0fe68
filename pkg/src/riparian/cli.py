"""Command-line front end.

Exit codes: 0 success, 1 reproduction mismatch or axiom violation,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import datasets
from .analysis import (
    BISECT_TOL,
    argmax_gamma_per_agent,
    min_gamma_claims_bounded,
    min_lambda_claims_bounded,
    round_half_up,
    sweep_gamma,
)
from .axioms import AXIOMS, DEFAULT_AXIOMS, check_axiom, check_equal_single_polluters
from .basin import basin_from_json, basin_geometric
from .core import Problem, ValidationError, format_quantity, to_quantity, validate_problem
from .reproduce import TARGETS, reproduce
from .rules import averaging, full_transfer, generalized_geometric, geometric, parse_gamma_function, parse_rule_spec, proportional

DEFAULT_SEED = 7


class UsageError(Exception):
    pass


def read_claims_file(path: str | Path) -> tuple[list[str], list[str]]:
    """Read an ``agent,claim`` CSV (upstream first); returns ids and raw claims."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read claims file {path}: {exc.strerror}") from exc
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows or [c.strip().lower() for c in rows[0]] != ["agent", "claim"]:
        raise ValidationError("claims file must start with the header 'agent,claim'")
    body = rows[1:]
    if not body:
        raise ValidationError("claims file has no rows")
    agents, claims = [], []
    for line, row in enumerate(body, start=2):
        if len(row) != 2:
            raise ValidationError(f"claims file line {line}: expected 2 columns")
        agent, claim = row[0].strip(), row[1].strip()
        try:
            value = to_quantity(claim, exact=True)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"claims file line {line}: {claim!r} is not a decimal") from None
        if value < 0:
            raise ValidationError(f"claims file line {line}: claim {claim} is negative")
        agents.append(agent)
        claims.append(claim)
    if len(set(agents)) != len(agents):
        raise ValidationError("claims file has duplicate agent ids")
    return agents, claims


def _load_problem(args) -> tuple[list[str], Problem]:
    if args.budget is None:
        raise UsageError("--budget is required with --claims")
    agents, claims = read_claims_file(args.claims)
    return agents, validate_problem(claims, args.budget, exact=args.exact)


def _render_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _json_number(value):
    return format_quantity(value) if not isinstance(value, float) else value


def _emit(rows: list[tuple[str, object, object]], fmt: str, exact: bool, meta: dict) -> str:
    """Render (agent, claim, award) rows."""
    if fmt == "json":
        payload = dict(meta)
        payload["exact"] = exact
        payload["agents"] = [{"id": a, "claim": _json_number(c), "award": _json_number(x)} for a, c, x in rows]
        return _render_json(payload)
    if fmt == "csv":
        lines = ["agent,claim,award"] + [f"{a},{format_quantity(c)},{format_quantity(x)}" for a, c, x in rows]
        return "\n".join(lines) + "\n"

    def cell(v):
        return format_quantity(v) if exact else str(round_half_up(v))

    table = [("agent", "claim", "award")] + [(a, cell(c), cell(x)) for a, c, x in rows]
    widths = [max(len(r[j]) for r in table) for j in range(3)]
    out = [f"{r[0]:<{widths[0]}}  {r[1]:>{widths[1]}}  {r[2]:>{widths[2]}}" for r in table]
    out.append("awards: " + ", ".join(format_quantity(x) if exact else repr(float(x)) for _, _, x in rows))
    return "\n".join(out) + "\n"


def cmd_allocate(args) -> int:
    if (args.claims is None) == (args.basin is None):
        raise UsageError("give exactly one of --claims or --basin")
    rule = args.rule
    if args.gamma is not None and rule != "geometric":
        raise UsageError("--gamma only applies to --rule geometric")
    if args.lam is not None and rule != "averaging":
        raise UsageError("--lambda only applies to --rule averaging")
    if args.gamma_fn is not None and rule != "gengeo":
        raise UsageError("--gamma-fn only applies to --rule gengeo")

    if args.basin is not None:
        if rule != "geometric":
            raise UsageError("basin files support --rule geometric only")
        try:
            data = json.loads(Path(args.basin).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read basin file {args.basin}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"basin file is not valid JSON: {exc.msg}") from exc
        g = basin_from_json(data, exact=args.exact, budget=args.budget)
        res = basin_geometric(g, args.gamma)
        rows = [(v, g.claims[v], res.awards[v]) for v in g.nodes]
        meta = {"rule": "geometric", "gamma": args.gamma, "budget": _json_number(g.budget), "mouths": list(g.mouths)}
        sys.stdout.write(_emit(rows, args.format, g.exact, meta))
        return 0

    agents, p = _load_problem(args)
    if rule == "prop":
        x, param = proportional(p), None
    elif rule == "ft":
        x, param = full_transfer(p), None
    elif rule == "geometric":
        if args.gamma is None:
            raise UsageError("--rule geometric needs --gamma")
        x, param = geometric(p, args.gamma), args.gamma
    elif rule == "averaging":
        if args.lam is None:
            raise UsageError("--rule averaging needs --lambda")
        x, param = averaging(p, args.lam), args.lam
    else:
        if args.gamma_fn is None:
            raise UsageError("--rule gengeo needs --gamma-fn")
        fn = parse_gamma_function(args.gamma_fn, exact=p.exact)
        x, param = generalized_geometric(p, fn), args.gamma_fn
    meta = {"rule": rule, "parameter": param, "budget": _json_number(p.budget)}
    rows = list(zip(agents, p.claims, x.awards))
    sys.stdout.write(_emit(rows, args.format, p.exact, meta))
    return 0


def cmd_sweep(args) -> int:
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    agents, p = _load_problem(args)
    result = sweep_gamma(p, args.points)
    body = result.to_csv(agents) if args.format == "csv" else _render_json(result.to_dict(agents))
    peaks = argmax_gamma_per_agent(p)
    summary = "".join(f"argmax gamma {a}: {g:.4f}\n" for a, g in zip(agents, peaks))
    if args.out:
        try:
            Path(args.out).write_text(body, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from exc
        sys.stdout.write(summary)
    else:
        sys.stdout.write(body)
        sys.stderr.write(summary)
    return 0


def cmd_threshold(args) -> int:
    agents, p = _load_problem(args)
    if args.family == "geometric":
        res = min_gamma_claims_bounded(p, tol=args.tol)
    else:
        res = min_lambda_claims_bounded(p)
    data = res.to_dict(agents)
    if args.format == "json":
        sys.stdout.write(_render_json(data))
        return 0
    lines = [
        f"family: {res.family}",
        f"minimum parameter: {float(res.value):.6f}",
        f"binding agent: {data['binding_agent'] if data['binding_agent'] is not None else '-'}",
        "feasible intervals: " + ", ".join(f"[{a:.3f}, {b:.3f}]" for a, b in res.intervals),
        f"single interval: {'yes' if res.single_interval else 'no'}",
        f"method: {res.method}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_axioms(args) -> int:
    try:
        rule = parse_rule_spec(args.rule)
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc
    if args.all:
        names = list(DEFAULT_AXIOMS)
    elif args.axiom:
        if args.axiom not in AXIOMS:
            raise UsageError(f"unknown axiom {args.axiom!r}; available: {', '.join(AXIOMS)}")
        names = [args.axiom]
    else:
        raise UsageError("give --axiom NAME or --all")
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("RIPARIAN_SEED", DEFAULT_SEED))
    reports = []
    for name in names:
        if name == "equal-single-polluters" and args.extended:
            reports.append(check_equal_single_polluters(rule, extended=True))
        else:
            reports.append(check_axiom(name, rule, seed=seed, samples=args.samples))
    if args.format == "json":
        sys.stdout.write(_render_json([r.to_dict() for r in reports]))
    else:
        for r in reports:
            line = f"{r.axiom:<24} {r.verdict:<20} n={r.sample_size}"
            if r.skipped:
                line += f" skipped={r.skipped}"
            if r.counterexample:
                cx = r.counterexample
                line += f"  case={json.dumps(cx['case'])} lhs={cx['lhs']} rhs={cx['rhs']}"
            sys.stdout.write(line + "\n")
    return 0 if all(r.satisfied for r in reports) else 1


def cmd_reproduce(args) -> int:
    checks = reproduce(args.what, args.out)
    for c in checks:
        sys.stdout.write(c.line() + "\n")
    passed = sum(c.ok for c in checks)
    sys.stdout.write(f"{passed}/{len(checks)} checks passed\n")
    return 0 if passed == len(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riparian", description="River pollution permit allocation")
    parser.add_argument("--dump-data", metavar="DIR", help="write the embedded datasets to DIR and exit")
    sub = parser.add_subparsers(dest="command")

    def problem_args(p, budget_required=True):
        p.add_argument("--claims", metavar="FILE", help="CSV with header agent,claim (upstream first)")
        p.add_argument("--budget", help="budget E (decimal or fraction)")
        p.add_argument("--exact", action="store_true", help="exact rational arithmetic")

    p = sub.add_parser("allocate", help="compute one allocation")
    problem_args(p)
    p.add_argument("--basin", metavar="FILE", help="basin JSON file")
    p.add_argument("--rule", required=True, choices=["prop", "ft", "geometric", "averaging", "gengeo"])
    p.add_argument("--gamma")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--gamma-fn", help="linear:G | cap:A | pwl:t0:y0,t1:y1,...")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("sweep", help="geometric award paths over a gamma grid")
    problem_args(p)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="minimal parameter guaranteeing claims-boundedness")
    problem_args(p)
    p.add_argument("--family", choices=["geometric", "averaging"], required=True)
    p.add_argument("--tol", type=float, default=BISECT_TOL)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("axioms", help="check axioms on random samples")
    p.add_argument("--rule", required=True, help="prop | ft | geometric:G | averaging:L | gengeo:SPEC")
    p.add_argument("--axiom")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--extended", action="store_true", help="include the mouth in equal-single-polluters")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("reproduce", help="regenerate published values and diff them")
    p.add_argument("--what", choices=[*TARGETS, "all"], default="all")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_data:
        for path in datasets.dump_data(args.dump_data):
            sys.stdout.write(f"{path}\n")
        if args.command is None:
            return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"riparian: error: {exc}\n")
        return 2
    except ValidationError as exc:
        sys.stderr.write(f"riparian: invalid input: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
