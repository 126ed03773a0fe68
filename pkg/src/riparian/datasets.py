"""Embedded case-study data and the published values it should reproduce.

Claims are kept as decimal strings so they can be read exactly or as floats.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from .core import Problem, validate_problem

CITIES = ("Deyang", "Chengdu", "Ziyang", "Neijiang", "Zigong", "Luzhou")
TUOJIANG_BUDGET = "64.3"
TUOJIANG_CLAIMS = ("4.17", "53.98", "2.13", "3.30", "2.48", "15.18")
# Chengdu's claim lowered and the three middle cities equalized, same total.
HAT_CLAIMS = ("4.17", "19.89", "14", "14", "14", "15.18")
# Deyang and Chengdu swapped.
TILDE_CLAIMS = ("53.98", "4.17", "2.13", "3.30", "2.48", "15.18")

TABLE_PARAMS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))

# Printed award columns: geometric gamma = 0, 1/4, 1/2, 3/4, 1 then averaging
# lambda = 0, 1/4, 1/2, 3/4, 1.  One tuple per column, cities in river order.
BASE_TABLE = {
    "geometric": (
        (0, 0, 0, 0, 0, 64.3),
        (0.83, 11.30, 8.90, 7.33, 5.98, 29.97),
        (1.65, 22.19, 11.94, 7.27, 4.62, 16.63),
        (2.48, 32.66, 9.43, 4.32, 2.55, 12.87),
        (3.30, 42.72, 1.69, 2.61, 1.96, 12.01),
    ),
    "averaging": (
        (0, 0, 0, 0, 0, 64.3),
        (0.83, 10.68, 0.42, 0.65, 0.49, 51.23),
        (1.65, 21.36, 0.84, 1.31, 0.98, 38.16),
        (2.48, 32.04, 1.26, 1.96, 1.47, 25.09),
        (3.30, 42.72, 1.69, 2.61, 1.96, 12.01),
    ),
}

HAT_TABLE = {
    "geometric": (
        (0.00, 0.00, 0.00, 0.00, 0.00, 64.30),
        (0.83, 4.55, 6.19, 7.41, 8.33, 37.00),
        (1.65, 8.70, 9.89, 10.48, 10.78, 22.80),
        (2.48, 12.43, 11.42, 11.16, 11.10, 15.72),
        (3.30, 15.74, 11.08, 11.08, 11.08, 12.01),
    ),
    "averaging": (
        (0.00, 0.00, 0.00, 0.00, 0.00, 64.30),
        (0.83, 3.94, 2.77, 2.77, 2.77, 51.23),
        (1.65, 7.87, 5.54, 5.54, 5.54, 38.16),
        (2.48, 11.81, 8.31, 8.31, 8.31, 25.09),
        (3.30, 15.74, 11.08, 11.08, 11.08, 12.01),
    ),
}

TILDE_TABLE = {
    "geometric": (
        (0.00, 0.00, 0.00, 0.00, 0.00, 64.30),
        (10.68, 8.84, 7.05, 5.94, 4.95, 26.85),
        (21.36, 12.33, 7.01, 4.81, 3.39, 15.40),
        (32.04, 10.49, 3.89, 2.93, 2.20, 12.75),
        (42.72, 3.30, 1.69, 2.61, 1.96, 12.01),
    ),
    "averaging": (
        (0.00, 0.00, 0.00, 0.00, 0.00, 64.30),
        (10.68, 0.83, 0.42, 0.65, 0.49, 51.23),
        (21.36, 1.65, 0.84, 1.31, 0.98, 38.16),
        (32.04, 2.48, 1.26, 1.96, 1.47, 25.09),
        (42.72, 3.30, 1.69, 2.61, 1.96, 12.01),
    ),
}

TABLES = {
    "table1": (TUOJIANG_CLAIMS, BASE_TABLE),
    "table4": (HAT_CLAIMS, HAT_TABLE),
    "table5": (TILDE_CLAIMS, TILDE_TABLE),
}

WORKED_CLAIMS = (2, 5, 5, 3)
WORKED_BUDGET = 5
WORKED_GAMMA = Fraction(1, 2)
WORKED_AWARDS = (Fraction(1, 3), Fraction(1), Fraction(4, 3), Fraction(7, 3))

SMALL_EXAMPLES = {
    "small_c": ((2, 2, 2), 4),
    "small_c_hat": ((2, 2, 2, 1), 4),
    "small_c_tilde": ((2, 2, 2, 3), 4),
}

# (problem key, family, printed value)
THRESHOLDS = (
    ("tuojiang", "geometric", 0.989),
    ("tuojiang", "averaging", 0.94),
    ("small_c", "geometric", 0.634),
    ("small_c_hat", "geometric", 0.722),
    ("small_c_tilde", "geometric", 0.217),
    ("hat", "geometric", 0.778),
    ("hat", "averaging", 0.94),
    ("tilde", "geometric", 0.977),
    ("tilde", "averaging", 0.94),
)
GAMMA_TOL = 1e-3
LAMBDA_TOL = 5e-3

# Basin fixtures.  Case (b) uses six claims and case (c) five: the printed
# inputs have one claim too many / too few for the drawn structures.
CASE_A = {
    "nodes": [{"id": str(i), "claim": c} for i, c in enumerate((2, 5, 5, 3), start=1)],
    "edges": [["1", "2"], ["2", "3"], ["3", "4"]],
    "budget": 5,
}
CASE_B = {
    "nodes": [{"id": str(i), "claim": c} for i, c in enumerate((2, 5, 5, 3, 6, 8), start=1)],
    "edges": [["1", "2"], ["1", "3"], ["3", "4"], ["3", "5"], ["5", "6"]],
    "budget": 5,
}
CASE_C = {
    "nodes": [{"id": str(i), "claim": c} for i, c in enumerate((2, 5, 5, 3, 6), start=1)],
    "edges": [["1", "2"], ["1", "3"], ["2", "4"], ["3", "4"], ["4", "5"]],
    "budget": 5,
}
BASINS = {"case_a": CASE_A, "case_b": CASE_B, "case_c": CASE_C}
BASIN_GAMMA = Fraction(1, 2)

F = Fraction
CASE_B_SHARES = (F(1), F(11, 2), F(11, 4), F(35, 8), F(59, 16), F(187, 16))
CASE_B_AWARDS = (F(5, 29), F(55, 58), F(55, 116), F(175, 232), F(295, 464), F(935, 464))
#: Last award as printed; 187/16 * 5/29 is 935/464.
CASE_B_PRINTED_LAST = "935/264"
CASE_C_SHARES = (F(1), F(11, 4), F(11, 4), F(17, 4), F(41, 4))
CASE_C_AWARDS = (F(5, 21), F(55, 84), F(55, 84), F(85, 84), F(205, 84))

#: Expected satisfied (Y) / violated (N) marks per rule family.
FAMILY_MARKS = {
    "geometric": {
        "scale-invariance": "Y",
        "budget-additivity": "Y",
        "equal-single-polluters": "Y",
        "upstream-invariance": "Y",
        "top-consistency": "Y",
        "merging-splitting": "N",
    },
    "averaging": {
        "scale-invariance": "Y",
        "budget-additivity": "Y",
        "equal-single-polluters": "Y",
        "upstream-invariance": "Y",
        "top-consistency": "N",
        "merging-splitting": "Y",
    },
}


def tuojiang(exact: bool = True) -> Problem:
    return validate_problem(TUOJIANG_CLAIMS, TUOJIANG_BUDGET, exact=exact)


def problem(key: str, exact: bool = True) -> Problem:
    """Named problems: ``tuojiang``, ``hat``, ``tilde``, ``example1``, ``small_*``."""
    if key == "tuojiang":
        return tuojiang(exact)
    if key == "hat":
        return validate_problem(HAT_CLAIMS, TUOJIANG_BUDGET, exact=exact)
    if key == "tilde":
        return validate_problem(TILDE_CLAIMS, TUOJIANG_BUDGET, exact=exact)
    if key == "example1":
        return validate_problem(WORKED_CLAIMS, WORKED_BUDGET, exact=exact)
    claims, budget = SMALL_EXAMPLES[key]
    return validate_problem(claims, budget, exact=exact)


def _write_claims(path: Path, agents, claims) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["agent", "claim"])
        for a, c in zip(agents, claims):
            writer.writerow([a, c])


def dump_data(directory: str | Path) -> list[Path]:
    """Write every embedded dataset as a claims CSV or basin JSON file."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, claims in (("tuojiang", TUOJIANG_CLAIMS), ("tuojiang_hat", HAT_CLAIMS), ("tuojiang_tilde", TILDE_CLAIMS)):
        path = out / f"{name}.csv"
        _write_claims(path, CITIES, claims)
        written.append(path)
    path = out / "example1.csv"
    _write_claims(path, [str(i) for i in range(1, 5)], WORKED_CLAIMS)
    written.append(path)
    for name, (claims, _) in SMALL_EXAMPLES.items():
        path = out / f"{name}.csv"
        _write_claims(path, [str(i) for i in range(1, len(claims) + 1)], claims)
        written.append(path)
    for name, data in BASINS.items():
        path = out / f"{name}.json"
        path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written
