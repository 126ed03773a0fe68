"""Fair allocation of river-pollution permits among agents along a river."""

from .basin import BasinAllocation, BasinGraph, basin_geometric, linear_to_basin, validate_basin
from .core import Allocation, Problem, ValidationError, is_redistribution, validate_problem
from .rules import (
    CapGamma,
    LinearGamma,
    OpaqueGamma,
    PiecewiseLinearGamma,
    RuleSpec,
    augmented_claims,
    averaging,
    full_transfer,
    generalized_geometric,
    geometric,
    geometric_bubble_oracle,
    parse_rule_spec,
    proportional,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BasinAllocation",
    "BasinGraph",
    "CapGamma",
    "LinearGamma",
    "OpaqueGamma",
    "PiecewiseLinearGamma",
    "Problem",
    "RuleSpec",
    "ValidationError",
    "augmented_claims",
    "averaging",
    "basin_geometric",
    "full_transfer",
    "generalized_geometric",
    "geometric",
    "geometric_bubble_oracle",
    "is_redistribution",
    "linear_to_basin",
    "parse_rule_spec",
    "proportional",
    "validate_basin",
    "validate_problem",
]
