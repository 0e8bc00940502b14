"""Portfolio ASP pipeline: ground-program features, per-instance solver
selection, supervised subprocess runs, and offline evaluation."""

__version__ = "0.1.0"

from .features import FeatureVector, RawCounts, compute_features, count_program
from .groundfmt import (GroundProgram, RuleKind, RuleStatement,
                        parse_ground_program, write_ground_program)
from .selector import SelectionDecision, SolverSpec, select
from .strat import Classification, classify_program, evaluate_stratified

__all__ = [
    "FeatureVector", "RawCounts", "compute_features", "count_program",
    "GroundProgram", "RuleKind", "RuleStatement",
    "parse_ground_program", "write_ground_program",
    "SelectionDecision", "SolverSpec", "select",
    "Classification", "classify_program", "evaluate_stratified",
    "__version__",
]
