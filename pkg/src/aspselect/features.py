"""Ten-dimensional feature vector of a ground program.

Five atom ratios (fact share, positive/negative body occurrences over
rules and over all body occurrences) and five rule-type ratios
(constraints, weak constraints, standard, choice, weight rules), all
computed in one linear pass.  Key names and the record layout emitted by
the CLI are documented in docs/features.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groundfmt import GroundProgram, RuleKind, RuleStatement


class EmptyProgramError(ValueError):
    """Raised for programs with zero rules; ratios are undefined."""


@dataclass(frozen=True)
class RawCounts:
    facts: int                 # facts + always-true atoms
    rules: int                 # total ground rules (minimize lines included)
    pos_occurrences: int       # positive body-atom occurrences
    neg_occurrences: int       # negative body-atom occurrences
    body_occurrences: int      # pos_occurrences + neg_occurrences
    constraints: int           # basic rules whose head is forced false
    weak_constraints: int      # minimize statements
    standard_rules: int        # basic (non-constraint) + cardinality rules
    choice_rules: int
    weight_rules: int
    disjunctive_rules: int     # bookkeeping so the rule categories partition


def _classify(rule: RuleStatement, forced_false: frozenset[int]) -> str:
    """Category of one rule; isolated so the cardinality choice can be flipped."""
    if rule.kind is RuleKind.MINIMIZE:
        return "weak"
    if rule.kind is RuleKind.BASIC:
        if rule.heads[0] in forced_false:
            return "constraint"
        return "standard"
    if rule.kind is RuleKind.CARDINALITY:
        # cardinality bounds carry no weights; counted with standard rules
        return "standard"
    if rule.kind is RuleKind.CHOICE:
        return "choice"
    if rule.kind is RuleKind.WEIGHT:
        return "weight"
    return "disjunctive"


def count_program(p: GroundProgram) -> RawCounts:
    facts = len(p.compute_true)
    pos = neg = 0
    cat = {"constraint": 0, "weak": 0, "standard": 0, "choice": 0,
           "weight": 0, "disjunctive": 0}
    for rule in p.rules:
        pos += len(rule.pos_body)
        neg += len(rule.neg_body)
        c = _classify(rule, p.compute_false)
        cat[c] += 1
        if c == "standard" and rule.kind is RuleKind.BASIC and not rule.pos_body \
                and not rule.neg_body:
            facts += 1
    return RawCounts(
        facts=facts,
        rules=len(p.rules),
        pos_occurrences=pos,
        neg_occurrences=neg,
        body_occurrences=pos + neg,
        constraints=cat["constraint"],
        weak_constraints=cat["weak"],
        standard_rules=cat["standard"],
        choice_rules=cat["choice"],
        weight_rules=cat["weight"],
        disjunctive_rules=cat["disjunctive"],
    )


FEATURE_NAMES = (
    "fact_ratio",
    "pos_body_ratio",
    "neg_body_ratio",
    "pos_body_share",
    "neg_body_share",
    "constraint_ratio",
    "weak_constraint_ratio",
    "standard_rule_ratio",
    "choice_rule_ratio",
    "weight_rule_ratio",
)


@dataclass(frozen=True)
class FeatureVector:
    fact_ratio: float            # facts / rules
    pos_body_ratio: float        # positive occurrences / rules
    neg_body_ratio: float        # negative occurrences / rules
    pos_body_share: float        # positive occurrences / body occurrences
    neg_body_share: float        # negative occurrences / body occurrences
    constraint_ratio: float
    weak_constraint_ratio: float
    standard_rule_ratio: float
    choice_rule_ratio: float
    weight_rule_ratio: float
    counts: RawCounts

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    def as_record(self) -> dict[str, float | int]:
        rec: dict[str, float | int] = {n: getattr(self, n) for n in FEATURE_NAMES}
        rec.update(
            facts=self.counts.facts,
            rules=self.counts.rules,
            pos_occurrences=self.counts.pos_occurrences,
            neg_occurrences=self.counts.neg_occurrences,
            body_occurrences=self.counts.body_occurrences,
            constraints=self.counts.constraints,
            weak_constraints=self.counts.weak_constraints,
            standard_rules=self.counts.standard_rules,
            choice_rules=self.counts.choice_rules,
            weight_rules=self.counts.weight_rules,
            disjunctive_rules=self.counts.disjunctive_rules,
        )
        return rec


def compute_features(counts: RawCounts) -> FeatureVector:
    if counts.rules == 0:
        raise EmptyProgramError("program has no rules; features are undefined")
    r = Fraction(counts.rules)
    ba = counts.body_occurrences
    # exact quotients, converted once; BA = 0 maps the two shares to 0
    pos_share = Fraction(counts.pos_occurrences, ba) if ba else Fraction(0)
    neg_share = Fraction(counts.neg_occurrences, ba) if ba else Fraction(0)
    return FeatureVector(
        fact_ratio=float(counts.facts / r),
        pos_body_ratio=float(counts.pos_occurrences / r),
        neg_body_ratio=float(counts.neg_occurrences / r),
        pos_body_share=float(pos_share),
        neg_body_share=float(neg_share),
        constraint_ratio=float(counts.constraints / r),
        weak_constraint_ratio=float(counts.weak_constraints / r),
        standard_rule_ratio=float(counts.standard_rules / r),
        choice_rule_ratio=float(counts.choice_rules / r),
        weight_rule_ratio=float(counts.weight_rules / r),
        counts=counts,
    )


def extract_features(p: GroundProgram) -> FeatureVector:
    return compute_features(count_program(p))
