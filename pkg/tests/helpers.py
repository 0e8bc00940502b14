"""Shared fixtures, random program generators, and independent oracles.

The oracles here deliberately avoid the library's own code paths: the
count oracle re-reads the serialized document token by token, and the
stable-model oracle enumerates all interpretations against the reduct
definition.
"""

from __future__ import annotations

import random
from itertools import chain, combinations

from aspselect.groundfmt import GroundProgram, RuleKind, RuleStatement


def five_rule_fixture() -> GroundProgram:
    """fact a; choice {b} :- a; c :- not b; forbidden x :- c; minimize {c}."""
    a, b, c, x = 1, 2, 3, 4
    rules = (
        RuleStatement(RuleKind.BASIC, heads=(a,)),
        RuleStatement(RuleKind.CHOICE, heads=(b,), pos_body=(a,)),
        RuleStatement(RuleKind.BASIC, heads=(c,), neg_body=(b,)),
        RuleStatement(RuleKind.BASIC, heads=(x,), pos_body=(c,)),
        RuleStatement(RuleKind.MINIMIZE, heads=(), pos_body=(c,), weights=(1,)),
    )
    return GroundProgram(rules=rules,
                         symbols={a: "a", b: "b", c: "c"},
                         compute_false=frozenset({x}))


def random_rule(rng: random.Random, n_atoms: int,
                kinds=tuple(RuleKind)) -> RuleStatement:
    kind = rng.choice(kinds)
    atoms = list(range(1, n_atoms + 1))
    body_size = rng.randint(0, min(4, n_atoms))
    body = rng.sample(atoms, body_size)
    n_neg = rng.randint(0, body_size)
    neg, pos = tuple(body[:n_neg]), tuple(body[n_neg:])
    if kind in (RuleKind.CHOICE, RuleKind.DISJUNCTIVE):
        heads = tuple(rng.sample(atoms, rng.randint(1, min(3, n_atoms))))
    elif kind is RuleKind.MINIMIZE:
        heads = ()
    else:
        heads = (rng.choice(atoms),)
    weights = ()
    bound = 0
    if kind in (RuleKind.WEIGHT, RuleKind.MINIMIZE):
        weights = tuple(rng.randint(0, 5) for _ in body)
    if kind in (RuleKind.WEIGHT, RuleKind.CARDINALITY):
        cap = sum(weights) if kind is RuleKind.WEIGHT else body_size
        bound = rng.randint(0, max(cap, 1))
    return RuleStatement(kind=kind, heads=heads, neg_body=neg, pos_body=pos,
                         bound=bound, weights=weights)


def random_program(rng: random.Random, max_rules: int = 12,
                   max_atoms: int = 8, kinds=tuple(RuleKind)) -> GroundProgram:
    n_atoms = rng.randint(1, max_atoms)
    rules = tuple(random_rule(rng, n_atoms, kinds)
                  for _ in range(rng.randint(1, max_rules)))
    atoms = list(range(1, n_atoms + 1))
    extra = rng.sample(atoms, rng.randint(0, min(3, n_atoms)))
    true = frozenset(a for a in extra if rng.random() < 0.5)
    false = frozenset(a for a in extra if a not in true and rng.random() < 0.7)
    symbols = {a: f"p{a}" for a in atoms if rng.random() < 0.6}
    return GroundProgram(rules=rules, symbols=symbols, compute_true=true,
                         compute_false=false, models=rng.randint(0, 2))


# --- independent count oracle (token level, straight off the grammar) ------

def oracle_counts(document: str) -> dict[str, int]:
    lines = iter(document.splitlines())
    rule_lines = []
    for line in lines:
        if line.split() == ["0"]:
            break
        rule_lines.append([int(t) for t in line.split()])
    for line in lines:  # symbol table
        if line.split() == ["0"]:
            break
    assert next(lines).strip() == "B+"
    bplus = set()
    for line in lines:
        if line.split() == ["0"]:
            break
        bplus.update(int(t) for t in line.split())
    assert next(lines).strip() == "B-"
    bminus = set()
    for line in lines:
        if line.split() == ["0"]:
            break
        bminus.update(int(t) for t in line.split())

    counts = dict(facts=len(bplus), rules=len(rule_lines), pos=0, neg=0,
                  constraints=0, weak=0, standard=0, choice=0, weight=0,
                  disjunctive=0)
    for toks in rule_lines:
        code = toks[0]
        if code == 1:
            head, nlits, nneg = toks[1], toks[2], toks[3]
            counts["neg"] += nneg
            counts["pos"] += nlits - nneg
            if head in bminus:
                counts["constraints"] += 1
            else:
                counts["standard"] += 1
                if nlits == 0:
                    counts["facts"] += 1
        elif code == 2:
            nlits, nneg = toks[2], toks[3]
            counts["neg"] += nneg
            counts["pos"] += nlits - nneg
            counts["standard"] += 1
        elif code in (3, 8):
            nheads = toks[1]
            nlits, nneg = toks[2 + nheads], toks[3 + nheads]
            counts["neg"] += nneg
            counts["pos"] += nlits - nneg
            counts["choice" if code == 3 else "disjunctive"] += 1
        elif code == 5:
            nlits, nneg = toks[3], toks[4]
            counts["neg"] += nneg
            counts["pos"] += nlits - nneg
            counts["weight"] += 1
        elif code == 6:
            nlits, nneg = toks[2], toks[3]
            counts["neg"] += nneg
            counts["pos"] += nlits - nneg
            counts["weak"] += 1
        else:
            raise AssertionError(f"oracle hit unknown code {code}")
    return counts


# --- independent stable-model oracle (reduct definition) -------------------

def _subsets(atoms):
    return chain.from_iterable(combinations(atoms, r)
                               for r in range(len(atoms) + 1))


def _reduct_closure(program: GroundProgram, candidate: frozenset[int]) -> frozenset[int]:
    """Least model of the reduct w.r.t. the candidate interpretation.

    Only Basic, Cardinality and Weight statements are supported (the
    solver-free fragment); negative literals are evaluated against the
    candidate, leaving a monotone positive program."""
    derived: set[int] = set()
    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            if rule.kind is RuleKind.MINIMIZE:
                continue
            head = rule.heads[0]
            if head in derived:
                continue
            if rule.kind is RuleKind.BASIC:
                ok = all(a not in candidate for a in rule.neg_body) and \
                    all(a in derived for a in rule.pos_body)
            else:
                if rule.kind is RuleKind.CARDINALITY:
                    weights = [1] * (len(rule.neg_body) + len(rule.pos_body))
                else:
                    weights = list(rule.weights)
                total = sum(w for a, w in zip(rule.neg_body, weights)
                            if a not in candidate)
                total += sum(w for a, w in
                             zip(rule.pos_body, weights[len(rule.neg_body):])
                             if a in derived)
                ok = total >= rule.bound
            if ok:
                derived.add(head)
                changed = True
    return frozenset(derived)


def enumerate_stable_models(program: GroundProgram) -> list[frozenset[int]]:
    atoms = sorted(program.atoms())
    models = []
    for subset in _subsets(atoms):
        candidate = frozenset(subset)
        if _reduct_closure(program, candidate) != candidate:
            continue
        if not program.compute_true <= candidate:
            continue
        if candidate & program.compute_false:
            continue
        models.append(candidate)
    return models
