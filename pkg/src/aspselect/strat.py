"""Preprocessor check: is the ground program solvable without a solver?

Non-disjunctive stratified programs have a unique answer set computable by
fixpoint iteration over strata, so no solver process needs to be spawned.
The check is deliberately conservative (see classify_program).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .groundfmt import GroundProgram, RuleKind, RuleStatement


class NoAnswerSetError(Exception):
    """The compute sections are inconsistent with the unique model."""


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset[int]
    pos_edges: frozenset[tuple[int, int]]  # (head, body atom)
    neg_edges: frozenset[tuple[int, int]]


class Classification(enum.Enum):
    SOLVER_FREE = "solver-free"
    NEEDS_SOLVER = "needs-solver"


def build_dependency_graph(p: GroundProgram) -> DependencyGraph:
    nodes: set[int] = set()
    pos: set[tuple[int, int]] = set()
    neg: set[tuple[int, int]] = set()
    for rule in p.rules:
        nodes.update(rule.heads)
        nodes.update(rule.pos_body)
        nodes.update(rule.neg_body)
        if rule.kind is RuleKind.MINIMIZE:
            continue
        for h in rule.heads:
            for b in rule.pos_body:
                pos.add((h, b))
            for b in rule.neg_body:
                neg.add((h, b))
    return DependencyGraph(frozenset(nodes), frozenset(pos), frozenset(neg))


def _sccs(nodes: frozenset[int], edges: dict[int, list[int]]) -> list[list[int]]:
    """Tarjan, iterative; components come out in reverse topological order
    of the body -> head direction, i.e. dependencies first after reversal."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            succs = edges.get(node, [])
            advanced = False
            while ei < len(succs):
                nxt = succs[ei]
                ei += 1
                if nxt not in index:
                    work[-1] = (node, ei)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            else:
                continue
    return out


def _condensation(graph: DependencyGraph) -> tuple[dict[int, int], list[list[int]]]:
    """Atom -> component id, components listed dependencies-first."""
    succ: dict[int, list[int]] = {}
    for h, b in graph.pos_edges | graph.neg_edges:
        succ.setdefault(b, []).append(h)  # body feeds head
    comps = _sccs(graph.nodes, succ)
    # Tarjan on body->head edges emits components in reverse topological
    # order, so heads pop first; reverse to process dependencies first.
    comps.reverse()
    comp_of = {a: i for i, comp in enumerate(comps) for a in comp}
    return comp_of, comps


def _head_on_cycle(head: int, comp_of: dict[int, int], comps: list[list[int]],
                   self_loops: set[int]) -> bool:
    return len(comps[comp_of[head]]) > 1 or head in self_loops


def classify_program(p: GroundProgram) -> Classification:
    """SOLVER_FREE iff no choice/disjunctive/minimize statement, no
    cardinality/weight head on a dependency cycle, and no negative edge
    inside a strongly connected component."""
    for rule in p.rules:
        if rule.kind in (RuleKind.CHOICE, RuleKind.DISJUNCTIVE, RuleKind.MINIMIZE):
            return Classification.NEEDS_SOLVER

    graph = build_dependency_graph(p)
    comp_of, comps = _condensation(graph)
    self_loops = {h for h, b in graph.pos_edges | graph.neg_edges if h == b}

    for rule in p.rules:
        if rule.kind in (RuleKind.CARDINALITY, RuleKind.WEIGHT):
            if _head_on_cycle(rule.heads[0], comp_of, comps, self_loops):
                return Classification.NEEDS_SOLVER
    for h, b in graph.neg_edges:
        if comp_of[h] == comp_of[b]:
            return Classification.NEEDS_SOLVER
    return Classification.SOLVER_FREE


def _fires(rule: RuleStatement, true_atoms: set[int]) -> bool:
    if rule.kind is RuleKind.BASIC:
        return all(a in true_atoms for a in rule.pos_body) and \
            not any(a in true_atoms for a in rule.neg_body)
    lits = list(rule.neg_body) + list(rule.pos_body)
    if rule.kind is RuleKind.CARDINALITY:
        weights = [1] * len(lits)
    else:
        weights = list(rule.weights)
    total = 0
    for lit, w in zip(lits[: len(rule.neg_body)], weights[: len(rule.neg_body)]):
        if lit not in true_atoms:
            total += w
    for lit, w in zip(rule.pos_body, weights[len(rule.neg_body):]):
        if lit in true_atoms:
            total += w
    return total >= rule.bound


def evaluate_stratified(p: GroundProgram) -> frozenset[int]:
    """Unique answer set of a SOLVER_FREE program.

    Strata are the SCCs of the dependency graph in topological order;
    each stratum runs to its least fixpoint before the next starts, so
    every negative literal is already settled when consulted.  Raises
    NoAnswerSetError when the result violates a compute section.
    """
    graph = build_dependency_graph(p)
    comp_of, comps = _condensation(graph)

    by_comp: dict[int, list[RuleStatement]] = {}
    for rule in p.rules:
        if rule.kind is RuleKind.MINIMIZE:
            continue
        by_comp.setdefault(comp_of[rule.heads[0]], []).append(rule)

    true_atoms: set[int] = set()
    for ci in range(len(comps)):
        rules = by_comp.get(ci, [])
        changed = True
        while changed:
            changed = False
            for rule in rules:
                head = rule.heads[0]
                if head not in true_atoms and _fires(rule, true_atoms):
                    true_atoms.add(head)
                    changed = True

    if not p.compute_true <= true_atoms:
        missing = sorted(p.compute_true - true_atoms)
        raise NoAnswerSetError(f"required atoms {missing} are not derivable")
    violated = true_atoms & p.compute_false
    if violated:
        raise NoAnswerSetError(f"forbidden atoms {sorted(violated)} were derived")
    return frozenset(true_atoms)
