"""Reader/writer for the numeric ground-program format (smodels/lparse style).

A document is a sequence of rule lines, a ``0`` terminator, the symbol
table, ``0``, the ``B+`` section, ``0``, the ``B-`` section, ``0``, and a
models count.  See docs/format.md for the bit-exact grammar.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Union


class GroundFormatError(ValueError):
    """Malformed numeric ground document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedStatementError(GroundFormatError):
    """Statement type code outside the supported set."""

    def __init__(self, code: int, line: int | None = None):
        self.code = code
        super().__init__(f"unsupported statement type code {code}", line)


class RuleKind(enum.IntEnum):
    BASIC = 1
    CARDINALITY = 2
    CHOICE = 3
    WEIGHT = 5
    MINIMIZE = 6
    DISJUNCTIVE = 8


SUPPORTED_CODES = frozenset(int(k) for k in RuleKind)


@dataclass(frozen=True)
class RuleStatement:
    kind: RuleKind
    heads: tuple[int, ...]
    neg_body: tuple[int, ...] = ()
    pos_body: tuple[int, ...] = ()
    bound: int = 0
    weights: tuple[int, ...] = ()  # aligned with neg_body ++ pos_body


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[RuleStatement, ...]
    symbols: Mapping[int, str] = field(default_factory=dict)
    compute_true: frozenset[int] = frozenset()
    compute_false: frozenset[int] = frozenset()
    models: int = 1

    def atoms(self) -> frozenset[int]:
        """Every atom id referenced anywhere in the program."""
        out: set[int] = set()
        for r in self.rules:
            out.update(r.heads)
            out.update(r.neg_body)
            out.update(r.pos_body)
        out.update(self.compute_true)
        out.update(self.compute_false)
        return frozenset(out)


Source = Union[str, bytes, IO[str], IO[bytes], Iterable[str]]


def _iter_lines(source: Source) -> Iterator[str]:
    if isinstance(source, bytes):
        yield from source.decode("ascii").splitlines()
    elif isinstance(source, str):
        yield from source.splitlines()
    else:
        # file-like or any iterable of lines; lazy, each byte read once
        for raw in source:
            if isinstance(raw, bytes):
                raw = raw.decode("ascii")
            yield raw.rstrip("\r\n")


def _require_unique(atoms: list[int], what: str, line: int) -> tuple[int, ...]:
    if len(set(atoms)) != len(atoms):
        raise GroundFormatError(f"duplicate atom in {what}", line)
    return tuple(atoms)


def _ints(tokens: list[str], line: int) -> list[int]:
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise GroundFormatError(f"non-integer token {tok!r}", line) from None
    return out


def _take(vals: list[int], n: int, line: int, what: str) -> list[int]:
    if len(vals) < n:
        raise GroundFormatError(f"truncated {what} list", line)
    taken, rest = vals[:n], vals[n:]
    del vals[:]
    vals.extend(rest)
    return taken


def _check_atoms(atoms: Iterable[int], what: str, line: int) -> None:
    for a in atoms:
        if a < 1:
            raise GroundFormatError(f"atom id {a} in {what} must be >= 1", line)


def _parse_rule_line(vals: list[int], line: int) -> RuleStatement:
    code = vals.pop(0)
    if code not in SUPPORTED_CODES:
        raise UnsupportedStatementError(code, line)
    kind = RuleKind(code)

    if kind in (RuleKind.CHOICE, RuleKind.DISJUNCTIVE):
        (nheads,) = _take(vals, 1, line, "head count")
        if nheads < 1:
            raise GroundFormatError(f"{kind.name} rule needs >= 1 head", line)
        heads = _take(vals, nheads, line, "head")
    elif kind is RuleKind.MINIMIZE:
        (zero,) = _take(vals, 1, line, "minimize header")
        if zero != 0:
            raise GroundFormatError("minimize line must start '6 0'", line)
        heads = []
    else:
        heads = _take(vals, 1, line, "head")

    bound = 0
    if kind is RuleKind.CARDINALITY:
        nlits, nneg, bound = _take(vals, 3, line, "cardinality header")
    elif kind is RuleKind.WEIGHT:
        bound, nlits, nneg = _take(vals, 3, line, "weight header")
    else:
        nlits, nneg = _take(vals, 2, line, "body header")

    if nlits < 0 or nneg < 0 or nneg > nlits:
        raise GroundFormatError(
            f"bad body sizes (#lits={nlits}, #neg={nneg})", line
        )
    if bound < 0:
        raise GroundFormatError(f"negative bound {bound}", line)

    neg = _take(vals, nneg, line, "negative body")
    pos = _take(vals, nlits - nneg, line, "positive body")
    weights: tuple[int, ...] = ()
    if kind in (RuleKind.WEIGHT, RuleKind.MINIMIZE):
        wlist = _take(vals, nlits, line, "weight")
        for w in wlist:
            if w < 0:
                raise GroundFormatError(f"negative weight {w}", line)
        weights = tuple(wlist)
    if vals:
        raise GroundFormatError(f"{len(vals)} trailing token(s) on rule line", line)

    _check_atoms(heads, "head", line)
    _check_atoms(neg, "negative body", line)
    _check_atoms(pos, "positive body", line)
    return RuleStatement(
        kind=kind,
        heads=tuple(heads),
        neg_body=_require_unique(neg, "negative body", line),
        pos_body=_require_unique(pos, "positive body", line),
        bound=bound,
        weights=weights,
    )


def parse_ground_program(source: Source) -> GroundProgram:
    """Single-pass parse of a complete numeric ground document."""
    lines = _iter_lines(source)
    lineno = 0

    def next_tokens() -> list[str]:
        nonlocal lineno
        for raw in lines:
            lineno += 1
            tokens = raw.split()
            if tokens:
                return tokens
        raise GroundFormatError("unexpected end of input", lineno)

    rules: list[RuleStatement] = []
    while True:
        tokens = next_tokens()
        if tokens == ["0"]:
            break
        rules.append(_parse_rule_line(_ints(tokens, lineno), lineno))

    symbols: dict[int, str] = {}
    while True:
        tokens = next_tokens()
        if tokens == ["0"]:
            break
        if len(tokens) < 2:
            raise GroundFormatError("symbol line needs '<id> <name>'", lineno)
        (atom,) = _ints(tokens[:1], lineno)
        if atom < 1:
            raise GroundFormatError(f"atom id {atom} must be >= 1", lineno)
        if atom in symbols:
            raise GroundFormatError(f"duplicate symbol for atom {atom}", lineno)
        symbols[atom] = " ".join(tokens[1:])

    def compute_section(header: str) -> frozenset[int]:
        tokens = next_tokens()
        if tokens != [header]:
            raise GroundFormatError(f"expected {header!r} section header", lineno)
        atoms: set[int] = set()
        while True:
            tokens = next_tokens()
            if tokens == ["0"]:
                return frozenset(atoms)
            for a in _ints(tokens, lineno):
                if a < 1:
                    raise GroundFormatError(f"atom id {a} must be >= 1", lineno)
                if a in atoms:
                    raise GroundFormatError(f"duplicate atom {a} in {header}", lineno)
                atoms.add(a)

    compute_true = compute_section("B+")
    compute_false = compute_section("B-")
    if compute_true & compute_false:
        overlap = sorted(compute_true & compute_false)
        raise GroundFormatError(f"atoms {overlap} in both B+ and B-", lineno)

    tokens = next_tokens()
    (models,) = _ints(tokens, lineno)
    if len(tokens) != 1 or models < 0:
        raise GroundFormatError("models count must be one nonnegative integer", lineno)

    return GroundProgram(
        rules=tuple(rules),
        symbols=symbols,
        compute_true=compute_true,
        compute_false=compute_false,
        models=models,
    )


def _rule_line(r: RuleStatement) -> str:
    body = list(r.neg_body) + list(r.pos_body)
    parts: list[int] = [int(r.kind)]
    if r.kind in (RuleKind.CHOICE, RuleKind.DISJUNCTIVE):
        parts += [len(r.heads), *r.heads]
    elif r.kind is RuleKind.MINIMIZE:
        parts.append(0)
    else:
        parts.append(r.heads[0])

    if r.kind is RuleKind.CARDINALITY:
        parts += [len(body), len(r.neg_body), r.bound]
    elif r.kind is RuleKind.WEIGHT:
        parts += [r.bound, len(body), len(r.neg_body)]
    else:
        parts += [len(body), len(r.neg_body)]
    parts += body
    if r.kind in (RuleKind.WEIGHT, RuleKind.MINIMIZE):
        parts += list(r.weights)
    return " ".join(str(x) for x in parts)


def write_ground_program(p: GroundProgram) -> str:
    """Emit a normalized document; parse(write(p)) == p."""
    out: list[str] = []
    for r in p.rules:
        out.append(_rule_line(r))
    out.append("0")
    for atom in sorted(p.symbols):
        out.append(f"{atom} {p.symbols[atom]}")
    out.append("0")
    out.append("B+")
    out.extend(str(a) for a in sorted(p.compute_true))
    out.append("0")
    out.append("B-")
    out.extend(str(a) for a in sorted(p.compute_false))
    out.append("0")
    out.append(str(p.models))
    return "\n".join(out) + "\n"
