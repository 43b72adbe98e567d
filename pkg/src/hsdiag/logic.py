"""Propositional logic core: formula ASTs, parsing, CNF conversion, and a
complete DPLL satisfiability procedure.

This is the theorem prover behind conflict detection. It is deliberately
small and deterministic: atom numbering, clause emission order and the DPLL
branching rule are all fixed, so identical inputs always take identical
decision paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

_ATOM_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ParseError(ValueError):
    """Malformed formula text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class Formula:
    """Base class of formula nodes. Instances are immutable and compare
    structurally, which makes them usable as set members."""

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not _ATOM_NAME.match(self.name):
            raise ValueError(f"invalid atom name: {self.name!r}")


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


TRUE = Const(True)
FALSE = Const(False)


# ---------------------------------------------------------------------------
# Parsing
#
# Grammar (tightest first): !  &  |  ->  <->
# `->` and `<->` associate to the right, `&` and `|` to the left.

_TOKEN = re.compile(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><->|->|[!&|()])|(?P<ws>\s+)")


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", line, col)
        lexeme = m.group(0)
        if m.lastgroup != "ws":
            kind = "name" if m.lastgroup == "name" else lexeme
            tokens.append((kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        _, _, line, col = self.peek()
        return ParseError(message, line, col)

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def iff(self) -> Formula:
        lhs = self.imp()
        if self.peek()[0] == "<->":
            self.take()
            return Iff(lhs, self.iff())
        return lhs

    def imp(self) -> Formula:
        lhs = self.disj()
        if self.peek()[0] == "->":
            self.take()
            return Implies(lhs, self.imp())
        return lhs

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, lexeme, _, _ = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind == "(":
            self.take()
            f = self.iff()
            if self.peek()[0] != ")":
                raise self.error("expected ')'")
            self.take()
            return f
        if kind == "name":
            self.take()
            if lexeme == "true":
                return TRUE
            if lexeme == "false":
                return FALSE
            return Atom(lexeme)
        raise self.error(f"expected a formula, found {lexeme or 'end of input'!r}")


def parse_formula(text: str) -> Formula:
    """Parse a formula from text. Raises ParseError with line/column."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing (inverse of the parser up to structural equality)

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6, Const: 6}


def format_formula(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f: Formula, floor: int) -> str:
    prec = _PREC[type(f)]
    if isinstance(f, Const):
        s = "true" if f.value else "false"
    elif isinstance(f, Atom):
        s = f.name
    elif isinstance(f, Not):
        s = "!" + _fmt(f.operand, 5)
    elif isinstance(f, And):
        s = f"{_fmt(f.lhs, 4)} & {_fmt(f.rhs, 5)}"
    elif isinstance(f, Or):
        s = f"{_fmt(f.lhs, 3)} | {_fmt(f.rhs, 4)}"
    elif isinstance(f, Implies):
        s = f"{_fmt(f.lhs, 3)} -> {_fmt(f.rhs, 2)}"
    elif isinstance(f, Iff):
        s = f"{_fmt(f.lhs, 2)} <-> {_fmt(f.rhs, 1)}"
    else:  # pragma: no cover
        raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if prec < floor else s


# ---------------------------------------------------------------------------
# CNF conversion (definitional / auxiliary-atom style)


@dataclass
class ClauseSet:
    """Clauses over integer literals. Variables 1..len(atom_ids) name the
    original atoms (sorted); higher ids are auxiliary definition atoms."""

    clauses: tuple[frozenset[int], ...]
    atom_ids: dict[str, int]
    var_count: int


def _fold_constants(f: Formula) -> Formula:
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, Not):
        a = _fold_constants(f.operand)
        if isinstance(a, Const):
            return Const(not a.value)
        return Not(a)
    a = _fold_constants(f.lhs)
    b = _fold_constants(f.rhs)
    if isinstance(f, And):
        if isinstance(a, Const):
            return b if a.value else FALSE
        if isinstance(b, Const):
            return a if b.value else FALSE
        return And(a, b)
    if isinstance(f, Or):
        if isinstance(a, Const):
            return TRUE if a.value else b
        if isinstance(b, Const):
            return TRUE if b.value else a
        return Or(a, b)
    if isinstance(f, Implies):
        if isinstance(a, Const):
            return b if a.value else TRUE
        if isinstance(b, Const):
            return TRUE if b.value else _fold_constants(Not(a))
        return Implies(a, b)
    if isinstance(f, Iff):
        if isinstance(a, Const):
            return b if a.value else _fold_constants(Not(b))
        if isinstance(b, Const):
            return a if b.value else _fold_constants(Not(a))
        return Iff(a, b)
    raise TypeError(f"not a formula: {f!r}")  # pragma: no cover


class _Encoder:
    def __init__(self, atom_ids: dict[str, int]):
        self.atom_ids = atom_ids
        self.next_var = len(atom_ids) + 1
        self.cache: dict[Formula, int] = {}
        self.clauses: list[frozenset[int]] = []
        self.seen: set[frozenset[int]] = set()

    def add(self, lits: Iterable[int]) -> None:
        clause = frozenset(lits)
        if any(-l in clause for l in clause):
            return  # tautology, dropped
        if clause not in self.seen:
            self.seen.add(clause)
            self.clauses.append(clause)

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def lit(self, f: Formula) -> int:
        if f in self.cache:
            return self.cache[f]
        if isinstance(f, Atom):
            out = self.atom_ids[f.name]
        elif isinstance(f, Not):
            out = -self.lit(f.operand)
        else:
            a = self.lit(f.lhs)
            b = self.lit(f.rhs)
            v = self.fresh()
            if isinstance(f, And):
                self.add((-v, a))
                self.add((-v, b))
                self.add((v, -a, -b))
            elif isinstance(f, Or):
                self.add((-v, a, b))
                self.add((v, -a))
                self.add((v, -b))
            elif isinstance(f, Implies):
                self.add((-v, -a, b))
                self.add((v, a))
                self.add((v, -b))
            elif isinstance(f, Iff):
                self.add((-v, -a, b))
                self.add((-v, a, -b))
                self.add((v, a, b))
                self.add((v, -a, -b))
            else:  # pragma: no cover
                raise TypeError(f"not a formula: {f!r}")
            out = v
        self.cache[f] = out
        return out


def _collect_atoms(f: Formula, into: set[str]) -> None:
    if isinstance(f, Atom):
        into.add(f.name)
    elif isinstance(f, Not):
        _collect_atoms(f.operand, into)
    elif isinstance(f, (And, Or, Implies, Iff)):
        _collect_atoms(f.lhs, into)
        _collect_atoms(f.rhs, into)


def to_clause_set(formulas: Iterable[Formula]) -> ClauseSet:
    """Satisfiability-preserving conversion of a formula set to clauses.

    Uses definitional translation: each compound subformula gets an
    auxiliary atom defined by a biconditional, so the result grows linearly
    and its models, restricted to the original atoms, are exactly the models
    of the input.
    """
    ordered = sorted(set(formulas), key=format_formula)
    names: set[str] = set()
    for f in ordered:
        _collect_atoms(f, names)
    atom_ids = {name: i + 1 for i, name in enumerate(sorted(names))}
    enc = _Encoder(atom_ids)
    for f in ordered:
        folded = _fold_constants(f)
        if isinstance(folded, Const):
            if not folded.value:
                enc.clauses.append(frozenset())
            continue
        enc.add((enc.lit(folded),))
    return ClauseSet(tuple(enc.clauses), atom_ids, enc.next_var - 1)


# ---------------------------------------------------------------------------
# Satisfiability (DPLL: unit propagation + chronological backtracking)


def _propagate(clauses: list[frozenset[int]]) -> list[frozenset[int]] | None:
    """Exhaustive unit propagation. None signals a derived empty clause."""
    current = clauses
    while True:
        unit = None
        for c in current:
            if not c:
                return None
            if len(c) == 1 and unit is None:
                unit = next(iter(c))
        if unit is None:
            return current
        reduced = []
        for c in current:
            if unit in c:
                continue
            if -unit in c:
                c = c - {-unit}
            reduced.append(c)
        current = reduced


def _dpll(clauses: list[frozenset[int]]) -> bool:
    simplified = _propagate(clauses)
    if simplified is None:
        return False
    if not simplified:
        return True
    # Deterministic branching: lowest remaining variable, false first.
    var = min(min(abs(l) for l in c) for c in simplified)
    return _dpll(simplified + [frozenset((-var,))]) or _dpll(simplified + [frozenset((var,))])


def is_satisfiable(cs: ClauseSet) -> bool:
    """True iff some assignment satisfies every clause."""
    return _dpll(list(cs.clauses))


def is_consistent(sentences: Iterable[Formula]) -> bool:
    return is_satisfiable(to_clause_set(sentences))


def entails(sentences: Iterable[Formula], goal: Formula) -> bool:
    """True iff the sentences together with the negated goal are unsatisfiable."""
    return not is_satisfiable(to_clause_set(list(sentences) + [Not(goal)]))
