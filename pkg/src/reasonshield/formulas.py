"""Propositional formulas over a small universe of named atoms.

Atoms come in two kinds: label facts (morally relevant facts observed in
the environment, e.g. somebody is on the bridge) and action types
(abstract actions a rule can oblige, e.g. rescuing).  Formulas are
immutable trees built from atoms with negation and conjunction;
disjunction is encoded as ``not (and (not a) (not b))``.

The canonical text form is a prefix grammar::

    formula := NAME
             | "(not " formula ")"
             | "(and " formula " " formula ")"

``parse_formula(format_formula(f)) == f`` holds for every formula.

Entailment is decided by exhaustive truth-table enumeration over the
atoms of the query, represented as per-assignment bitmasks (one bit per
truth assignment).  Atom counts in this package are tiny -- a handful of
labels plus a handful of action types -- so the 2^n table is fast and
trivially auditable against an independent enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

MAX_ENTAILMENT_ATOMS = 16


class UnknownAtomError(ValueError):
    """A formula mentions an atom outside the registered universe."""


class EntailmentTooLargeError(RuntimeError):
    """The joint atom set of an entailment query exceeds the table cap."""


class FormulaSyntaxError(ValueError):
    """Text does not conform to the canonical formula grammar."""


class AtomKind(str, Enum):
    LABEL = "label"
    ACTION = "action"


_NAME_FORBIDDEN = set(" \t\n\r()")


def _check_name(name: str) -> str:
    if not name or any(c in _NAME_FORBIDDEN for c in name):
        raise ValueError(f"invalid atom name: {name!r}")
    return name


@dataclass(frozen=True)
class Atom:
    """A named proposition with a fixed kind."""

    name: str
    kind: AtomKind

    def __post_init__(self) -> None:
        _check_name(self.name)


@dataclass(frozen=True)
class Var:
    """Atom occurrence inside a formula (leaf node, holds the name only)."""

    name: str

    def __post_init__(self) -> None:
        _check_name(self.name)


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Not, And]


def conj(parts: Iterable[Formula]) -> Formula:
    """Right-folded conjunction; a single part is returned unchanged."""
    items = list(parts)
    if not items:
        raise ValueError("conjunction over zero formulas")
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(left: Formula, right: Formula) -> Formula:
    """Derived disjunction: not (and (not a) (not b))."""
    return Not(And(Not(left), Not(right)))


def disj_all(parts: Iterable[Formula]) -> Formula:
    items = list(parts)
    if not items:
        raise ValueError("disjunction over zero formulas")
    out = items[-1]
    for f in reversed(items[:-1]):
        out = disj(f, out)
    return out


def formula_atoms(formula: Formula) -> frozenset[str]:
    """Names of all atoms occurring in the formula."""
    out: set[str] = set()
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.sub)
        elif isinstance(node, And):
            stack.append(node.left)
            stack.append(node.right)
        else:
            raise TypeError(f"not a formula node: {node!r}")
    return frozenset(out)


def format_formula(formula: Formula) -> str:
    """Canonical prefix printing; inverse of parse_formula."""
    if isinstance(formula, Var):
        return formula.name
    if isinstance(formula, Not):
        return f"(not {format_formula(formula.sub)})"
    if isinstance(formula, And):
        return f"(and {format_formula(formula.left)} {format_formula(formula.right)})"
    raise TypeError(f"not a formula node: {formula!r}")


def _tokenize(text: str) -> Iterator[str]:
    buf = []
    for ch in text:
        if ch in "()":
            if buf:
                yield "".join(buf)
                buf.clear()
            yield ch
        elif ch.isspace():
            if buf:
                yield "".join(buf)
                buf.clear()
        else:
            buf.append(ch)
    if buf:
        yield "".join(buf)


def parse_formula(text: str) -> Formula:
    """Parse the canonical prefix grammar."""
    tokens = list(_tokenize(text))
    pos = 0

    def parse() -> Formula:
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaSyntaxError(f"unexpected end of input in {text!r}")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise FormulaSyntaxError(f"dangling '(' in {text!r}")
            op = tokens[pos]
            pos += 1
            if op == "not":
                sub = parse()
                node: Formula = Not(sub)
            elif op == "and":
                left = parse()
                right = parse()
                node = And(left, right)
            else:
                raise FormulaSyntaxError(f"unknown operator {op!r} in {text!r}")
            if pos >= len(tokens) or tokens[pos] != ")":
                raise FormulaSyntaxError(f"missing ')' in {text!r}")
            pos += 1
            return node
        if tok == ")":
            raise FormulaSyntaxError(f"unexpected ')' in {text!r}")
        return Var(tok)

    out = parse()
    if pos != len(tokens):
        raise FormulaSyntaxError(f"trailing tokens in {text!r}")
    return out


def truth_mask(formula: Formula, index: dict[str, int]) -> int:
    """Bitmask of satisfying assignments over the indexed atom set.

    Bit ``i`` of the result is 1 iff assignment ``i`` satisfies the
    formula, where atom ``a`` is true in assignment ``i`` iff bit
    ``index[a]`` of ``i`` is set.
    """
    n = len(index)
    full = (1 << (1 << n)) - 1
    if isinstance(formula, Var):
        try:
            bit = index[formula.name]
        except KeyError:
            raise UnknownAtomError(f"atom {formula.name!r} not registered") from None
        # Assignments where bit `bit` of the index is set form a periodic
        # pattern of 2^bit zeros followed by 2^bit ones; build it closed-form.
        half = 1 << bit
        block = ((1 << half) - 1) << half
        period = 1 << (2 * half)
        return block * (((1 << (1 << n)) - 1) // (period - 1))
    if isinstance(formula, Not):
        return full & ~truth_mask(formula.sub, index)
    if isinstance(formula, And):
        return truth_mask(formula.left, index) & truth_mask(formula.right, index)
    raise TypeError(f"not a formula node: {formula!r}")


def entails(
    premises: Iterable[Formula],
    goal: Formula,
    universe: Iterable[str] | None = None,
) -> bool:
    """Classical propositional entailment by truth-table enumeration.

    True iff the goal holds in every assignment (over the joint atom set)
    that satisfies all premises; inconsistent premises entail everything.
    If ``universe`` is given, every atom mentioned must belong to it.
    """
    premises = list(premises)
    atoms = sorted(frozenset().union(formula_atoms(goal), *map(formula_atoms, premises)))
    if universe is not None:
        allowed = set(universe)
        for name in atoms:
            if name not in allowed:
                raise UnknownAtomError(f"atom {name!r} not registered")
    if len(atoms) > MAX_ENTAILMENT_ATOMS:
        raise EntailmentTooLargeError(
            f"{len(atoms)} atoms exceed the {MAX_ENTAILMENT_ATOMS}-atom truth-table cap"
        )
    index = {name: i for i, name in enumerate(atoms)}
    premise_mask = (1 << (1 << len(atoms))) - 1
    for f in premises:
        premise_mask &= truth_mask(f, index)
    return premise_mask & ~truth_mask(goal, index) == 0
