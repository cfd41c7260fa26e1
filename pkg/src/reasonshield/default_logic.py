"""Fixed-priority default theories and proper-scenario reasoning.

A default theory pairs background propositions with default rules of the
form ``label-fact -> action-type`` and a strict partial priority order
over those rules.  Given a scenario (a subset of the rules taken as
active), four sets drive the semantics:

* triggered -- rules whose premise is entailed by the background plus
  the conclusions of the scenario;
* conflicted -- rules whose negated conclusion is so entailed;
* defeated -- rules outranked by a triggered rule whose conclusion,
  with the background, contradicts theirs;
* binding -- triggered minus conflicted minus defeated.

A scenario is *proper* when it equals its own binding set.  Proper
scenarios are found by exhaustive enumeration of all subsets of the rule
set, guarded by a hard cap; the theories this package reasons over have
a handful of rules, so enumeration is both exact and cheap.

Ought derivation supports two accounts: disjunctive (an action type is
obligatory if some proper scenario's belief set entails it) and conflict
(entailed in every proper scenario's belief set).  With no proper
scenario at all, both accounts yield nothing.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable

from .formulas import (
    Atom,
    AtomKind,
    EntailmentTooLargeError,
    Formula,
    UnknownAtomError,
    Var,
    formula_atoms,
    truth_mask,
)

DEFAULT_SCENARIO_CAP = 16

Scenario = frozenset[str]


class UnknownRuleError(ValueError):
    """A scenario or order references a rule id absent from the theory."""


class CyclicPriorityError(ValueError):
    """Edges whose transitive closure contains a cycle."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        super().__init__("priority cycle: " + " < ".join(cycle + (cycle[0],)))


class ScenarioCapError(RuntimeError):
    """Rule set too large for exhaustive proper-scenario enumeration."""


@dataclass(frozen=True)
class DefaultRule:
    """Conditional from a morally relevant fact to an action type."""

    premise: Atom
    conclusion: Atom

    def __post_init__(self) -> None:
        if self.premise.kind is not AtomKind.LABEL:
            raise ValueError(f"rule premise must be a label fact: {self.premise}")
        if self.conclusion.kind is not AtomKind.ACTION:
            raise ValueError(f"rule conclusion must be an action type: {self.conclusion}")

    @property
    def rule_id(self) -> str:
        """Stable identity derived from the (premise, conclusion) pair."""
        return f"{self.premise.name}->{self.conclusion.name}"


def _find_cycle(edges: frozenset[tuple[str, str]]) -> tuple[str, ...] | None:
    adjacency: dict[str, list[str]] = {}
    for lower, higher in edges:
        adjacency.setdefault(lower, []).append(higher)
    visiting: dict[str, int] = {}  # 0 = on stack, 1 = done
    path: list[str] = []

    def visit(node: str) -> tuple[str, ...] | None:
        state = visiting.get(node)
        if state == 1:
            return None
        if state == 0:
            return tuple(path[path.index(node):])
        visiting[node] = 0
        path.append(node)
        for nxt in adjacency.get(node, ()):
            found = visit(nxt)
            if found is not None:
                return found
        path.pop()
        visiting[node] = 1
        return None

    for start in sorted(adjacency):
        found = visit(start)
        if found is not None:
            return found
    return None


@functools.lru_cache(maxsize=1024)
def _closure(edges: frozenset[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    reach: dict[str, set[str]] = {}
    for lower, higher in edges:
        reach.setdefault(lower, set()).add(higher)
    changed = True
    while changed:
        changed = False
        for lower, uppers in reach.items():
            extra = set()
            for mid in uppers:
                extra |= reach.get(mid, set())
            if not extra <= uppers:
                uppers |= extra
                changed = True
    return frozenset((lo, hi) for lo, uppers in reach.items() for hi in uppers)


@dataclass(frozen=True, eq=False)
class PriorityOrder:
    """Strict partial order over rule ids, stored as generating edges.

    ``(lower, higher)`` means the higher rule outranks the lower one.
    Comparisons go through the transitive closure; construction rejects
    self-loops and any edge set whose closure contains a cycle.
    """

    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        for lower, higher in self.edges:
            if lower == higher:
                raise CyclicPriorityError((lower,))
        cycle = _find_cycle(self.edges)
        if cycle is not None:
            raise CyclicPriorityError(cycle)

    def closure(self) -> frozenset[tuple[str, str]]:
        return _closure(self.edges)

    def outranks(self, higher: str, lower: str) -> bool:
        return (lower, higher) in self.closure()

    def with_edges(self, new_edges: Iterable[tuple[str, str]]) -> "PriorityOrder":
        """A new order with the edges added; raises CyclicPriorityError."""
        return PriorityOrder(self.edges | frozenset(new_edges))

    def mentioned_ids(self) -> frozenset[str]:
        return frozenset(x for edge in self.edges for x in edge)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriorityOrder):
            return NotImplemented
        # Orders are the same relation when their closures agree.
        return self.closure() == other.closure()

    def __hash__(self) -> int:
        return hash(self.closure())


@dataclass(frozen=True)
class DefaultTheory:
    """Background formulas, default rules, and a priority order."""

    atoms: frozenset[Atom]
    background: frozenset[Formula]
    rules: frozenset[DefaultRule]
    order: PriorityOrder = field(default_factory=PriorityOrder)

    def __post_init__(self) -> None:
        names: dict[str, Atom] = {}
        for atom in self.atoms:
            if atom.name in names and names[atom.name] != atom:
                raise ValueError(f"atom name {atom.name!r} registered with two kinds")
            names[atom.name] = atom
        registered = set(names)
        for rule in self.rules:
            for atom in (rule.premise, rule.conclusion):
                if names.get(atom.name) != atom:
                    raise UnknownAtomError(f"rule atom {atom.name!r} not registered")
        for f in self.background:
            missing = formula_atoms(f) - registered
            if missing:
                raise UnknownAtomError(f"background atoms not registered: {sorted(missing)}")
        ids = self.rule_ids()
        stray = self.order.mentioned_ids() - ids
        if stray:
            raise UnknownRuleError(f"order references unknown rules: {sorted(stray)}")

    @classmethod
    def build(
        cls,
        rules: Iterable[DefaultRule],
        order: PriorityOrder | None = None,
        background: Iterable[Formula] = (),
        extra_atoms: Iterable[Atom] = (),
    ) -> "DefaultTheory":
        """Theory with the atom table derived from rules plus extras."""
        rules = frozenset(rules)
        atoms = {a for r in rules for a in (r.premise, r.conclusion)}
        atoms.update(extra_atoms)
        return cls(
            atoms=frozenset(atoms),
            background=frozenset(background),
            rules=rules,
            order=order if order is not None else PriorityOrder(),
        )

    def rule_ids(self) -> frozenset[str]:
        return frozenset(r.rule_id for r in self.rules)

    def rule_by_id(self, rule_id: str) -> DefaultRule:
        for r in self.rules:
            if r.rule_id == rule_id:
                return r
        raise UnknownRuleError(f"no rule with id {rule_id!r}")

    def action_atoms(self) -> frozenset[Atom]:
        return frozenset(a for a in self.atoms if a.kind is AtomKind.ACTION)


class _Evaluator:
    """Per-theory truth-table machinery shared by all scenario queries.

    All masks live over the theory's registered atom set, so every query
    against the same theory agrees on the assignment indexing.
    """

    def __init__(self, theory: DefaultTheory):
        self.theory = theory
        names = sorted(a.name for a in theory.atoms)
        if len(names) > 16:
            raise EntailmentTooLargeError(
                f"theory registers {len(names)} atoms; truth-table cap is 16"
            )
        self.index = {name: i for i, name in enumerate(names)}
        self.full = (1 << (1 << len(names))) - 1
        self._mask_cache: dict[Formula, int] = {}
        self.w_mask = self.full
        for f in theory.background:
            self.w_mask &= self.mask(f)
        self.rules = sorted(theory.rules, key=lambda r: r.rule_id)
        self.prem = {r.rule_id: self.mask(Var(r.premise.name)) for r in self.rules}
        self.conc = {r.rule_id: self.mask(Var(r.conclusion.name)) for r in self.rules}
        closure = theory.order.closure()
        # defeat[d] = ids of prioritized rules whose conclusion, with W,
        # contradicts d's conclusion; defeat is realized once such a rule
        # is triggered in the scenario under scrutiny.
        self.defeat: dict[str, frozenset[str]] = {}
        for r in self.rules:
            candidates = []
            for other in self.rules:
                if (r.rule_id, other.rule_id) in closure:
                    if self.w_mask & self.conc[other.rule_id] & self.conc[r.rule_id] == 0:
                        candidates.append(other.rule_id)
            self.defeat[r.rule_id] = frozenset(candidates)

    def mask(self, formula: Formula) -> int:
        cached = self._mask_cache.get(formula)
        if cached is None:
            cached = truth_mask(formula, self.index)
            self._mask_cache[formula] = cached
        return cached

    def context(self, scenario: Scenario) -> int:
        mask = self.w_mask
        for rule_id in scenario:
            mask &= self.conc[rule_id]
        return mask

    def triggered(self, scenario: Scenario) -> frozenset[str]:
        ctx = self.context(scenario)
        return frozenset(r.rule_id for r in self.rules if ctx & ~self.prem[r.rule_id] == 0)

    def conflicted(self, scenario: Scenario) -> frozenset[str]:
        ctx = self.context(scenario)
        return frozenset(r.rule_id for r in self.rules if ctx & self.conc[r.rule_id] == 0)

    def defeated(self, scenario: Scenario) -> frozenset[str]:
        trig = self.triggered(scenario)
        return frozenset(
            r.rule_id for r in self.rules if self.defeat[r.rule_id] & trig
        )

    def binding(self, scenario: Scenario) -> frozenset[str]:
        return self.triggered(scenario) - self.conflicted(scenario) - self.defeated(scenario)


@functools.lru_cache(maxsize=256)
def _evaluator(theory: DefaultTheory) -> _Evaluator:
    return _Evaluator(theory)


def _check_scenario(theory: DefaultTheory, scenario: Scenario) -> Scenario:
    scenario = frozenset(scenario)
    stray = scenario - theory.rule_ids()
    if stray:
        raise UnknownRuleError(f"scenario references unknown rules: {sorted(stray)}")
    return scenario


def triggered(theory: DefaultTheory, scenario: Scenario) -> frozenset[str]:
    """Rules whose premise is entailed by W plus the scenario's conclusions."""
    return _evaluator(theory).triggered(_check_scenario(theory, scenario))


def conflicted(theory: DefaultTheory, scenario: Scenario) -> frozenset[str]:
    """Rules whose negated conclusion is entailed in the scenario context."""
    return _evaluator(theory).conflicted(_check_scenario(theory, scenario))


def defeated(theory: DefaultTheory, scenario: Scenario) -> frozenset[str]:
    """Rules with a triggered, prioritized defeater in the scenario context."""
    return _evaluator(theory).defeated(_check_scenario(theory, scenario))


def binding(theory: DefaultTheory, scenario: Scenario) -> frozenset[str]:
    """Triggered rules that are neither conflicted nor defeated."""
    return _evaluator(theory).binding(_check_scenario(theory, scenario))


def proper_scenarios(
    theory: DefaultTheory, cap: int = DEFAULT_SCENARIO_CAP
) -> frozenset[Scenario]:
    """All scenarios that equal their own binding set.

    Enumerates every subset of the rule set; refuses (rather than
    truncates) when the rule count exceeds the cap.
    """
    ids = sorted(theory.rule_ids())
    if len(ids) > cap:
        raise ScenarioCapError(
            f"{len(ids)} rules exceed the proper-scenario enumeration cap of {cap}"
        )
    ev = _evaluator(theory)
    proper = []
    for bits in range(1 << len(ids)):
        scenario = frozenset(ids[i] for i in range(len(ids)) if bits >> i & 1)
        if ev.binding(scenario) == scenario:
            proper.append(scenario)
    return frozenset(proper)


class BeliefSet:
    """Membership handle over the deductive closure of W plus Conc(S)."""

    def __init__(self, theory: DefaultTheory, scenario: Scenario):
        self._ev = _evaluator(theory)
        self._ctx = self._ev.context(_check_scenario(theory, scenario))
        self.theory = theory
        self.scenario = frozenset(scenario)

    def holds(self, formula: Formula) -> bool:
        missing = formula_atoms(formula) - set(self._ev.index)
        if missing:
            raise UnknownAtomError(f"atoms not registered: {sorted(missing)}")
        return self._ctx & ~self._ev.mask(formula) == 0

    def __contains__(self, formula: Formula) -> bool:
        return self.holds(formula)


def belief_set(theory: DefaultTheory, scenario: Scenario) -> BeliefSet:
    return BeliefSet(theory, scenario)


def oughts(
    theory: DefaultTheory,
    account: str = "disjunctive",
    cap: int = DEFAULT_SCENARIO_CAP,
) -> frozenset[Atom]:
    """Action types obligatory under the chosen account.

    disjunctive: entailed in at least one proper scenario's belief set;
    conflict: entailed in all of them.  No proper scenarios means no
    oughts under either account.
    """
    if account not in ("disjunctive", "conflict"):
        raise ValueError(f"unknown account {account!r}")
    ev = _evaluator(theory)
    contexts = [ev.context(s) for s in proper_scenarios(theory, cap=cap)]
    if not contexts:
        return frozenset()
    out = []
    for atom in theory.action_atoms():
        mask = ev.mask(Var(atom.name))
        entailed = [ctx & ~mask == 0 for ctx in contexts]
        if (account == "disjunctive" and any(entailed)) or (
            account == "conflict" and all(entailed)
        ):
            out.append(atom)
    return frozenset(out)
