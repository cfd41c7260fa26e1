"""Reason-based shield generation.

Per state, the reason theory is extended into a full default theory: the
background takes one atom per morally relevant fact plus, for every
premise-matched rule subset whose obligations admit no common first
action, an exclusivity formula negating the conjunction of those
obligations.  The proper scenarios of that theory are enumerated, one is
drawn uniformly at random, and the shield is the intersection of the
first-action sets of the chosen scenario's obligations.

An empty chosen scenario restricts nothing: with no recognized
normative reasons in play the whole action alphabet stays permissible.
A nonempty scenario with an empty action intersection cannot arise from
backgrounds built here (the exclusivity formulas remove such scenarios);
if a hand-edited theory produces one it is surfaced as an error rather
than silently widened.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bridge_env import ACTIONS, WorldState, labels_of
from .default_logic import (
    DEFAULT_SCENARIO_CAP,
    DefaultTheory,
    Scenario,
    proper_scenarios,
)
from .formulas import Atom, AtomKind, Formula, Not, Var, conj, disj_all, format_formula
from .learner import ReasonTheory
from .realization import ActionTypeRegistry, conflict_sets


class DegenerateShieldError(RuntimeError):
    """A nonempty chosen scenario admits no common first action."""


@dataclass(frozen=True)
class Shield:
    permitted: frozenset[str]
    chosen: Scenario
    proper: frozenset[Scenario]
    background: frozenset[Formula]
    ought: str | None  # all-things-considered ought, for the episode log


def build_background(
    registry: ActionTypeRegistry,
    theory: ReasonTheory,
    state: WorldState,
) -> frozenset[Formula]:
    """Morally relevant facts plus exclusivity formulas for conflicts."""
    formulas: set[Formula] = {Var(name) for name in labels_of(state)}
    rules_by_id = {r.rule_id: r for r in theory.rules}
    for subset in conflict_sets(registry, theory.rules, state):
        conclusions = sorted({rules_by_id[rid].conclusion.name for rid in subset})
        formulas.add(Not(conj([Var(name) for name in conclusions])))
    return frozenset(formulas)


def extend_to_default_theory(
    registry: ActionTypeRegistry,
    theory: ReasonTheory,
    state: WorldState,
) -> DefaultTheory:
    background = build_background(registry, theory, state)
    label_atoms = frozenset(Atom(name, AtomKind.LABEL) for name in labels_of(state))
    return DefaultTheory.build(
        rules=theory.rules,
        order=theory.order,
        background=background,
        extra_atoms=label_atoms,
    )


def generate_shield(
    theory: ReasonTheory,
    registry: ActionTypeRegistry,
    state: WorldState,
    rng: random.Random,
    cap: int = DEFAULT_SCENARIO_CAP,
) -> Shield:
    """Extend, enumerate, draw a proper scenario, intersect first actions."""
    full = extend_to_default_theory(registry, theory, state)
    proper = proper_scenarios(full, cap=cap)
    ranked = sorted(proper, key=lambda s: tuple(sorted(s)))
    if ranked:
        chosen = ranked[rng.randrange(len(ranked))]
    else:
        chosen = frozenset()
    rules_by_id = {r.rule_id: r for r in theory.rules}
    if chosen:
        permitted = frozenset(ACTIONS)
        for rule_id in chosen:
            permitted &= registry.first_actions(rules_by_id[rule_id].conclusion.name, state)
        if not permitted:
            raise DegenerateShieldError(
                f"scenario {sorted(chosen)} admits no common first action"
            )
    else:
        permitted = frozenset(ACTIONS)
    return Shield(
        permitted=permitted,
        chosen=chosen,
        proper=proper,
        background=full.background,
        ought=_ought_formula(ranked, rules_by_id),
    )


def _ought_formula(ranked: list[Scenario], rules_by_id: dict) -> str | None:
    """Disjunction over proper scenarios of their obligation conjunctions."""
    parts = []
    for scenario in ranked:
        if not scenario:
            return None  # a vacuous scenario makes the ought trivial
        conclusions = sorted({rules_by_id[rid].conclusion.name for rid in scenario})
        parts.append(conj([Var(name) for name in conclusions]))
    if not parts:
        return None
    return format_formula(disj_all(parts))
