"""Atoms, rules, and action types of the bridge setting.

Two morally relevant facts can hold: ``B`` (somebody stands on the
bridge) and ``D`` (somebody is in the water).  They ground two default
rules: a person on the bridge is a reason to wait in front of it, a
person in the water is a reason to rescue them.  The fully learned
("exemplary") theory additionally ranks rescuing above waiting.
"""

from __future__ import annotations

from .bridge_env import LABEL_BRIDGE, LABEL_DROWNING, EnvConfig
from .default_logic import DefaultRule, PriorityOrder
from .formulas import Atom, AtomKind
from .learner import ReasonTheory
from .realization import ActionType, ActionTypeRegistry

TYPE_WAIT = "wait"
TYPE_RESCUE = "rescue"

ATOM_BRIDGE = Atom(LABEL_BRIDGE, AtomKind.LABEL)
ATOM_DROWNING = Atom(LABEL_DROWNING, AtomKind.LABEL)
ATOM_WAIT = Atom(TYPE_WAIT, AtomKind.ACTION)
ATOM_RESCUE = Atom(TYPE_RESCUE, AtomKind.ACTION)


def wait_rule() -> DefaultRule:
    return DefaultRule(premise=ATOM_BRIDGE, conclusion=ATOM_WAIT)


def rescue_rule() -> DefaultRule:
    return DefaultRule(premise=ATOM_DROWNING, conclusion=ATOM_RESCUE)


def unordered_theory() -> ReasonTheory:
    """Both rules known, no priority yet: the pre-learning agent."""
    return ReasonTheory(rules=frozenset({wait_rule(), rescue_rule()}))


def exemplary_theory() -> ReasonTheory:
    """Both rules with rescue strictly prioritized over waiting."""
    return ReasonTheory(
        rules=frozenset({wait_rule(), rescue_rule()}),
        order=PriorityOrder(frozenset({(wait_rule().rule_id, rescue_rule().rule_id)})),
    )


def empty_theory() -> ReasonTheory:
    return ReasonTheory()


def action_type_specs() -> list[dict]:
    return [
        {"atom": TYPE_WAIT, "planner": "avoid-bridge-entry"},
        {"atom": TYPE_RESCUE, "planner": "shortest-rescue"},
    ]


def build_registry(config: EnvConfig | None = None, horizon: int | None = None) -> ActionTypeRegistry:
    registry = ActionTypeRegistry(config=config, horizon=horizon)
    registry.register(ActionType(atom=ATOM_WAIT, planner="avoid-bridge-entry"))
    registry.register(ActionType(atom=ATOM_RESCUE, planner="shortest-rescue"))
    return registry
