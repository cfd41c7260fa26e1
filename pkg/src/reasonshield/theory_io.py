"""Round-trippable JSON text format for theories.

Document shape::

    {
      "atoms":       [{"name": "B", "kind": "label"}, ...],
      "background":  ["(not (and rescue wait))", ...],
      "rules":       [{"id": "B->wait", "premise": "B", "conclusion": "wait"}],
      "order":       [{"lower": "B->wait", "higher": "D->rescue"}],
      "actionTypes": [{"atom": "wait", "planner": "avoid-bridge-entry", "params": {}}],
      "revision":    0
    }

Formula strings use the canonical prefix grammar of
:mod:`reasonshield.formulas` (``(not F)``, ``(and F G)``, bare atom
names), for which parse and print are exact inverses.  Rule ids are
derived from the (premise, conclusion) pair; an explicit ``id`` field is
accepted and checked but never trusted over the pair.  ``background``
and ``atoms`` are optional for reason theories, whose background is
constructed per state.
"""

from __future__ import annotations

import json
from pathlib import Path

from .default_logic import DefaultRule, DefaultTheory, PriorityOrder
from .formulas import Atom, AtomKind, format_formula, parse_formula
from .learner import ReasonTheory
from .realization import ActionType, ActionTypeRegistry


class TheoryFormatError(ValueError):
    pass


def _rule_from_dict(data: dict) -> DefaultRule:
    try:
        rule = DefaultRule(
            premise=Atom(data["premise"], AtomKind.LABEL),
            conclusion=Atom(data["conclusion"], AtomKind.ACTION),
        )
    except KeyError as err:
        raise TheoryFormatError(f"rule entry missing field {err}") from None
    declared = data.get("id")
    if declared is not None and declared != rule.rule_id:
        raise TheoryFormatError(
            f"rule id {declared!r} does not match its premise/conclusion pair "
            f"({rule.rule_id!r})"
        )
    return rule


def _order_from_list(entries) -> PriorityOrder:
    edges = set()
    for entry in entries:
        try:
            edges.add((entry["lower"], entry["higher"]))
        except KeyError as err:
            raise TheoryFormatError(f"order entry missing field {err}") from None
    return PriorityOrder(frozenset(edges))


def reason_theory_to_dict(theory: ReasonTheory) -> dict:
    return {
        "rules": [
            {"id": r.rule_id, "premise": r.premise.name, "conclusion": r.conclusion.name}
            for r in sorted(theory.rules, key=lambda r: r.rule_id)
        ],
        "order": [
            {"lower": lo, "higher": hi} for lo, hi in sorted(theory.order.edges)
        ],
        "revision": theory.revision,
    }


def reason_theory_from_dict(data: dict) -> ReasonTheory:
    rules = frozenset(_rule_from_dict(r) for r in data.get("rules", []))
    order = _order_from_list(data.get("order", []))
    known = {r.rule_id for r in rules}
    stray = order.mentioned_ids() - known
    if stray:
        raise TheoryFormatError(f"order references unknown rules: {sorted(stray)}")
    return ReasonTheory(rules=rules, order=order, revision=int(data.get("revision", 0)))


def default_theory_to_dict(theory: DefaultTheory) -> dict:
    out = reason_theory_to_dict(
        ReasonTheory(rules=theory.rules, order=theory.order)
    )
    del out["revision"]
    out["atoms"] = [
        {"name": a.name, "kind": a.kind.value}
        for a in sorted(theory.atoms, key=lambda a: a.name)
    ]
    out["background"] = sorted(format_formula(f) for f in theory.background)
    return out


def default_theory_from_dict(data: dict) -> DefaultTheory:
    rules = frozenset(_rule_from_dict(r) for r in data.get("rules", []))
    order = _order_from_list(data.get("order", []))
    atoms = frozenset(
        Atom(a["name"], AtomKind(a["kind"])) for a in data.get("atoms", [])
    )
    background = frozenset(parse_formula(s) for s in data.get("background", []))
    extra = atoms | {a for r in rules for a in (r.premise, r.conclusion)}
    return DefaultTheory(
        atoms=frozenset(extra),
        background=background,
        rules=rules,
        order=order,
    )


def action_types_from_dict(data: dict) -> list[ActionType]:
    out = []
    for entry in data.get("actionTypes", []):
        try:
            out.append(
                ActionType.with_params(
                    atom=Atom(entry["atom"], AtomKind.ACTION),
                    planner=entry["planner"],
                    params=entry.get("params"),
                )
            )
        except KeyError as err:
            raise TheoryFormatError(f"actionTypes entry missing field {err}") from None
    return out


def registry_from_dict(data: dict, config=None, horizon=None) -> ActionTypeRegistry:
    registry = ActionTypeRegistry(config=config, horizon=horizon)
    for action_type in action_types_from_dict(data):
        registry.register(action_type)
    return registry


def save_reason_theory(theory: ReasonTheory, path, action_types: list[dict] | None = None) -> None:
    doc = reason_theory_to_dict(theory)
    if action_types is not None:
        doc["actionTypes"] = action_types
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_reason_theory(path) -> tuple[ReasonTheory, dict]:
    """Reason theory plus the raw document (for actionTypes etc.)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise TheoryFormatError(f"malformed theory JSON: {err}") from None
    return reason_theory_from_dict(data), data
