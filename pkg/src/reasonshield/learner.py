"""The agent's learnable reason theory and its case-based repair.

A reason theory is the pair of default rules and the priority order
among them -- the part of the moral machinery that persists across
episodes and grows from judge accusations.  Feedback ``(obligation,
reason)`` says the agent should have pursued the obligation because the
reason held.  The repair is monotone: ensure the rule
``reason -> obligation`` exists (re-adding is a no-op), then raise it
above every rule of the proper scenario the agent had picked.  Edges are
only ever added; feedback whose edges would close a priority cycle is
refused with the offending cycle, leaving the theory untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .default_logic import (
    CyclicPriorityError,
    DefaultRule,
    PriorityOrder,
    Scenario,
    UnknownRuleError,
)
from .formulas import Atom, AtomKind


class InconsistentFeedbackError(ValueError):
    """Feedback refused because it contradicts learned priorities."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        super().__init__(
            "feedback would create a priority cycle: " + " < ".join(cycle + (cycle[0],))
        )


@dataclass(frozen=True)
class Feedback:
    """An accusation with the context it was issued in."""

    obligation: str  # action-type atom name
    reason: str  # label atom name
    state_digest: str = ""
    step: int = 0
    chosen: Scenario = frozenset()


@dataclass(frozen=True)
class ReasonTheory:
    rules: frozenset[DefaultRule] = frozenset()
    order: PriorityOrder = PriorityOrder()
    revision: int = 0

    def rule_ids(self) -> frozenset[str]:
        return frozenset(r.rule_id for r in self.rules)

    def with_change(self, rules=None, order=None) -> "ReasonTheory":
        return replace(
            self,
            rules=self.rules if rules is None else rules,
            order=self.order if order is None else order,
            revision=self.revision + 1,
        )


def rule_from_feedback(feedback: Feedback) -> DefaultRule:
    return DefaultRule(
        premise=Atom(feedback.reason, AtomKind.LABEL),
        conclusion=Atom(feedback.obligation, AtomKind.ACTION),
    )


def apply_feedback(
    theory: ReasonTheory, feedback: Feedback, chosen: Scenario
) -> ReasonTheory:
    """Repair the theory from one accusation.

    ``chosen`` is the proper scenario the agent picked at the accused
    step.  Returns the unchanged theory object when the rule and all
    edges are already present, so applying the same feedback twice is
    idempotent.
    """
    new_rule = rule_from_feedback(feedback)
    rules = theory.rules | {new_rule}
    known = frozenset(r.rule_id for r in rules)
    stray = frozenset(chosen) - known
    if stray:
        raise UnknownRuleError(f"chosen scenario references unknown rules: {sorted(stray)}")
    edges = frozenset(
        (rule_id, new_rule.rule_id) for rule_id in chosen if rule_id != new_rule.rule_id
    )
    try:
        order = theory.order.with_edges(edges)
    except CyclicPriorityError as err:
        raise InconsistentFeedbackError(err.cycle) from None
    if rules == theory.rules and order.edges == theory.order.edges:
        return theory
    return theory.with_change(rules=rules, order=order)
