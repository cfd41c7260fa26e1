"""The moral judge: case-based accusations against executed actions.

The oracle judge runs the shield machinery over a ground-truth reason
theory for the state in which the agent chose its action.  That theory
is assumed to settle every situation it is consulted on -- it must yield
exactly one proper scenario; more than one is a configuration error.
The obligations are the chosen scenario's conclusions.  If the executed
action begins a realizing trajectory for every obligation (or there are
none), the judge stays silent; otherwise it returns the first violated
obligation in stable rule-id order, backed by that rule's premise.

Human verdicts arrive through the service instead of this oracle; the
validation they must pass lives here too, so both sources meet the same
bar: the cited reason must be a fact of the accused state, and an
accusation is rejected as contradictory when the executed action did
conform to the cited obligation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bridge_env import WorldState
from .default_logic import proper_scenarios
from .learner import Feedback, ReasonTheory
from .realization import ActionTypeRegistry
from .shield import extend_to_default_theory


class AmbiguousObligationsError(RuntimeError):
    """Ground-truth theory yields multiple proper scenarios."""


class InvalidVerdictError(ValueError):
    """A submitted verdict fails validation against the accused step."""


@dataclass(frozen=True)
class Accusation:
    obligation: str  # violated action type
    reason: str  # the label backing the accusation


@dataclass(frozen=True)
class JudgeVerdict:
    accusation: Accusation | None
    source: str = "oracle"


class OracleJudge:
    """Automated judge backed by a fixed ground-truth reason theory."""

    def __init__(self, ground_truth: ReasonTheory, registry: ActionTypeRegistry):
        self.ground_truth = ground_truth
        self.registry = registry

    def obligations(self, state: WorldState) -> list:
        """Rules of the unique proper scenario the ground truth derives."""
        full = extend_to_default_theory(self.registry, self.ground_truth, state)
        proper = proper_scenarios(full)
        if len(proper) != 1:
            raise AmbiguousObligationsError(
                f"ground truth yields {len(proper)} proper scenarios: "
                f"{sorted(tuple(sorted(s)) for s in proper)}; the judge requires "
                "exactly one"
            )
        (chosen,) = proper
        rules_by_id = {r.rule_id: r for r in self.ground_truth.rules}
        return [rules_by_id[rid] for rid in sorted(chosen)]

    def judge(self, state: WorldState, labels: frozenset[str], action: str) -> Accusation | None:
        obligations = self.obligations(state)
        if not obligations:
            return None
        violated = [
            rule
            for rule in obligations
            if action not in self.registry.first_actions(rule.conclusion.name, state)
        ]
        if not violated:
            return None
        first = violated[0]
        return Accusation(obligation=first.conclusion.name, reason=first.premise.name)


def validate_accusation(
    registry: ActionTypeRegistry,
    accusation: Accusation,
    state: WorldState,
    labels: frozenset[str],
    action: str,
) -> None:
    """Reject malformed or contradictory verdicts; silent when valid."""
    if accusation.obligation not in registry.action_type_names():
        raise InvalidVerdictError(f"unknown action type {accusation.obligation!r}")
    if accusation.reason not in labels:
        raise InvalidVerdictError(
            f"reason {accusation.reason!r} was not a fact of the accused state "
            f"(labels were {sorted(labels)})"
        )
    if action in registry.first_actions(accusation.obligation, state):
        raise InvalidVerdictError(
            f"action {action!r} conformed to obligation {accusation.obligation!r}; "
            "the accusation contradicts the realization map"
        )


def feedback_from_accusation(
    accusation: Accusation, state: WorldState, chosen, step: int
) -> Feedback:
    return Feedback(
        obligation=accusation.obligation,
        reason=accusation.reason,
        state_digest=state.digest(),
        step=step,
        chosen=frozenset(chosen),
    )
