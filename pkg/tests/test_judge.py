"""Oracle judge: obligation derivation, conformance, accusations."""

from dataclasses import replace

import pytest

from reasonshield.bridge_domain import (
    build_registry,
    exemplary_theory,
    rescue_rule,
    unordered_theory,
    wait_rule,
)
from reasonshield.bridge_env import ACTIONS, BridgeEnv, Person, labels_of
from reasonshield.judge import (
    Accusation,
    AmbiguousObligationsError,
    InvalidVerdictError,
    OracleJudge,
    validate_accusation,
)

D1 = wait_rule()
D2 = rescue_rule()


@pytest.fixture
def env():
    return BridgeEnv()


@pytest.fixture
def registry(env):
    return build_registry(env.config)


@pytest.fixture
def judge(registry):
    return OracleJudge(exemplary_theory(), registry)


@pytest.fixture
def dilemma(env):
    return env.reset(42, "dilemma")


class TestJudge:
    def test_idle_in_the_dilemma_is_accused(self, judge, dilemma):
        verdict = judge.judge(dilemma, labels_of(dilemma), "idle")
        assert verdict == Accusation(obligation="rescue", reason="D")

    def test_south_in_the_dilemma_is_silent(self, judge, registry, dilemma):
        # Oracle check: south begins a realizing rescue trajectory.
        assert "south" in registry.first_actions("rescue", dilemma)
        assert judge.judge(dilemma, labels_of(dilemma), "south") is None

    def test_no_labels_no_accusation(self, judge, env):
        state = env.reset(0, "none")
        for action in ACTIONS:
            assert judge.judge(state, labels_of(state), action) is None

    def test_bridge_entry_violates_waiting(self, judge, env):
        state = env.reset(2, "bridge-person")
        state = replace(state, agent=(3, 0))
        verdict = judge.judge(state, labels_of(state), "south")
        assert verdict == Accusation(obligation="wait", reason="B")

    def test_ambiguous_ground_truth_is_an_error(self, registry, dilemma):
        wishy = OracleJudge(unordered_theory(), registry)
        with pytest.raises(AmbiguousObligationsError):
            wishy.judge(dilemma, labels_of(dilemma), "idle")

    def test_silence_soundness(self, judge, registry, env):
        """Silent iff the action conforms to every derived obligation."""
        for seed in range(20):
            state = env.reset(seed, "random")
            labels = labels_of(state)
            obligations = judge.obligations(state)
            for action in ACTIONS:
                verdict = judge.judge(state, labels, action)
                conforms = all(
                    action in registry.first_actions(r.conclusion.name, state)
                    for r in obligations
                )
                assert (verdict is None) == (conforms or not obligations)

    def test_accusation_reason_is_a_present_label(self, judge, env):
        for seed in range(20):
            state = env.reset(seed, "random")
            labels = labels_of(state)
            for action in ACTIONS:
                verdict = judge.judge(state, labels, action)
                if verdict is not None:
                    assert verdict.reason in labels

    def test_judge_is_pure(self, judge, dilemma):
        labels = labels_of(dilemma)
        first = judge.judge(dilemma, labels, "idle")
        again = judge.judge(dilemma, labels, "idle")
        assert first == again

    def test_two_violations_report_the_first_in_rule_id_order(self, judge, env):
        # Water person reachable without crossing the bridge, so waiting
        # and rescuing are compatible and both obligations stand; going
        # south violates both.  Stable rule-id order picks B->wait.
        base = env.reset(0, "none")
        state = replace(
            base,
            agent=(3, 0),
            persons=(
                Person(0, (3, 3)),
                Person(1, (1, 1), entered_water_at=0),
            ),
        )
        labels = labels_of(state)
        assert labels == {"B", "D"}
        assert len(judge.obligations(state)) == 2
        verdict = judge.judge(state, labels, "south")
        assert verdict == Accusation(obligation="wait", reason="B")

    def test_infeasible_rescue_draws_no_accusation(self, judge, env):
        # Ought implies can: once no trajectory can beat the drowning
        # deadline, the obligation drops out of the derivation and the
        # judge cannot accuse over it.
        base = env.reset(0, "none")
        state = replace(
            base,
            agent=(6, 0),
            step=12,
            persons=(Person(0, (1, 5), entered_water_at=0),),
        )
        assert labels_of(state) == {"D"}
        assert judge.obligations(state) == []
        for action in ACTIONS:
            assert judge.judge(state, labels_of(state), action) is None


class TestVerdictValidation:
    def test_unknown_obligation(self, registry, dilemma):
        with pytest.raises(InvalidVerdictError):
            validate_accusation(
                registry, Accusation("fly", "D"), dilemma, labels_of(dilemma), "idle"
            )

    def test_reason_must_be_present(self, registry, env):
        state = env.reset(2, "bridge-person")
        with pytest.raises(InvalidVerdictError):
            validate_accusation(
                registry, Accusation("rescue", "D"), state, labels_of(state), "idle"
            )

    def test_conforming_action_cannot_be_accused(self, registry, dilemma):
        with pytest.raises(InvalidVerdictError):
            validate_accusation(
                registry, Accusation("rescue", "D"), dilemma, labels_of(dilemma), "south"
            )

    def test_valid_accusation_passes(self, registry, dilemma):
        validate_accusation(
            registry, Accusation("rescue", "D"), dilemma, labels_of(dilemma), "idle"
        )
