"""The outer loop: shields, judging, repair, metrics, convergence."""

import pytest

from reasonshield.bridge_domain import (
    build_registry,
    exemplary_theory,
    rescue_rule,
    unordered_theory,
    wait_rule,
)
from reasonshield.bridge_env import BridgeEnv
from reasonshield.judge import OracleJudge
from reasonshield.learner import ReasonTheory
from reasonshield.logs import ListWriter
from reasonshield.loop import StepEngine, run_loop
from reasonshield.rl import QTable, RLConfig
from reasonshield.shield import generate_shield

D1 = wait_rule()
D2 = rescue_rule()


@pytest.fixture
def env():
    return BridgeEnv()


@pytest.fixture
def registry(env):
    return build_registry(env.config)


@pytest.fixture
def oracle(registry):
    return OracleJudge(exemplary_theory(), registry)


class TestRunLoop:
    def test_first_wait_choice_draws_exactly_one_accusation(self, env, registry, oracle):
        log = ListWriter()
        theory, metrics = run_loop(
            QTable(),
            env,
            oracle,
            unordered_theory(),
            12,
            seed=7,
            registry=registry,
            constellation="dilemma",
            rl_config=RLConfig(),
            log_writer=log,
        )
        accusations = [r for r in log.records if r["verdict"]]
        assert len(accusations) == 1
        verdict = accusations[0]["verdict"]
        assert (verdict["obligation"], verdict["reason"]) == ("rescue", "D")
        assert theory.order.edges == {(D1.rule_id, D2.rule_id)}
        assert theory.revision == 1
        # Once repaired, the repair is permanent: later records carry it.
        after = [r for r in log.records if r["revision"] == 1]
        assert after and all(r["revision"] == 1 for r in log.records[-len(after):])

    def test_empty_theory_without_moral_facts_never_accuses(self, env, registry, oracle):
        theory, metrics = run_loop(
            QTable(),
            env,
            oracle,
            ReasonTheory(),
            10,
            seed=3,
            registry=registry,
            constellation="none",
            rl_config=RLConfig(),
        )
        assert metrics.totals()["accusations"] == 0
        assert theory.rules == frozenset()
        assert theory.order.edges == frozenset()

    def test_exemplary_theory_is_a_fixed_point(self, env, registry, oracle):
        theory, metrics = run_loop(
            QTable(),
            env,
            oracle,
            exemplary_theory(),
            20,
            seed=9,
            registry=registry,
            constellation="dilemma",
            rl_config=RLConfig(),
        )
        assert metrics.totals()["accusations"] == 0
        assert theory.order.edges == exemplary_theory().order.edges

    def test_accusation_count_is_bounded_by_oracle_size(self, env, registry, oracle):
        # Each accusation adds the rule or at least one permanent edge.
        bound = len(exemplary_theory().rules) + len(exemplary_theory().order.edges)
        for seed in range(5):
            _, metrics = run_loop(
                QTable(),
                env,
                oracle,
                ReasonTheory(),
                15,
                seed=seed,
                registry=registry,
                constellation="dilemma",
                rl_config=RLConfig(),
            )
            assert metrics.totals()["accusations"] <= bound

    def test_empty_start_learns_the_rescue_rule(self, env, registry, oracle):
        theory, _ = run_loop(
            QTable(),
            env,
            oracle,
            ReasonTheory(),
            10,
            seed=2,
            registry=registry,
            constellation="drowning",
            rl_config=RLConfig(),
        )
        assert D2 in theory.rules

    def test_shield_after_update_satisfies_the_feedback(self, env, registry, oracle):
        """Post-repair, re-running the accused state only yields scenarios
        with the new rule, so shields realize the demanded obligation."""
        import random

        state = env.reset(42, "dilemma")
        engine = StepEngine(
            env=env,
            registry=registry,
            theory=unordered_theory(),
            qtable=QTable(),
            seed=4,
            constellation="dilemma",
            judge=oracle,
            judge_mode="oracle",
            rl_config=RLConfig(),
        )
        engine.begin_episode()
        while engine.theory.revision == 0:
            engine.step_once()
            if engine.episode > 30:
                pytest.fail("no accusation after 30 episodes")
        for seed in range(10):
            shield = generate_shield(engine.theory, registry, state, random.Random(seed))
            assert D2.rule_id in shield.chosen
            assert shield.permitted <= registry.first_actions("rescue", state)

    def test_metrics_csv(self, env, registry, tmp_path):
        _, metrics = run_loop(
            QTable(),
            env,
            None,
            exemplary_theory(),
            3,
            seed=1,
            registry=registry,
            constellation="none",
            rl_config=RLConfig(),
        )
        out = tmp_path / "metrics.csv"
        metrics.write_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0].startswith("episode,steps,return")
        assert len(lines) == 4
