"""Scenario semantics: triggered/conflicted/defeated/binding, proper
scenarios, belief sets, and ought derivation, checked against the
worked bridge cases and an independent assignment-set oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reasonshield.bridge_domain import (
    ATOM_BRIDGE,
    ATOM_DROWNING,
    rescue_rule,
    wait_rule,
)
from reasonshield.default_logic import (
    CyclicPriorityError,
    DefaultRule,
    DefaultTheory,
    PriorityOrder,
    ScenarioCapError,
    UnknownRuleError,
    belief_set,
    binding,
    conflicted,
    defeated,
    oughts,
    proper_scenarios,
    triggered,
)
from reasonshield.formulas import And, Atom, AtomKind, Not, UnknownAtomError, Var

from conftest import OracleScenarioChecker, random_theory, theories

D1 = wait_rule()
D2 = rescue_rule()
EXCLUSIVE = Not(And(Var("rescue"), Var("wait")))
EXTRA = frozenset({ATOM_BRIDGE, ATOM_DROWNING})


def bridge_theory(labels=(), exclusive=False, edges=()):
    background = [Var(name) for name in labels]
    if exclusive:
        background.append(EXCLUSIVE)
    return DefaultTheory.build(
        rules=[D1, D2],
        order=PriorityOrder(frozenset(edges)),
        background=background,
        extra_atoms=EXTRA,
    )


DILEMMA = bridge_theory(["B", "D"], exclusive=True)
DILEMMA_ORDERED = bridge_theory(["B", "D"], exclusive=True, edges=[(D1.rule_id, D2.rule_id)])


class TestPriorityOrder:
    def test_rejects_self_loop(self):
        with pytest.raises(CyclicPriorityError):
            PriorityOrder(frozenset({("a", "a")}))

    def test_rejects_cycle_through_closure(self):
        with pytest.raises(CyclicPriorityError):
            PriorityOrder(frozenset({("a", "b"), ("b", "c"), ("c", "a")}))

    def test_closure_and_outranks(self):
        order = PriorityOrder(frozenset({("a", "b"), ("b", "c")}))
        assert order.outranks("c", "a")
        assert not order.outranks("a", "c")

    def test_equality_by_closure(self):
        explicit = PriorityOrder(frozenset({("a", "b"), ("b", "c"), ("a", "c")}))
        generators = PriorityOrder(frozenset({("a", "b"), ("b", "c")}))
        assert explicit == generators
        assert hash(explicit) == hash(generators)


class TestRules:
    def test_rule_id_is_the_pair(self):
        assert D1.rule_id == "B->wait"
        assert D2.rule_id == "D->rescue"

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            DefaultRule(premise=Atom("B", AtomKind.ACTION), conclusion=Atom("wait", AtomKind.ACTION))
        with pytest.raises(ValueError):
            DefaultRule(premise=Atom("B", AtomKind.LABEL), conclusion=Atom("D", AtomKind.LABEL))

    def test_duplicate_pairs_collapse_in_sets(self):
        again = DefaultRule(premise=Atom("B", AtomKind.LABEL), conclusion=Atom("wait", AtomKind.ACTION))
        assert frozenset({D1, again}) == frozenset({D1})


class TestTheoryValidation:
    def test_unregistered_background_atom(self):
        with pytest.raises(UnknownAtomError):
            DefaultTheory.build(rules=[D1], background=[Var("mystery")])

    def test_conflicting_atom_kinds(self):
        with pytest.raises(ValueError):
            DefaultTheory(
                atoms=frozenset({Atom("B", AtomKind.LABEL), Atom("B", AtomKind.ACTION)}),
                background=frozenset(),
                rules=frozenset(),
            )

    def test_order_must_reference_rules(self):
        with pytest.raises(UnknownRuleError):
            DefaultTheory.build(rules=[D1], order=PriorityOrder(frozenset({("a", "b")})))

    def test_scenario_must_reference_rules(self):
        with pytest.raises(UnknownRuleError):
            triggered(DILEMMA, frozenset({"nope"}))


class TestTriggered:
    def test_bridge_label_triggers_wait_rule(self):
        theory = bridge_theory(["B"])
        assert triggered(theory, frozenset()) == {D1.rule_id}

    def test_empty_background_triggers_nothing(self):
        theory = bridge_theory([])
        assert triggered(theory, frozenset()) == frozenset()

    def test_both_labels_trigger_both(self):
        theory = bridge_theory(["B", "D"])
        assert triggered(theory, frozenset()) == {D1.rule_id, D2.rule_id}


class TestConflicted:
    def test_exclusivity_conflicts_the_other_rule(self):
        # Frozen from the assignment oracle over the four atoms.
        assert conflicted(DILEMMA, frozenset({D2.rule_id})) == {D1.rule_id}
        assert OracleScenarioChecker(DILEMMA).binding(frozenset({D2.rule_id})) == {D2.rule_id}

    def test_without_exclusivity_nothing_conflicts(self):
        theory = bridge_theory(["B", "D"])
        assert conflicted(theory, frozenset({D1.rule_id, D2.rule_id})) == frozenset()

    def test_no_action_atoms_in_background_no_conflicts(self):
        theory = bridge_theory(["B", "D"])
        assert conflicted(theory, frozenset()) == frozenset()


class TestDefeated:
    def test_prioritized_exclusive_rule_defeats(self):
        for scenario in [frozenset(), frozenset({D1.rule_id}), frozenset({D2.rule_id})]:
            assert D1.rule_id in defeated(DILEMMA_ORDERED, scenario)

    def test_no_order_no_defeat(self):
        assert defeated(DILEMMA, frozenset()) == frozenset()
        assert defeated(DILEMMA, frozenset({D1.rule_id, D2.rule_id})) == frozenset()

    def test_untriggered_rule_cannot_defeat(self):
        # Frozen from the oracle: with W={B} the rescue rule never triggers.
        theory = bridge_theory(["B"], exclusive=True, edges=[(D1.rule_id, D2.rule_id)])
        for scenario in [frozenset(), frozenset({D1.rule_id})]:
            assert defeated(theory, scenario) == frozenset()


class TestBinding:
    def test_each_dilemma_singleton_binds_itself(self):
        assert binding(DILEMMA, frozenset({D1.rule_id})) == {D1.rule_id}
        assert binding(DILEMMA, frozenset({D2.rule_id})) == {D2.rule_id}

    def test_joint_scenario_is_mutually_conflicted(self):
        # Frozen from the oracle: the context is inconsistent, so both
        # rules are conflicted and nothing binds.
        assert binding(DILEMMA, frozenset({D1.rule_id, D2.rule_id})) == frozenset()

    def test_empty_rule_set(self):
        theory = DefaultTheory.build(rules=[], background=[Var("B")], extra_atoms=EXTRA)
        assert binding(theory, frozenset()) == frozenset()


class TestProperScenarios:
    def test_dilemma_without_order_has_both_singletons(self):
        assert proper_scenarios(DILEMMA) == {
            frozenset({D1.rule_id}),
            frozenset({D2.rule_id}),
        }

    def test_priority_collapses_to_rescue(self):
        assert proper_scenarios(DILEMMA_ORDERED) == {frozenset({D2.rule_id})}

    def test_empty_rules_yield_empty_scenario(self):
        theory = DefaultTheory.build(rules=[], background=[], extra_atoms=EXTRA)
        assert proper_scenarios(theory) == {frozenset()}

    def test_cap_is_enforced(self):
        labels = [Atom(f"l{i}", AtomKind.LABEL) for i in range(5)]
        actions = [Atom(f"a{i}", AtomKind.ACTION) for i in range(4)]
        rules = [DefaultRule(l, a) for l in labels for a in actions][:17]
        theory = DefaultTheory.build(rules=rules)
        with pytest.raises(ScenarioCapError):
            proper_scenarios(theory)

    def test_priority_monotonicity_on_dilemma_family(self):
        without = proper_scenarios(DILEMMA)
        with_edge = proper_scenarios(DILEMMA_ORDERED)
        assert frozenset({D1.rule_id}) in without
        assert frozenset({D1.rule_id}) not in with_edge
        assert with_edge == {frozenset({D2.rule_id})}


class TestBeliefSets:
    def test_rescue_scenario_believes_rescue(self):
        beliefs = belief_set(DILEMMA, frozenset({D2.rule_id}))
        assert Var("rescue") in beliefs

    def test_exclusivity_gives_not_wait(self):
        beliefs = belief_set(DILEMMA, frozenset({D2.rule_id}))
        assert Not(Var("wait")) in beliefs

    def test_empty_theory_believes_nothing_contingent(self):
        theory = DefaultTheory.build(rules=[D1, D2], background=[], extra_atoms=EXTRA)
        beliefs = belief_set(theory, frozenset())
        assert Var("rescue") not in beliefs

    def test_unregistered_atom_query(self):
        beliefs = belief_set(DILEMMA, frozenset())
        with pytest.raises(UnknownAtomError):
            beliefs.holds(Var("mystery"))


class TestOughts:
    def test_dilemma_disjunctive_union(self):
        # Frozen from the oracle: union over the two extensions.
        names = {a.name for a in oughts(DILEMMA, "disjunctive")}
        assert names == {"wait", "rescue"}

    def test_dilemma_conflict_intersection_empty(self):
        assert oughts(DILEMMA, "conflict") == frozenset()

    def test_ordered_dilemma_both_accounts_agree(self):
        for account in ("disjunctive", "conflict"):
            assert {a.name for a in oughts(DILEMMA_ORDERED, account)} == {"rescue"}

    def test_unknown_account_rejected(self):
        with pytest.raises(ValueError):
            oughts(DILEMMA, "majority")


class TestInvariants:
    @settings(max_examples=120, deadline=None)
    @given(theories, st.data())
    def test_binding_structure(self, theory, data):
        ids = sorted(theory.rule_ids())
        scenario = frozenset(data.draw(st.sets(st.sampled_from(ids)) if ids else st.just(set())))
        b = binding(theory, scenario)
        assert b <= triggered(theory, scenario)
        assert not b & conflicted(theory, scenario)
        assert not b & defeated(theory, scenario)

    @settings(max_examples=60, deadline=None)
    @given(theories)
    def test_proper_scenarios_are_fixpoints(self, theory):
        for scenario in proper_scenarios(theory):
            assert binding(theory, scenario) == scenario

    @settings(max_examples=80, deadline=None)
    @given(theories, st.data())
    def test_monotone_triggering(self, theory, data):
        ids = sorted(theory.rule_ids())
        small = frozenset(data.draw(st.sets(st.sampled_from(ids)) if ids else st.just(set())))
        grow = frozenset(
            data.draw(st.sets(st.sampled_from(ids)) if ids else st.just(set()))
        )
        assert triggered(theory, small) <= triggered(theory, small | grow)

    @settings(max_examples=60, deadline=None)
    @given(theories)
    def test_conflict_oughts_within_disjunctive(self, theory):
        assert oughts(theory, "conflict") <= oughts(theory, "disjunctive")

    def test_matches_oracle_on_seeded_sample(self):
        rng = random.Random(20240811)
        for _ in range(40):
            theory = random_theory(rng)
            assert proper_scenarios(theory) == OracleScenarioChecker(theory).proper_scenarios()
