"""Shared fixtures, hypothesis strategies, and independent oracles.

The oracles here deliberately avoid the package's bitmask machinery:
entailment walks explicit assignment dictionaries, and the scenario
oracle works on frozensets of satisfying-assignment indices.  They are
the second route for every dual-route check.
"""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import strategies as st

from reasonshield.bridge_domain import (
    build_registry,
    exemplary_theory,
    unordered_theory,
)
from reasonshield.bridge_env import BridgeEnv
from reasonshield.default_logic import DefaultRule, DefaultTheory, PriorityOrder
from reasonshield.formulas import And, Atom, AtomKind, Formula, Not, Var

# ---------------------------------------------------------------------------
# independent entailment oracle
# ---------------------------------------------------------------------------


def eval_formula(formula: Formula, assignment: dict[str, bool]) -> bool:
    if isinstance(formula, Var):
        return assignment[formula.name]
    if isinstance(formula, Not):
        return not eval_formula(formula.sub, assignment)
    if isinstance(formula, And):
        return eval_formula(formula.left, assignment) and eval_formula(formula.right, assignment)
    raise TypeError(formula)


def collect_atoms(formula: Formula) -> set[str]:
    if isinstance(formula, Var):
        return {formula.name}
    if isinstance(formula, Not):
        return collect_atoms(formula.sub)
    return collect_atoms(formula.left) | collect_atoms(formula.right)


def oracle_entails(premises, goal) -> bool:
    atoms = sorted(set().union(collect_atoms(goal), *(collect_atoms(f) for f in premises)))
    for values in itertools.product((False, True), repeat=len(atoms)):
        assignment = dict(zip(atoms, values))
        if all(eval_formula(f, assignment) for f in premises) and not eval_formula(
            goal, assignment
        ):
            return False
    return True


# ---------------------------------------------------------------------------
# independent proper-scenario oracle (satisfying-index sets, own closure)
# ---------------------------------------------------------------------------


def _oracle_closure(edges) -> set[tuple[str, str]]:
    nodes = sorted({x for e in edges for x in e})
    reach = {(a, b) for a, b in edges}
    for mid in nodes:
        for a in nodes:
            for b in nodes:
                if (a, mid) in reach and (mid, b) in reach:
                    reach.add((a, b))
    return reach


class OracleScenarioChecker:
    """Checks S = Binding(S) per subset with assignment-index sets."""

    def __init__(self, theory: DefaultTheory):
        self.theory = theory
        self.atoms = sorted(a.name for a in theory.atoms)
        self.assignments = [
            dict(zip(self.atoms, values))
            for values in itertools.product((False, True), repeat=len(self.atoms))
        ]
        self._sat_cache: dict = {}
        self.all_indices = frozenset(range(len(self.assignments)))
        self.w_sat = self.all_indices
        for f in theory.background:
            self.w_sat &= self.sat(f)
        self.rules = sorted(theory.rules, key=lambda r: r.rule_id)
        self.closure = _oracle_closure(theory.order.edges)

    def sat(self, formula: Formula) -> frozenset[int]:
        cached = self._sat_cache.get(formula)
        if cached is None:
            cached = frozenset(
                i for i, a in enumerate(self.assignments) if eval_formula(formula, a)
            )
            self._sat_cache[formula] = cached
        return cached

    def context(self, scenario) -> frozenset[int]:
        ctx = self.w_sat
        by_id = {r.rule_id: r for r in self.rules}
        for rule_id in scenario:
            ctx &= self.sat(Var(by_id[rule_id].conclusion.name))
        return ctx

    def binding(self, scenario) -> frozenset[str]:
        ctx = self.context(scenario)
        triggered = {
            r.rule_id for r in self.rules if ctx <= self.sat(Var(r.premise.name))
        }
        conflicted = {
            r.rule_id for r in self.rules if not ctx & self.sat(Var(r.conclusion.name))
        }
        defeated = set()
        for r in self.rules:
            for other in self.rules:
                if (r.rule_id, other.rule_id) not in self.closure:
                    continue
                if other.rule_id not in triggered:
                    continue
                with_conc = self.w_sat & self.sat(Var(other.conclusion.name))
                if not with_conc & self.sat(Var(r.conclusion.name)):
                    defeated.add(r.rule_id)
                    break
        return frozenset(triggered - conflicted - defeated)

    def proper_scenarios(self) -> frozenset[frozenset[str]]:
        ids = [r.rule_id for r in self.rules]
        out = []
        for bits in range(1 << len(ids)):
            scenario = frozenset(ids[i] for i in range(len(ids)) if bits >> i & 1)
            if self.binding(scenario) == scenario:
                out.append(scenario)
        return frozenset(out)


# ---------------------------------------------------------------------------
# random theory generation (seeded, shared by property and acceptance tests)
# ---------------------------------------------------------------------------

LABEL_POOL = ("p", "q", "r")
ACTION_POOL = ("u", "v", "x")


def random_formula(rng: random.Random, atoms, depth: int = 2) -> Formula:
    if depth <= 0 or rng.random() < 0.4:
        return Var(rng.choice(atoms))
    if rng.random() < 0.5:
        return Not(random_formula(rng, atoms, depth - 1))
    return And(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))


def random_theory(rng: random.Random, max_rules: int = 8) -> DefaultTheory:
    pairs = [(l, a) for l in LABEL_POOL for a in ACTION_POOL]
    rng.shuffle(pairs)
    count = rng.randint(1, min(max_rules, len(pairs)))
    rules = [
        DefaultRule(Atom(l, AtomKind.LABEL), Atom(a, AtomKind.ACTION))
        for l, a in pairs[:count]
    ]
    # Acyclic order: edges only run upward through a random ranking.
    ranked = [r.rule_id for r in rules]
    rng.shuffle(ranked)
    edges = set()
    for i, lower in enumerate(ranked):
        for higher in ranked[i + 1:]:
            if rng.random() < 0.25:
                edges.add((lower, higher))
    atoms = frozenset(
        {Atom(l, AtomKind.LABEL) for l in LABEL_POOL}
        | {Atom(a, AtomKind.ACTION) for a in ACTION_POOL}
    )
    atom_names = sorted(a.name for a in atoms)
    background = frozenset(
        random_formula(rng, atom_names) for _ in range(rng.randint(0, 3))
    )
    return DefaultTheory(
        atoms=atoms,
        background=background,
        rules=frozenset(rules),
        order=PriorityOrder(frozenset(edges)),
    )


# ---------------------------------------------------------------------------
# hypothesis strategies
# ---------------------------------------------------------------------------

ATOM_NAMES = st.sampled_from(list(LABEL_POOL + ACTION_POOL) + ["y", "z", "w2", "k"])


def formulas(atom_names=ATOM_NAMES, max_leaves: int = 6) -> st.SearchStrategy:
    return st.recursive(
        atom_names.map(Var),
        lambda inner: st.one_of(
            inner.map(Not),
            st.tuples(inner, inner).map(lambda pair: And(*pair)),
        ),
        max_leaves=max_leaves,
    )


theories = st.integers(min_value=0, max_value=2**32 - 1).map(
    lambda seed: random_theory(random.Random(seed))
)


# ---------------------------------------------------------------------------
# bridge fixtures
# ---------------------------------------------------------------------------


@pytest.fixture
def env() -> BridgeEnv:
    return BridgeEnv()


@pytest.fixture
def registry(env):
    return build_registry(env.config)


@pytest.fixture
def dilemma_state(env):
    return env.reset(42, "dilemma")


@pytest.fixture
def naive_theory():
    return unordered_theory()


@pytest.fixture
def learned_theory():
    return exemplary_theory()
