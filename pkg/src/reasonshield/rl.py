"""Tabular instrumental learning under the moral shield.

One-step temporal-difference learning over a dict-backed Q table.
Action selection is epsilon-greedy restricted to the shield's permitted
set, with ties broken by the fixed action order.  The bootstrap target
maxes over the *next* state's permitted set rather than the full
alphabet, so values reflect behavior the shield will actually allow.

The state key abstracts the drowning timer into safe/urgent buckets to
keep the table small; everything else (agent, goal, person cells and
water flags) enters exactly.
"""

from __future__ import annotations

import ast
import random
from dataclasses import dataclass, field
from typing import Iterable

from .bridge_env import ACTIONS, WorldState

URGENT_WITHIN = 5  # steps of drowning margin below which a timer is "urgent"

StateKey = tuple


def state_key(state: WorldState, drown_steps: int = 15) -> StateKey:
    persons = []
    for p in sorted(state.persons, key=lambda p: p.pid):
        if p.in_water:
            remaining = p.entered_water_at + drown_steps - state.step
            bucket = "urgent" if remaining <= URGENT_WITHIN else "safe"
        else:
            bucket = None
        persons.append((p.pos, p.in_water, bucket))
    return (state.agent, state.goal, tuple(persons), state.carrying)


@dataclass
class QTable:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon: float = 1.0
    values: dict = field(default_factory=dict)

    def value(self, key: StateKey, action: str) -> float:
        return self.values.get((key, action), 0.0)

    def best_value(self, key: StateKey, permitted: Iterable[str]) -> float:
        permitted = list(permitted)
        if not permitted:
            return 0.0
        return max(self.value(key, a) for a in permitted)

    def select_action(
        self, key: StateKey, permitted: frozenset[str], rng: random.Random
    ) -> str:
        """Epsilon-greedy over the permitted set, fixed-order tie-break."""
        ordered = [a for a in ACTIONS if a in permitted]
        if not ordered:
            raise ValueError("empty shield: no permitted action to select")
        if rng.random() < self.epsilon:
            return ordered[rng.randrange(len(ordered))]
        best = ordered[0]
        best_q = self.value(key, best)
        for a in ordered[1:]:
            q = self.value(key, a)
            if q > best_q:
                best, best_q = a, q
        return best

    def update(
        self,
        key: StateKey,
        action: str,
        reward: float,
        next_key: StateKey,
        next_permitted: Iterable[str],
        terminal: bool,
    ) -> "QTable":
        target = reward
        if not terminal:
            target += self.gamma * self.best_value(next_key, next_permitted)
        old = self.value(key, action)
        self.values[(key, action)] = old + self.alpha * (target - old)
        return self

    def snapshot(self) -> dict:
        return dict(self.values)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "entries": [
                {"key": repr(key), "action": action, "value": value}
                for (key, action), value in sorted(
                    self.values.items(), key=lambda kv: (repr(kv[0][0]), kv[0][1])
                )
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QTable":
        table = cls(
            alpha=data.get("alpha", 0.1),
            gamma=data.get("gamma", 0.95),
            epsilon=data.get("epsilon", 1.0),
        )
        for entry in data.get("entries", []):
            key = ast.literal_eval(entry["key"])
            table.values[(key, entry["action"])] = entry["value"]
        return table


@dataclass(frozen=True)
class RLConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05

    @classmethod
    def from_dict(cls, data: dict) -> "RLConfig":
        known = {f for f in cls.__dataclass_fields__}
        stray = set(data) - known
        if stray:
            raise ValueError(f"unknown rl config keys: {sorted(stray)}")
        return cls(**data)

    def epsilon_at(self, episode: int, total_episodes: int) -> float:
        """Linear anneal from start to end over the run."""
        if total_episodes <= 1:
            return self.epsilon_end
        frac = min(1.0, episode / (total_episodes - 1))
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
