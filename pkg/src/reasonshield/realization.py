"""Connecting action types to the primitive actions that realize them.

Each action type is identified with the set of primitive-action
trajectories that realize it in a state.  Planning works on the
deterministic skeleton of the dynamics: persons are frozen in place and
only the agent's own movement rules apply (water and the map edge block,
occupied bridge cells do not -- entering one is a push, which is
physically possible and therefore plannable).

Two planners cover the bridge domain:

* ``shortest-rescue`` -- trajectories that walk a shortest path to a
  solid cell adjacent to the nearest in-water person and end with
  ``pullOut``, provided that fits before the person drowns.  Only
  minimum-length realizations count, which is what makes the first-action
  set a real commitment (a single step toward the person) rather than
  "anything, eventually".
* ``avoid-bridge-entry`` -- trajectories that never move onto a bridge
  cell while a person is standing on the bridge.  With nobody on the
  bridge this is vacuous and admits everything.

``first_actions`` materializes the set of actions that begin at least
one realizing trajectory; an empty set means the type is unrealizable in
that state.  ``conflict_sets`` lifts this to rule sets: the subsets of
premise-matched rules whose obligations admit no common first action.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .bridge_env import ACTIONS, MOVE_DELTAS, PULL_OUT, Cell, EnvConfig, WorldState, labels_of
from .default_logic import DefaultRule
from .formulas import Atom, AtomKind


class UnknownActionTypeError(KeyError):
    pass


class UnknownPlannerError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """A finite primitive-action sequence with its planning horizon."""

    actions: tuple[str, ...]
    horizon: int

    def __post_init__(self) -> None:
        if not self.actions:
            raise ValueError("empty trajectory")
        if len(self.actions) > self.horizon + 1:
            raise ValueError("trajectory longer than horizon allows")


@dataclass(frozen=True)
class ActionType:
    atom: Atom
    planner: str
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self) -> None:
        if self.atom.kind is not AtomKind.ACTION:
            raise ValueError(f"action type atom must have action kind: {self.atom}")

    @classmethod
    def with_params(cls, atom: Atom, planner: str, params: dict | None = None) -> "ActionType":
        return cls(atom=atom, planner=planner, params=tuple(sorted((params or {}).items())))


def _distance_field(state: WorldState, targets: Iterable[Cell]) -> dict[Cell, int]:
    """BFS distances over solid cells to the nearest target cell."""
    grid = state.grid
    dist: dict[Cell, int] = {}
    queue: deque[Cell] = deque()
    for t in targets:
        if grid.is_solid(t):
            dist[t] = 0
            queue.append(t)
    while queue:
        cell = queue.popleft()
        for nxt in grid.neighbors(cell):
            if grid.is_solid(nxt) and nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


class RescuePlanner:
    """Shortest walk to a pull position for the nearest in-water person."""

    def __init__(self, config: EnvConfig, horizon: int | None = None):
        self.config = config
        self.horizon = horizon if horizon is not None else config.max_steps

    def _target_and_distance(self, state: WorldState):
        """Nearest in-water person (by rescue-path length) and the
        distance field to their pull positions; None if unrealizable."""
        waters = state.water_persons()
        if not waters:
            return None
        best = None
        for person in sorted(waters, key=lambda p: p.pid):
            pull_cells = [c for c in state.grid.neighbors(person.pos) if state.grid.is_solid(c)]
            if not pull_cells:
                continue
            dist = _distance_field(state, pull_cells)
            d = dist.get(state.agent)
            if d is None:
                continue
            if best is None or d < best[0]:
                best = (d, person, dist)
        return best

    def _budget(self, state: WorldState, person) -> int:
        """Steps available before the person drowns, counting pullOut."""
        remaining = person.entered_water_at + self.config.drown_steps - state.step
        return min(remaining, self.horizon + 1)

    def first_actions(self, state: WorldState) -> frozenset[str]:
        found = self._target_and_distance(state)
        if found is None:
            return frozenset()
        d, person, dist = found
        if d + 1 > self._budget(state, person):
            return frozenset()
        if d == 0:
            return frozenset({PULL_OUT})
        out = set()
        for action, (dx, dy) in MOVE_DELTAS.items():
            nxt = (state.agent[0] + dx, state.agent[1] + dy)
            if state.grid.is_solid(nxt) and dist.get(nxt) == d - 1:
                out.add(action)
        return frozenset(out)

    def realizes(self, actions: Sequence[str], state: WorldState) -> bool:
        found = self._target_and_distance(state)
        if found is None:
            return False
        d, person, dist = found
        if d + 1 > self._budget(state, person) or len(actions) != d + 1:
            return False
        if actions[-1] != PULL_OUT:
            return False
        pos = state.agent
        for step_index, action in enumerate(actions[:-1]):
            if action not in MOVE_DELTAS:
                return False
            dx, dy = MOVE_DELTAS[action]
            nxt = (pos[0] + dx, pos[1] + dy)
            if not state.grid.is_solid(nxt) or dist.get(nxt) != d - 1 - step_index:
                return False
            pos = nxt
        return dist.get(pos) == 0


class WaitPlanner:
    """Never move onto a bridge cell while somebody stands on the bridge."""

    def __init__(self, config: EnvConfig, horizon: int | None = None):
        self.config = config
        self.horizon = horizon if horizon is not None else config.max_steps

    @staticmethod
    def _bridge_occupied(state: WorldState) -> bool:
        return any(state.grid.is_bridge(p.pos) for p in state.persons)

    def _is_entry(self, state: WorldState, pos: Cell, action: str) -> bool:
        if action not in MOVE_DELTAS:
            return False
        dx, dy = MOVE_DELTAS[action]
        nxt = (pos[0] + dx, pos[1] + dy)
        if not state.grid.is_solid(nxt):
            return False  # blocked move, agent stays put
        return state.grid.is_bridge(nxt) and nxt != pos

    def first_actions(self, state: WorldState) -> frozenset[str]:
        if not self._bridge_occupied(state):
            return frozenset(ACTIONS)
        return frozenset(a for a in ACTIONS if not self._is_entry(state, state.agent, a))

    def realizes(self, actions: Sequence[str], state: WorldState) -> bool:
        if len(actions) > self.horizon + 1:
            return False
        if not self._bridge_occupied(state):
            return True  # persons are frozen in the skeleton: vacuous forever
        pos = state.agent
        for action in actions:
            if self._is_entry(state, pos, action):
                return False
            if action in MOVE_DELTAS:
                dx, dy = MOVE_DELTAS[action]
                nxt = (pos[0] + dx, pos[1] + dy)
                if state.grid.is_solid(nxt):
                    pos = nxt
        return True


PLANNERS = {
    "shortest-rescue": RescuePlanner,
    "avoid-bridge-entry": WaitPlanner,
}


class ActionTypeRegistry:
    """Realization map: per (action type, state) trajectory semantics.

    Queries are pure and memoized per state; clearing the cache never
    changes results.
    """

    def __init__(self, config: EnvConfig | None = None, horizon: int | None = None):
        self.config = config or EnvConfig()
        self.horizon = horizon
        self._planners: dict[str, object] = {}
        self._types: dict[str, ActionType] = {}
        self._cache: dict[tuple[str, WorldState], frozenset[str]] = {}

    def register(self, action_type: ActionType) -> None:
        if action_type.planner not in PLANNERS:
            raise UnknownPlannerError(f"unknown planner {action_type.planner!r}")
        params = dict(action_type.params)
        horizon = params.pop("horizon", self.horizon)
        if params:
            raise UnknownPlannerError(
                f"planner {action_type.planner!r} takes no params {sorted(params)}"
            )
        self._types[action_type.atom.name] = action_type
        self._planners[action_type.atom.name] = PLANNERS[action_type.planner](
            self.config, horizon
        )

    def action_type_names(self) -> frozenset[str]:
        return frozenset(self._types)

    def action_type(self, name: str) -> ActionType:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownActionTypeError(f"action type {name!r} not registered") from None

    def _planner(self, name: str):
        try:
            return self._planners[name]
        except KeyError:
            raise UnknownActionTypeError(f"action type {name!r} not registered") from None

    def first_actions(self, type_name: str, state: WorldState) -> frozenset[str]:
        key = (type_name, state)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._planner(type_name).first_actions(state)
            if len(self._cache) > 8192:
                self._cache.clear()
            self._cache[key] = cached
        return cached

    def realizes(self, trajectory: Trajectory | Sequence[str], type_name: str, state: WorldState) -> bool:
        actions = trajectory.actions if isinstance(trajectory, Trajectory) else tuple(trajectory)
        for a in actions:
            if a not in ACTIONS:
                raise ValueError(f"unknown action {a!r}")
        return self._planner(type_name).realizes(actions, state)

    def clear_cache(self) -> None:
        self._cache.clear()


def conflict_sets(
    registry: ActionTypeRegistry,
    rules: Iterable[DefaultRule],
    state: WorldState,
) -> frozenset[frozenset[str]]:
    """Rule subsets with matched premises but no common first action.

    Only rules whose premise is among the state's labels are considered;
    the empty subset never conflicts (the intersection over no
    obligations is the whole action alphabet).
    """
    labels = labels_of(state)
    relevant = sorted(
        (r for r in rules if r.premise.name in labels), key=lambda r: r.rule_id
    )
    firsts = {r.rule_id: registry.first_actions(r.conclusion.name, state) for r in relevant}
    out = []
    for bits in range(1, 1 << len(relevant)):
        subset = [relevant[i] for i in range(len(relevant)) if bits >> i & 1]
        common = frozenset(ACTIONS)
        for r in subset:
            common &= firsts[r.rule_id]
        if not common:
            out.append(frozenset(r.rule_id for r in subset))
    return frozenset(out)
