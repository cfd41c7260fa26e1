"""The outer loop tying environment, shield, policy, judge, and learner.

Per step: read the state and its labels, build the background, derive
the proper scenarios, draw one, shield the action space, let the policy
choose inside the shield, execute, and -- when a judge is wired in --
submit the step for judgment and repair the reason theory from any
accusation before the next decision is made.  The repaired theory is in
force immediately, so the very next shield already reflects it.

All randomness is split into three named streams (environment dynamics,
scenario tie-break, policy exploration), each re-seeded per episode from
the run seed, which makes whole runs replayable from their logs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bridge_env import ACTIONS, BridgeEnv, WorldState, labels_of
from .judge import Accusation, InvalidVerdictError, OracleJudge, validate_accusation
from .learner import (
    Feedback,
    InconsistentFeedbackError,
    ReasonTheory,
    apply_feedback,
)
from .realization import ActionTypeRegistry
from .rl import QTable, RLConfig, state_key
from .shield import Shield, generate_shield


@dataclass
class EpisodeStats:
    episode: int
    steps: int = 0
    return_: float = 0.0
    accusations: int = 0
    pushes: int = 0
    drownings: int = 0
    rescues: int = 0
    delivered: bool = False


@dataclass
class RunMetrics:
    episodes: list[EpisodeStats] = field(default_factory=list)

    def totals(self) -> dict:
        return {
            "episodes": len(self.episodes),
            "accusations": sum(e.accusations for e in self.episodes),
            "pushes": sum(e.pushes for e in self.episodes),
            "drownings": sum(e.drownings for e in self.episodes),
            "rescues": sum(e.rescues for e in self.episodes),
            "deliveries": sum(e.delivered for e in self.episodes),
            "mean_return": (
                sum(e.return_ for e in self.episodes) / len(self.episodes)
                if self.episodes
                else 0.0
            ),
        }

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["episode", "steps", "return", "accusations", "pushes", "drownings", "rescues", "delivered"]
            )
            for e in self.episodes:
                writer.writerow(
                    [e.episode, e.steps, e.return_, e.accusations, e.pushes, e.drownings, e.rescues, int(e.delivered)]
                )


@dataclass(frozen=True)
class StepOutcome:
    record: dict
    shield: Shield
    state_before: WorldState
    labels: frozenset[str]
    action: str
    terminal: bool
    awaiting_verdict: bool


def shield_to_dict(shield: Shield) -> dict:
    from .formulas import format_formula

    return {
        "permitted": [a for a in ACTIONS if a in shield.permitted],
        "chosen": sorted(shield.chosen),
        "proper": sorted([sorted(s) for s in shield.proper]),
        "background": sorted(format_formula(f) for f in shield.background),
        "ought": shield.ought,
    }


class StepEngine:
    """Drives one run: episodes, shields, learning, judging, logging.

    ``judge_mode`` is "oracle" (accusations computed and applied inline),
    "none" (never judged), or "external" (each step pauses until
    resolve_verdict is called -- the live-human path).
    """

    def __init__(
        self,
        env: BridgeEnv,
        registry: ActionTypeRegistry,
        theory: ReasonTheory,
        qtable: QTable,
        seed,
        constellation: str = "none",
        judge: OracleJudge | None = None,
        judge_mode: str = "oracle",
        rl_config: RLConfig | None = None,
        anneal_episodes: int | None = None,
        shield_cap: int = 16,
        learn: bool = True,
        log_writer=None,
        theory_snapshot=None,
    ):
        if judge_mode not in ("oracle", "none", "external"):
            raise ValueError(f"unknown judge mode {judge_mode!r}")
        if judge_mode == "oracle" and judge is None:
            raise ValueError("oracle judge mode requires a judge")
        self.env = env
        self.registry = registry
        self.theory = theory
        self.qtable = qtable
        self.seed = seed
        self.constellation = constellation
        self.judge = judge
        self.judge_mode = judge_mode
        self.rl_config = rl_config
        self.anneal_episodes = anneal_episodes
        self.shield_cap = shield_cap
        self.learn = learn
        self.log_writer = log_writer
        self.theory_snapshot = theory_snapshot
        self.episode = -1
        self.state: WorldState | None = None
        self.metrics = RunMetrics()
        self._stats: EpisodeStats | None = None
        self._pending_td: tuple | None = None
        self._awaiting: StepOutcome | None = None
        self._env_rng: random.Random | None = None
        self._shield_rng: random.Random | None = None
        self._policy_rng: random.Random | None = None

    # -- episode plumbing ---------------------------------------------

    def begin_episode(self) -> WorldState:
        self.episode += 1
        base = f"{self.seed}:{self.episode}"
        self._env_rng = random.Random(f"{base}:env")
        self._shield_rng = random.Random(f"{base}:shield")
        self._policy_rng = random.Random(f"{base}:policy")
        self.state = self.env.reset(f"{base}:reset", self.constellation)
        self._stats = EpisodeStats(episode=self.episode)
        self.metrics.episodes.append(self._stats)
        self._pending_td = None
        if self.rl_config is not None:
            horizon = self.anneal_episodes or 1
            self.qtable.epsilon = self.rl_config.epsilon_at(self.episode, horizon)
        return self.state

    def episode_done(self) -> bool:
        return self.state is None or self.env.is_terminal(self.state)

    # -- stepping -------------------------------------------------------

    def step_once(self) -> StepOutcome:
        if self._awaiting is not None:
            raise RuntimeError("a verdict is pending; resolve it before stepping")
        if self.episode_done():
            self.begin_episode()
        state = self.state
        labels = labels_of(state)
        shield = generate_shield(
            self.theory, self.registry, state, self._shield_rng, cap=self.shield_cap
        )
        key = state_key(state, self.env.config.drown_steps)
        if self.learn and self._pending_td is not None:
            prev_key, prev_action, prev_reward = self._pending_td
            self.qtable.update(prev_key, prev_action, prev_reward, key, shield.permitted, False)
            self._pending_td = None
        action = self.qtable.select_action(key, shield.permitted, self._policy_rng)
        transition = self.env.step(state, action, self._env_rng)

        stats = self._stats
        stats.steps += 1
        stats.return_ += transition.reward
        for event in transition.events:
            if event[0] == "push":
                stats.pushes += 1
            elif event[0] == "drowned":
                stats.drownings += 1
            elif event[0] == "rescue":
                stats.rescues += 1
            elif event[0] == "delivered":
                stats.delivered = True

        if self.learn:
            if transition.terminal:
                self.qtable.update(key, action, transition.reward, key, (), True)
            else:
                self._pending_td = (key, action, transition.reward)

        record = {
            "type": "step",
            "episode": self.episode,
            "t": state.step,
            "revision": self.theory.revision,
            "digest": state.digest(),
            "labels": sorted(labels),
            "shield": shield_to_dict(shield),
            "action": action,
            "reward": transition.reward,
            "terminal": transition.terminal,
            "events": [list(e) for e in transition.events],
            "verdict": None,
        }
        outcome = StepOutcome(
            record=record,
            shield=shield,
            state_before=state,
            labels=labels,
            action=action,
            terminal=transition.terminal,
            awaiting_verdict=self.judge_mode == "external",
        )
        self.state = transition.next_state

        if self.judge_mode == "oracle":
            accusation = self.judge.judge(state, labels, action)
            self._resolve(outcome, accusation, source="oracle")
        elif self.judge_mode == "none":
            self._emit(record)
        else:
            self._awaiting = outcome
        return outcome

    def resolve_verdict(self, accusation: Accusation | None, source: str = "human") -> int:
        """Close out a pending external verdict; returns theory revision.

        Raises InvalidVerdictError / InconsistentFeedbackError without
        consuming the pending step, so a corrected verdict can follow.
        """
        if self._awaiting is None:
            raise RuntimeError("no verdict pending")
        outcome = self._awaiting
        if accusation is not None:
            validate_accusation(
                self.registry, accusation, outcome.state_before, outcome.labels, outcome.action
            )
        self._resolve(outcome, accusation, source=source)
        self._awaiting = None
        return self.theory.revision

    def _resolve(self, outcome: StepOutcome, accusation: Accusation | None, source: str) -> None:
        record = outcome.record
        if accusation is not None:
            feedback = Feedback(
                obligation=accusation.obligation,
                reason=accusation.reason,
                state_digest=outcome.state_before.digest(),
                step=outcome.state_before.step,
                chosen=outcome.shield.chosen,
            )
            self.theory = apply_feedback(self.theory, feedback, outcome.shield.chosen)
            self._stats.accusations += 1
            record["verdict"] = {
                "t": outcome.state_before.step,
                "obligation": accusation.obligation,
                "reason": accusation.reason,
                "source": source,
            }
            if self.theory_snapshot is not None:
                self.theory_snapshot(self.theory)
        self._emit(record)

    def _emit(self, record: dict) -> None:
        if self.log_writer is not None:
            self.log_writer.write(record)

    def run_episode(self) -> EpisodeStats:
        if self.judge_mode == "external":
            raise RuntimeError("external judge mode cannot run unattended episodes")
        self.begin_episode()
        while not self.episode_done():
            self.step_once()
        return self._stats


def run_loop(
    qtable: QTable,
    env: BridgeEnv,
    judge: OracleJudge | None,
    theory: ReasonTheory,
    episodes: int,
    seed,
    registry: ActionTypeRegistry,
    constellation: str = "dilemma",
    rl_config: RLConfig | None = None,
    shield_cap: int = 16,
    learn: bool = True,
    log_writer=None,
    theory_snapshot=None,
) -> tuple[ReasonTheory, RunMetrics]:
    """Run a batch of episodes; returns the final theory and metrics."""
    engine = StepEngine(
        env=env,
        registry=registry,
        theory=theory,
        qtable=qtable,
        seed=seed,
        constellation=constellation,
        judge=judge,
        judge_mode="oracle" if judge is not None else "none",
        rl_config=rl_config,
        anneal_episodes=episodes,
        shield_cap=shield_cap,
        learn=learn,
        log_writer=log_writer,
        theory_snapshot=theory_snapshot,
    )
    for _ in range(episodes):
        engine.run_episode()
    return engine.theory, engine.metrics
