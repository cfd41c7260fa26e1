"""Deterministic re-execution of logged runs.

A run's header carries its full configuration and seed; re-running it
must reproduce every step record byte for byte (the header's wall-clock
field is the only thing excluded from comparison).  Replay also audits
shield compliance: every executed action must sit inside its own step's
permitted set.

Logs from live sessions replay too: their verdicts are re-applied from
the transcript instead of being recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bridge_env import BridgeEnv, EnvConfig
from .judge import Accusation, OracleJudge
from .learner import ReasonTheory
from .logs import canonical, step_records
from .loop import StepEngine
from .rl import QTable, RLConfig
from .theory_io import reason_theory_from_dict, registry_from_dict


@dataclass
class ReplayResult:
    matched: bool
    mismatches: list[tuple[int, str, str]] = field(default_factory=list)
    compliance_violations: list[int] = field(default_factory=list)
    regenerated: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.matched and not self.compliance_violations


def build_header(
    seed,
    constellation: str,
    episodes: int,
    env_config: EnvConfig,
    rl_config: RLConfig,
    theory_doc: dict,
    judge_mode: str,
    shield_cap: int,
    learn: bool,
    started_at: str,
) -> dict:
    return {
        "type": "header",
        "seed": seed,
        "constellation": constellation,
        "episodes": episodes,
        "env": {
            "person_move_prob": env_config.person_move_prob,
            "fall_prob": env_config.fall_prob,
            "drown_steps": env_config.drown_steps,
            "step_cost": env_config.step_cost,
            "delivery_reward": env_config.delivery_reward,
            "max_steps": env_config.max_steps,
        },
        "rl": {
            "alpha": rl_config.alpha,
            "gamma": rl_config.gamma,
            "epsilon_start": rl_config.epsilon_start,
            "epsilon_end": rl_config.epsilon_end,
        },
        "theory": theory_doc,
        "judge": judge_mode,
        "shield_cap": shield_cap,
        "learn": learn,
        "started_at": started_at,  # excluded from replay comparison
    }


def engine_from_header(header: dict, log_writer=None) -> StepEngine:
    env_config = EnvConfig.from_dict(header["env"])
    rl_config = RLConfig.from_dict(header["rl"])
    env = BridgeEnv(env_config)
    theory_doc = header["theory"]
    theory = reason_theory_from_dict(theory_doc)
    theory = ReasonTheory(rules=theory.rules, order=theory.order)  # revision restarts at 0
    registry = registry_from_dict(theory_doc, config=env_config)
    judge_mode = header["judge"]
    judge = None
    if judge_mode == "oracle":
        oracle_doc = header.get("oracle_theory", theory_doc)
        oracle_theory = reason_theory_from_dict(oracle_doc)
        judge = OracleJudge(oracle_theory, registry)
    qtable = QTable(alpha=rl_config.alpha, gamma=rl_config.gamma)
    return StepEngine(
        env=env,
        registry=registry,
        theory=theory,
        qtable=qtable,
        seed=header["seed"],
        constellation=header["constellation"],
        judge=judge,
        judge_mode=judge_mode,
        rl_config=rl_config,
        anneal_episodes=header["episodes"],
        shield_cap=header["shield_cap"],
        learn=header["learn"],
        log_writer=log_writer,
    )


def replay_records(records: list[dict]) -> ReplayResult:
    """Re-execute a logged run and compare step records exactly."""
    header = next(r for r in records if r.get("type") == "header")
    logged = step_records(records)
    engine = engine_from_header(header)

    regenerated: list[dict] = []
    for logged_record in logged:
        outcome = engine.step_once()
        if engine.judge_mode == "external":
            verdict = logged_record.get("verdict")
            if verdict is None:
                engine.resolve_verdict(None)
            else:
                engine.resolve_verdict(
                    Accusation(obligation=verdict["obligation"], reason=verdict["reason"]),
                    source=verdict.get("source", "human"),
                )
        regenerated.append(outcome.record)

    result = ReplayResult(matched=True, regenerated=regenerated)
    for i, (a, b) in enumerate(zip(logged, regenerated)):
        line_a, line_b = canonical(a), canonical(b)
        if line_a != line_b:
            result.matched = False
            result.mismatches.append((i, line_a, line_b))
    if len(logged) != len(regenerated):
        result.matched = False
    for i, record in enumerate(regenerated):
        if record["action"] not in record["shield"]["permitted"]:
            result.compliance_violations.append(i)
    return result


def audit_compliance(records: list[dict]) -> list[int]:
    """Indices of logged steps whose action fell outside the shield."""
    return [
        i
        for i, record in enumerate(step_records(records))
        if record["action"] not in record["shield"]["permitted"]
    ]
