"""Command-line shell: train, eval, replay, reason, serve.

A config file can be given with ``--config`` or through the
``REASONSHIELD_CONFIG`` environment variable.  Failures in inputs
(malformed config or theory files, unknown names) exit nonzero with a
single machine-readable JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

CONFIG_ENV_VAR = "REASONSHIELD_CONFIG"

from .bridge_env import CONSTELLATIONS, BridgeEnv, EnvConfig, GridMap
from .bridge_domain import action_type_specs, build_registry, exemplary_theory, unordered_theory
from .default_logic import DefaultTheory, oughts, proper_scenarios
from .formulas import Atom, AtomKind, Not, Var, conj
from .judge import OracleJudge
from .learner import ReasonTheory
from .logs import JsonlWriter, read_jsonl
from .loop import run_loop
from .replay import audit_compliance, build_header, replay_records
from .rl import QTable, RLConfig
from .theory_io import (
    TheoryFormatError,
    load_reason_theory,
    reason_theory_to_dict,
    registry_from_dict,
    save_reason_theory,
)


class CliError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def _fail(code: str, message: str) -> "NoReturn":
    raise CliError(code, message)


def _load_config(path: str | None) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        _fail("config-missing", f"config file not found: {path}")
    except json.JSONDecodeError as err:
        _fail("config-malformed", f"config is not valid JSON: {err}")
    if not isinstance(data, dict):
        _fail("config-malformed", "config must be a JSON object")
    return data


def _builtin_theory(name: str) -> ReasonTheory:
    builtin = {
        "builtin:exemplary": exemplary_theory,
        "builtin:unordered": unordered_theory,
        "builtin:empty": ReasonTheory,
    }
    return builtin[name]()


def _load_theory(path: str | None, default: str = "builtin:unordered"):
    """Reason theory plus its serializable doc (with actionTypes)."""
    spec = path or default
    if spec.startswith("builtin:"):
        try:
            theory = _builtin_theory(spec)
        except KeyError:
            _fail("theory-unknown", f"unknown builtin theory {spec!r}")
        doc = reason_theory_to_dict(theory)
        doc["actionTypes"] = action_type_specs()
        return theory, doc
    try:
        theory, doc = load_reason_theory(spec)
    except FileNotFoundError:
        _fail("theory-missing", f"theory file not found: {spec}")
    except TheoryFormatError as err:
        _fail("theory-malformed", str(err))
    doc = dict(doc)
    doc.setdefault("actionTypes", action_type_specs())
    doc.update(reason_theory_to_dict(theory))
    return theory, doc


def _setup(config: dict, theory_path: str | None, default_theory: str):
    try:
        env_config = EnvConfig.from_dict(config.get("env", {}))
        rl_config = RLConfig.from_dict(config.get("rl", {}))
    except ValueError as err:
        _fail("config-malformed", str(err))
    grid = None
    if "map" in config:
        try:
            spec = config["map"]
            grid = GridMap.from_rows(
                spec["rows"], spec.get("spawn_row", 0), spec.get("goal_row")
            )
        except (KeyError, ValueError) as err:
            _fail("config-malformed", f"bad map section: {err}")
    theory, theory_doc = _load_theory(theory_path or config.get("theory"), default_theory)
    env = BridgeEnv(env_config, grid)
    registry = registry_from_dict(theory_doc, config=env_config)
    if not registry.action_type_names():
        registry = build_registry(env_config)
    return env, env_config, rl_config, theory, theory_doc, registry


def cmd_train(args) -> int:
    config = _load_config(args.config)
    env, env_config, rl_config, theory, theory_doc, registry = _setup(
        config, args.theory, "builtin:unordered"
    )
    constellation = args.constellation or config.get("constellation", "dilemma")
    if constellation not in CONSTELLATIONS:
        _fail("constellation-unknown", f"unknown constellation {constellation!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    judge = None
    header_judge = "none"
    oracle_doc = None
    if args.judge == "oracle":
        oracle_theory, oracle_doc = _load_theory(args.oracle_theory, "builtin:exemplary")
        judge = OracleJudge(oracle_theory, registry)
        header_judge = "oracle"

    qtable = QTable(alpha=rl_config.alpha, gamma=rl_config.gamma)
    header = build_header(
        seed=args.seed,
        constellation=constellation,
        episodes=args.episodes,
        env_config=env_config,
        rl_config=rl_config,
        theory_doc=theory_doc,
        judge_mode=header_judge,
        shield_cap=config.get("shield_cap", 16),
        learn=True,
        started_at=datetime.datetime.now().isoformat(),
    )
    if oracle_doc is not None:
        header["oracle_theory"] = oracle_doc

    snapshots = out / "theory_revisions"
    snapshots.mkdir(exist_ok=True)

    def snapshot(new_theory: ReasonTheory) -> None:
        save_reason_theory(
            new_theory, snapshots / f"rev{new_theory.revision:04d}.json", action_type_specs()
        )

    with JsonlWriter(out / "episodes.jsonl") as log:
        log.write(header)
        final_theory, metrics = run_loop(
            qtable,
            env,
            judge,
            theory,
            args.episodes,
            seed=args.seed,
            registry=registry,
            constellation=constellation,
            rl_config=rl_config,
            shield_cap=header["shield_cap"],
            log_writer=log,
            theory_snapshot=snapshot,
        )

    save_reason_theory(final_theory, out / "theory.json", action_type_specs())
    (out / "qtable.json").write_text(json.dumps(qtable.to_dict(), indent=2))
    metrics.write_csv(out / "metrics.csv")
    print(json.dumps({"out": str(out), **metrics.totals()}, indent=2))
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    env, env_config, rl_config, theory, theory_doc, registry = _setup(
        config, args.theory, "builtin:exemplary"
    )
    constellation = args.constellation or config.get("constellation", "dilemma")
    if constellation not in CONSTELLATIONS:
        _fail("constellation-unknown", f"unknown constellation {constellation!r}")
    qtable = QTable(alpha=rl_config.alpha, gamma=rl_config.gamma, epsilon=args.epsilon)
    if args.qtable:
        qtable = QTable.from_dict(json.loads(Path(args.qtable).read_text()))
        qtable.epsilon = args.epsilon
    log = None
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        log = JsonlWriter(Path(args.out) / "episodes.jsonl")
        header = build_header(
            seed=args.seed,
            constellation=constellation,
            episodes=args.episodes,
            env_config=env_config,
            rl_config=rl_config,
            theory_doc=theory_doc,
            judge_mode="none",
            shield_cap=config.get("shield_cap", 16),
            learn=False,
            started_at=datetime.datetime.now().isoformat(),
        )
        log.write(header)
    _, metrics = run_loop(
        qtable,
        env,
        None,
        theory,
        args.episodes,
        seed=args.seed,
        registry=registry,
        constellation=constellation,
        rl_config=None,
        learn=False,
        log_writer=log,
    )
    if log is not None:
        log.close()
        metrics.write_csv(Path(args.out) / "metrics.csv")
    print(json.dumps(metrics.totals(), indent=2))
    return 0


def cmd_replay(args) -> int:
    try:
        records = read_jsonl(args.log)
    except FileNotFoundError:
        _fail("log-missing", f"log file not found: {args.log}")
    result = replay_records(records)
    violations = audit_compliance(records)
    report = {
        "steps": len(result.regenerated),
        "matched": result.matched,
        "mismatches": len(result.mismatches),
        "compliance_violations": violations,
    }
    print(json.dumps(report, indent=2))
    if not result.matched or violations:
        for i, logged, regen in result.mismatches[:5]:
            sys.stderr.write(f"mismatch at step {i}:\n  logged: {logged}\n  replay: {regen}\n")
        return 1
    return 0


def cmd_reason(args) -> int:
    theory, theory_doc = _load_theory(args.theory, "builtin:exemplary")
    labels = [s for s in (args.labels.split(",") if args.labels else []) if s]
    background = [Var(name) for name in labels]
    extra_atoms = {Atom(name, AtomKind.LABEL) for name in labels}
    action_names = {r.conclusion.name for r in theory.rules}
    for group in args.exclusive or []:
        names = [s for s in group.split(",") if s]
        if len(names) < 2:
            _fail("exclusive-malformed", f"--exclusive needs >= 2 action types, got {group!r}")
        unknown = [n for n in names if n not in action_names]
        if unknown:
            _fail("exclusive-unknown", f"action types not in theory: {unknown}")
        background.append(Not(conj([Var(n) for n in sorted(names)])))
    try:
        full = DefaultTheory.build(
            rules=theory.rules,
            order=theory.order,
            background=background,
            extra_atoms=frozenset(extra_atoms),
        )
    except ValueError as err:
        _fail("theory-malformed", str(err))
    proper = sorted(sorted(s) for s in proper_scenarios(full))
    report = {
        "labels": labels,
        "proper_scenarios": proper,
        "oughts": {
            "disjunctive": sorted(a.name for a in oughts(full, "disjunctive")),
            "conflict": sorted(a.name for a in oughts(full, "conflict")),
        },
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(console_dir=args.console)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reasonshield")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train with the shield and optional judge")
    train.add_argument("--config", default=None)
    train.add_argument("--episodes", type=int, default=100)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--judge", choices=["oracle", "none"], default="oracle")
    train.add_argument("--theory", default=None, help="path or builtin:{empty,unordered,exemplary}")
    train.add_argument("--oracle-theory", default=None)
    train.add_argument("--constellation", default=None, choices=CONSTELLATIONS)
    train.add_argument("--out", default="run")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="run a frozen theory, no learning")
    ev.add_argument("--config", default=None)
    ev.add_argument("--theory", default=None)
    ev.add_argument("--qtable", default=None)
    ev.add_argument("--constellation", default=None, choices=CONSTELLATIONS)
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--epsilon", type=float, default=1.0)
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_eval)

    replay = sub.add_parser("replay", help="re-execute a log and verify it")
    replay.add_argument("--log", required=True)
    replay.set_defaults(func=cmd_replay)

    reason = sub.add_parser("reason", help="query proper scenarios and oughts")
    reason.add_argument("--theory", default=None)
    reason.add_argument("--labels", default="")
    reason.add_argument(
        "--exclusive",
        action="append",
        default=[],
        help="comma-separated action types that are mutually exclusive; repeatable",
    )
    reason.set_defaults(func=cmd_reason)

    serve = sub.add_parser("serve", help="start the live session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument(
        "--console", default=None, help="directory with the built judge console to host at /console"
    )
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        sys.stderr.write(json.dumps({"error": err.code, "message": err.message}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
