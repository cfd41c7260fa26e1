#!/usr/bin/env python3
"""Walk through the dilemma learning story on the console.

Starts from a theory that knows both reasons but ranks neither, lets
the oracle judge watch seeded dilemma episodes, and prints the moment
the accusation lands, the repaired order, and the before/after shields
at the dilemma decision point.
"""

import argparse
import random

from reasonshield.bridge_domain import build_registry, exemplary_theory, unordered_theory
from reasonshield.bridge_env import BridgeEnv, labels_of
from reasonshield.judge import OracleJudge
from reasonshield.logs import ListWriter
from reasonshield.loop import run_loop
from reasonshield.rl import QTable, RLConfig
from reasonshield.shield import generate_shield


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--episodes", type=int, default=10)
    args = parser.parse_args()

    env = BridgeEnv()
    registry = build_registry(env.config)
    state = env.reset(42, "dilemma")

    print("Dilemma decision point: agent", state.agent, "labels", sorted(labels_of(state)))
    theory = unordered_theory()
    print("\nBefore learning (no priority order):")
    for seed in (0, 1, 2, 3):
        shield = generate_shield(theory, registry, state, random.Random(seed))
        print(f"  seed {seed}: picked {sorted(shield.chosen)} -> permitted {sorted(shield.permitted)}")

    log = ListWriter()
    judge = OracleJudge(exemplary_theory(), registry)
    learned, metrics = run_loop(
        QTable(),
        env,
        judge,
        theory,
        args.episodes,
        seed=args.seed,
        registry=registry,
        constellation="dilemma",
        rl_config=RLConfig(),
        log_writer=log,
    )

    accused = next(r for r in log.records if r["verdict"])
    print(
        f"\nAccusation at episode {accused['episode']}, t={accused['t']}: "
        f"after action {accused['action']!r} the judge returned "
        f"({accused['verdict']['obligation']}, {accused['verdict']['reason']})"
    )
    print("Repaired order:", sorted(learned.order.edges), "revision", learned.revision)

    print("\nAfter learning:")
    for seed in (0, 1, 2, 3):
        shield = generate_shield(learned, registry, state, random.Random(seed))
        print(f"  seed {seed}: picked {sorted(shield.chosen)} -> permitted {sorted(shield.permitted)}")

    totals = metrics.totals()
    print(
        f"\n{totals['episodes']} episodes: {totals['accusations']} accusation(s), "
        f"{totals['rescues']} rescues, {totals['deliveries']} deliveries"
    )


if __name__ == "__main__":
    main()
