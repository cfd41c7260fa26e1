#!/usr/bin/env python3
"""Sweep seeded episodes per constellation and tally safety events.

Runs a random-within-shield policy under a chosen theory and reports
pushes, drownings, rescues, and deliveries, which is the quickest way
to see the shield's effect: compare ``--theory empty`` against
``--theory exemplary``.
"""

import argparse

from reasonshield.bridge_domain import (
    build_registry,
    empty_theory,
    exemplary_theory,
    unordered_theory,
)
from reasonshield.bridge_env import CONSTELLATIONS, BridgeEnv, EnvConfig
from reasonshield.loop import run_loop
from reasonshield.rl import QTable

THEORIES = {
    "empty": empty_theory,
    "unordered": unordered_theory,
    "exemplary": exemplary_theory,
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--theory", choices=sorted(THEORIES), default="exemplary")
    parser.add_argument("--episodes", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-steps", type=int, default=80)
    args = parser.parse_args()

    env = BridgeEnv(EnvConfig(max_steps=args.max_steps))
    registry = build_registry(env.config)
    theory = THEORIES[args.theory]()

    print(f"theory={args.theory}  episodes/constellation={args.episodes}")
    header = f"{'constellation':<15}{'pushes':>8}{'drown':>8}{'rescues':>9}{'deliver':>9}{'return':>10}"
    print(header)
    print("-" * len(header))
    for constellation in CONSTELLATIONS:
        if constellation == "random":
            continue
        _, metrics = run_loop(
            QTable(epsilon=1.0),
            env,
            None,
            theory,
            args.episodes,
            seed=args.seed,
            registry=registry,
            constellation=constellation,
            rl_config=None,
            learn=False,
        )
        t = metrics.totals()
        print(
            f"{constellation:<15}{t['pushes']:>8}{t['drownings']:>8}"
            f"{t['rescues']:>9}{t['deliveries']:>9}{t['mean_return']:>10.1f}"
        )


if __name__ == "__main__":
    main()
