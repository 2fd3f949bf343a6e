"""Parameter-grid policy comparison: 500 simulated subjects over 58 models."""

import argparse
import sys

from edgecut.harness import SimConfig, simulate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=500)
    parser.add_argument("--budget", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="out/param_grid")
    args = parser.parse_args()
    config = SimConfig(
        scenario="param_grid",
        replicates=args.replicates,
        budget=args.budget,
        seed=args.seed,
    )
    result = simulate(config, args.out_dir)
    for policy, curve in result.curves.items():
        print(f"{policy:12s} accuracy@{args.budget} = {curve.accuracy[-1]:.4f}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
