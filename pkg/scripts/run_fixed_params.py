"""Fixed-parameter policy comparison: 1000 simulated subjects, 30 tests each.

Writes curves.csv, summary.json under --out-dir (default out/fixed_params).
"""

import argparse
import sys

from edgecut.harness import SimConfig, simulate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=1000)
    parser.add_argument("--budget", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="out/fixed_params")
    args = parser.parse_args()
    config = SimConfig(
        scenario="fixed_params",
        replicates=args.replicates,
        budget=args.budget,
        seed=args.seed,
    )
    result = simulate(config, args.out_dir)
    for policy, curve in result.curves.items():
        print(f"{policy:12s} accuracy@{args.budget} = {curve.accuracy[-1]:.4f}")
    for check in result.checks:
        status = "ok" if check["passed"] else "NOT SEPARATED"
        print(f"{check['better']} > {check['worse']}: gap {check['gap']:+.4f} ({status})")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
