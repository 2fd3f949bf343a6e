"""Expected-cost tables on the adversarial families, with the exact optimum."""

import argparse
import sys

from edgecut.harness import cost_ratio_report


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", choices=("gbs_bad", "posterior_bad"), default="gbs_bad")
    parser.add_argument("--sizes", type=int, nargs="+", default=None)
    parser.add_argument(
        "--policies", nargs="+", default=["ec2", "gbs", "ig_class", "voi", "effecxtive"]
    )
    parser.add_argument("--no-opt", action="store_true")
    args = parser.parse_args()
    sizes = args.sizes or ({"gbs_bad": [10, 50, 100], "posterior_bad": [2, 3]}[args.family])
    rows = cost_ratio_report(
        args.family, tuple(sizes), tuple(args.policies), include_opt=not args.no_opt
    )
    print(f"{'size':>6} {'policy':>12} {'cost':>10} {'opt':>8} {'ratio':>8}")
    for row in rows:
        opt = "" if row["opt"] is None else f"{row['opt']:.3f}"
        ratio = "" if row["ratio"] is None else f"{row['ratio']:.3f}"
        print(f"{row['size']:>6} {row['policy']:>12} {row['expected_cost']:>10.4f} {opt:>8} {ratio:>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
