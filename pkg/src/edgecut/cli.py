"""Command-line entry points.

Subcommands cover instance generation, policy runs, exact expected costs,
the brute-force optimum, the property checkers, simulation scenarios, the
lottery test-pool export, config scaffolding, session-log replay, and the
live HTTP service.  Outputs are plain JSON/CSV and are byte-identical across
reruns with the same arguments and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys

from .adversarial import gen_gbs_bad, gen_posterior_bad
from .econ import EconConfig, save_econ_config, write_test_pool_csv
from .harness import SCENARIOS, SimConfig, simulate
from .instance import load_instance, save_instance
from .oracle import check_adaptive_submodularity, check_strong_monotonicity, optimal_expected_cost
from .policies import POLICY_CRITERIA, PolicySpec, expected_cost, run_policy
from .service import ServiceConfig, load_service_config, read_log, replay_posterior, save_service_config


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _cmd_gen_adversarial(args) -> int:
    if args.family == "gbs-bad":
        if args.n is None:
            print("gen-adversarial gbs-bad requires --n", file=sys.stderr)
            return 2
        instance = gen_gbs_bad(args.n)
    else:
        if args.q is None:
            print("gen-adversarial posterior-bad requires --q", file=sys.stderr)
            return 2
        instance = gen_posterior_bad(args.q, args.dummy_count)
    save_instance(instance, args.out)
    print(_dumps({"family": args.family, "hypotheses": instance.n_hypotheses,
                  "tests": instance.n_tests, "classes": instance.n_classes, "out": args.out}))
    return 0


def _spec_from_args(args) -> PolicySpec:
    return PolicySpec(
        criterion=args.criterion,
        mode=args.mode,
        budget=args.budget,
        tie_break=args.tie_break,
        seed=args.seed,
    )


def _cmd_run_policy(args) -> int:
    instance = load_instance(args.instance)
    trace = run_policy(_spec_from_args(args), instance, args.truth, seed=args.seed)
    doc = trace.to_dict(instance)
    for step in doc["steps"]:
        print(_dumps(step))
    print(_dumps({k: v for k, v in doc.items() if k != "steps"}))
    return 0


def _cmd_expected_cost(args) -> int:
    instance = load_instance(args.instance)
    print(repr(expected_cost(_spec_from_args(args), instance, seed=args.seed)))
    return 0


def _cmd_optimal_cost(args) -> int:
    instance = load_instance(args.instance)
    result = optimal_expected_cost(instance, mode=args.mode)
    root = None if result.root_test is None else instance.test_ids[result.root_test]
    print(_dumps({"optimal_expected_cost": result.cost, "root_test": root}))
    return 0


def _cmd_check_properties(args) -> int:
    instance = load_instance(args.instance)
    reports = [
        check_adaptive_submodularity(instance),
        check_strong_monotonicity(instance),
    ]
    doc = {"instance": args.instance, "reports": [r.to_dict() for r in reports]}
    print(_dumps(doc))
    return 0 if all(r.passed for r in reports) else 1


def _cmd_simulate(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = SimConfig.from_dict(json.load(fh))
    result = simulate(config, args.out_dir)
    print(_dumps({"scenario": config.scenario, "passed": result.passed,
                  "files": list(result.files)}))
    return 0 if result.passed else 1


def _cmd_export_tests(args) -> int:
    write_test_pool_csv(args.out)
    print(_dumps({"out": args.out}))
    return 0


def _cmd_econ_config(args) -> int:
    save_econ_config(EconConfig(), args.out)
    print(_dumps({"out": args.out}))
    return 0


def _cmd_service_config(args) -> int:
    save_service_config(ServiceConfig(), args.out)
    print(_dumps({"out": args.out}))
    return 0


def _cmd_replay_log(args) -> int:
    print(_dumps(replay_posterior(read_log(args.log))))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_service_config(args.config) if args.config else ServiceConfig()
    app = create_app(config, args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgecut")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-adversarial", help="write a hard instance as JSON")
    p.add_argument("--family", choices=("gbs-bad", "posterior-bad"), required=True)
    p.add_argument("--n", type=int, default=None, help="hypothesis count (gbs-bad)")
    p.add_argument("--q", type=int, default=None, help="bit width (posterior-bad)")
    p.add_argument("--dummy-count", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_adversarial)

    for name, func in (("run-policy", _cmd_run_policy), ("expected-cost", _cmd_expected_cost)):
        p = sub.add_parser(name)
        p.add_argument("--instance", required=True)
        p.add_argument("--criterion", choices=POLICY_CRITERIA, required=True)
        p.add_argument("--mode", choices=("odt", "ecd"), default="ecd")
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--tie-break", choices=("lowest_test_index", "seeded_random"),
                       default="lowest_test_index")
        p.add_argument("--seed", type=int, default=None)
        if name == "run-policy":
            p.add_argument("--truth", required=True, help="hypothesis id")
        p.set_defaults(func=func)

    p = sub.add_parser("optimal-cost", help="brute-force optimal expected cost")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=("odt", "ecd"), default="ecd")
    p.set_defaults(func=_cmd_optimal_cost)

    p = sub.add_parser("check-properties", help="run the exhaustive property checkers")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=_cmd_check_properties)

    p = sub.add_parser("simulate", help="run a simulation scenario from a config file")
    p.add_argument("--config", required=True, help=f"JSON config; scenarios: {', '.join(SCENARIOS)}")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("export-tests", help="write the lottery pair pool as CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_tests)

    p = sub.add_parser("econ-config", help="write the default utility-model config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_econ_config)

    p = sub.add_parser("service-config", help="write the default session-service config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_service_config)

    p = sub.add_parser("replay-log", help="replay an exported session log offline")
    p.add_argument("--log", required=True)
    p.set_defaults(func=_cmd_replay_log)

    p = sub.add_parser("serve", help="start the live elicitation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--config", default=None, help="ServiceConfig JSON")
    p.add_argument("--data-dir", required=True)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
