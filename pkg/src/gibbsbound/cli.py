"""Command line interface.

Subcommands: run, calibrate, bound, emit-curves, oracle-check.
Exit codes: 0 success, 1 configuration error, 2 validation-suite failure,
3 all chains of a run diverged.
"""

import argparse
import json
import sys

from .bounds import LadderEstimates, TemperatureLadder, assemble_report
from .calibration import Infeasible, calibrate
from .checks import oracle_check
from .experiment import emit_curves, load_config, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SUITE = 2
EXIT_DIVERGED = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gibbsbound",
        description="Gibbs-posterior test-error bounds from tempered Langevin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a full experiment from a config file")
    run_p.add_argument("--config", help="flat key = value config file")
    run_p.add_argument("--beta-ladder", help="comma-separated inverse temperatures, first 0")
    run_p.add_argument("--labels", choices=("true", "random", "both"))
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out-dir")
    run_p.add_argument("--jobs", type=int)
    run_p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )

    cal_p = sub.add_parser("calibrate", help="calibration factor from saved estimates")
    cal_p.add_argument("--estimates", required=True, help="estimates.json from a run")
    cal_p.add_argument("--condition", default="random")
    cal_p.add_argument("--delta", type=float, default=0.01)

    bound_p = sub.add_parser("bound", help="assemble a bound report from saved estimates")
    bound_p.add_argument("--estimates", required=True)
    bound_p.add_argument("--condition", default="true")
    bound_p.add_argument("--delta", type=float, default=0.01)
    bound_p.add_argument("--r", type=float, default=1.0, help="calibration factor to apply")
    bound_p.add_argument("--out", required=True, help="report CSV path")

    curves_p = sub.add_parser("emit-curves", help="tidy plot data from a report CSV")
    curves_p.add_argument("--report", required=True)
    curves_p.add_argument("--out", required=True)

    oracle_p = sub.add_parser("oracle-check", help="run the exact-oracle validation suites")
    oracle_p.add_argument("--seed", type=int, default=0)
    return parser


def _overrides_from_args(args):
    overrides = []
    if args.beta_ladder is not None:
        overrides.append(("ladder", args.beta_ladder))
    if args.labels is not None:
        overrides.append(("labels", args.labels))
    if args.seed is not None:
        overrides.append(("seed", str(args.seed)))
    if args.out_dir is not None:
        overrides.append(("out_dir", args.out_dir))
    if args.jobs is not None:
        overrides.append(("jobs", str(args.jobs)))
    for item in args.set:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides.append((key.strip(), value))
    return overrides


def _load_estimates(path, condition):
    with open(path) as fh:
        payload = json.load(fh)
    if condition not in payload:
        raise ValueError(f"no condition {condition!r} in {path}")
    entry = payload[condition]
    ladder = TemperatureLadder(tuple(entry["ladder"]))
    est = LadderEstimates(tuple(entry["surrogate"]), tuple(entry["error01"]), int(entry["n"]))
    return ladder, est


def main(argv=None):
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        try:
            cfg = load_config(args.config, _overrides_from_args(args))
        except (OSError, ValueError, TypeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        summary = run_experiment(cfg)
        print(json.dumps(summary, indent=2))
        return EXIT_DIVERGED if summary.get("all_diverged") else EXIT_OK

    if args.command == "calibrate":
        try:
            ladder, est = _load_estimates(args.estimates, args.condition)
            result = calibrate(ladder, est, args.delta)
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except Infeasible as exc:
            print(f"calibration infeasible: {exc}", file=sys.stderr)
            return EXIT_SUITE
        print(json.dumps({"r": result.r, "rung_bounds": list(result.rung_bounds),
                          "iterations": result.iterations}, indent=2))
        return EXIT_OK

    if args.command == "bound":
        try:
            ladder, est = _load_estimates(args.estimates, args.condition)
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        report = assemble_report(ladder, est, delta=args.delta, r=args.r)
        report.save_csv(args.out)
        print(args.out)
        return EXIT_OK

    if args.command == "emit-curves":
        try:
            emit_curves(args.report, args.out)
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(args.out)
        return EXIT_OK

    if args.command == "oracle-check":
        return EXIT_OK if oracle_check(seed=args.seed) else EXIT_SUITE

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
