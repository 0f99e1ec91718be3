"""Batch command line: ``ortcart fit | simulate | check``.

Exit codes: 0 success, 1 property violation, 2 data error, 64 usage error.
"""
from __future__ import annotations

import argparse
import sys

from .checks import SUITES, run_suite
from .formats import FormatError, fmt, format_tensor, partition_to_json, read_tensor
from .lattice import HIER, RDP, LatticeError
from .simlab import SCENARIOS, Scenario, ScenarioError, run_scenario
from .solver import solve

EXIT_OK, EXIT_VIOLATION, EXIT_DATA, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> Parser:
    parser = Parser(prog="ortcart", description="Dyadic CART and optimal regression trees on lattices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    f = sub.add_parser("fit", help="fit a tensor-text file")
    f.add_argument("--input", required=True)
    f.add_argument("--order", type=int, required=True)
    f.add_argument("--lambda", dest="lam", type=float, required=True)
    f.add_argument("--family", choices=(RDP, HIER), required=True)
    f.add_argument("--output")
    f.add_argument("--partition-out")
    f.add_argument("--threads", type=int, default=1)

    s = sub.add_parser("simulate", help="Monte-Carlo MSE study")
    s.add_argument("--scenario", required=True)
    s.add_argument("--sizes", type=_sizes, required=True)
    s.add_argument("--reps", type=int, default=20)
    s.add_argument("--sigma", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--order", type=int)
    s.add_argument("--family", choices=(RDP, HIER))
    s.add_argument("--lambda-rule")
    s.add_argument("--out")
    s.add_argument("--threads", type=int, default=1)

    c = sub.add_parser("check", help="randomized inequality / bound suites")
    c.add_argument("--suite", choices=sorted(SUITES), required=True)
    c.add_argument("--trials", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    return parser


def cmd_fit(args) -> int:
    if args.order < 0 or not args.lam > 0 or args.threads < 1:
        raise UsageError("need --order >= 0, --lambda > 0 and --threads >= 1")
    try:
        y = read_tensor(args.input)
    except (OSError, FormatError) as exc:
        print(f"ortcart fit: {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA
    fit = solve(y, args.order, args.lam, args.family, threads=args.threads)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(format_tensor(fit.fitted))
    if args.partition_out:
        with open(args.partition_out, "w") as fh:
            fh.write(partition_to_json(fit.partition, fit.coeffs) + "\n")
    print(f"objective={fmt(fit.objective)} pieces={fit.pieces}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.scenario!r}; choose from {', '.join(SCENARIOS)}")
    try:
        scen = Scenario.default(args.scenario, args.sizes, reps=args.reps, seed=args.seed,
                                sigma=args.sigma, order=args.order, family=args.family,
                                lambda_rule=args.lambda_rule)
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None
    try:
        table = run_scenario(scen, threads=args.threads)
    except ScenarioError as exc:
        print(f"ortcart simulate: {exc}", file=sys.stderr)
        return EXIT_DATA
    text = table.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print("slope=" + ("nan" if table.slope is None else fmt(table.slope)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    total = failed = 0
    for trial in run_suite(args.suite, args.trials, args.seed):
        total += 1
        if not trial.ok:
            failed += 1
            print(f"VIOLATION {trial.label}: {trial.detail}")
            print(trial.payload, end="" if trial.payload.endswith("\n") else "\n")
    print(f"suite={args.suite} trials={total} violations={failed}")
    return EXIT_VIOLATION if failed else EXIT_OK


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ortcart {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LatticeError, ValueError) as exc:
        print(f"ortcart {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
