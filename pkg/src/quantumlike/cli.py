"""Command-line entry point: run one scenario per invocation.

Exit status: 0 when the computation completed (negative verdicts included),
1 on a computation error, 2 on a configuration error.
"""
import argparse
import json
import logging
import sys

from .errors import QuantumLikeError, ScenarioError
from .scenarios import parse_scenario, run_scenario

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quantumlike", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="scenario JSON file ('-' for stdin)")
    p.add_argument("--out", help="report path (default: output.path of the config, else stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="report format")
    p.add_argument("--seed", type=int, help="seed for sampled quantities")
    p.add_argument("--tolerance", type=float, help="override the scenario's check tolerance")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config == "-":
            text = sys.stdin.read()
        else:
            with open(args.config) as fh:
                text = fh.read()
        scenario = parse_scenario(text)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ScenarioError([("--seed", "seed must be an unsigned 64-bit integer")])
        if args.tolerance is not None and not args.tolerance > 0:
            raise ScenarioError([("--tolerance", "tolerance must be positive")])
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        status, text = run_scenario(scenario, out=args.out, fmt=args.format,
                                    tolerance=args.tolerance, seed=args.seed)
    except QuantumLikeError as exc:
        print(f"error: {scenario.kind} scenario failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_COMPUTE
    except (ArithmeticError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {scenario.kind} scenario failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not (args.out or scenario.output_path):
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
