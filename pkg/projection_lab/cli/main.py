#!/usr/bin/env python3
"""
Projection Lab - Main CLI Entry Point
"""

import sys
import argparse

from projection_lab.cli.bound import main as bound_main
from projection_lab.cli.check_family import main as check_family_main
from projection_lab.cli.witness import main as witness_main
from projection_lab.cli.transversality import main as transversality_main
from projection_lab.cli.project import main as project_main
from projection_lab.cli.sharpness import main as sharpness_main
from projection_lab.cli.verify import main as verify_main

COMMANDS = {
    "bound": (bound_main, "Print the p(l) table and lower-bound curve"),
    "check-family": (check_family_main, "Run the non-degeneracy check on a family file"),
    "witness": (witness_main, "Search a witness subspace for a family"),
    "transversality": (transversality_main, "Fit sublevel-set exponents for a family"),
    "project": (project_main, "Run a bound-check experiment and write its report"),
    "sharpness": (sharpness_main, "Run a sharpness experiment and write its report"),
    "verify": (verify_main, "Run the property suites"),
}


def create_parser():
    parser = argparse.ArgumentParser(
        description="Projection Lab: dimension bounds for projection families",
        prog="projection-lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  projection-lab bound --n 3 --m 2 --k 1                      # p(l) table and bound curve
  projection-lab check-family config/families/n3m2k1.json     # non-degeneracy gate
  projection-lab transversality config/families/n4m2k3.json --extend --l 1 --seed 7
  projection-lab project config/experiments/bound_check.json --out runs/bound
  projection-lab sharpness config/experiments/sharpness.json --out runs/sharpness
  projection-lab verify --filter family                       # fast property suites

Run 'projection-lab <command> --help' for the options of a command.
        """
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Show tracebacks on errors')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, help=help_text, add_help=False)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = create_parser()
    # everything after the command name belongs to the command
    split = next((i for i, token in enumerate(argv) if token in COMMANDS), None)
    if split is None:
        parser.parse_args(argv)
        parser.print_help()
        sys.exit(1)
    args = parser.parse_args(argv[:split + 1])
    rest = argv[split + 1:]
    if args.verbose and '--verbose' not in rest and '-v' not in rest:
        rest.append('--verbose')

    command, _ = COMMANDS[args.command]
    try:
        sys.exit(command(rest))
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        if '--verbose' in rest or '-v' in rest:
            import traceback
            traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
