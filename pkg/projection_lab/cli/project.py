#!/usr/bin/env python3
"""
Projection Lab Project CLI
"""
import sys
import argparse

from projection_lab.utils.config_handler import load_experiment
from projection_lab.utils.errors import InputError, LabError
from projection_lab.utils.experiment_handler import run_bound_check
from projection_lab.utils.report_handler import write_report
from projection_lab.utils.utils import fail, success


def create_parser(prog="projection-project", description="Run a bound-check experiment and write its report"):
    parser = argparse.ArgumentParser(description=description, prog=prog)
    parser.add_argument('experiment', help='Experiment JSON file')
    parser.add_argument('--out', type=str, required=True, help='Output directory')
    parser.add_argument('--seed', type=int, help='Override the seed of the experiment file')
    parser.add_argument('--threads', type=int, help='Worker threads, 0 = one per CPU')
    parser.add_argument('--force', action='store_true', help='Run even if the family fails the non-degeneracy check')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def run(args, mode, runner):
    """Load, run and write one experiment; shared with the sharpness command."""
    try:
        cfg = load_experiment(args.experiment)
        if args.seed is not None or args.threads is not None:
            cfg = cfg.with_overrides(args.seed, args.threads)
        if cfg.mode != mode:
            raise InputError(f"{args.experiment} is a '{cfg.mode}' experiment, expected '{mode}'")
        report = runner(cfg, force=args.force, verbose=args.verbose)
        write_report(report, args.out)
        success(f"Report written to {args.out}")
        return 0 if report.passed else 1
    except LabError as e:
        fail(str(e))
        return 1


def main(argv=None):
    args = create_parser().parse_args(argv)
    return run(args, "bound_check", run_bound_check)


if __name__ == "__main__":
    sys.exit(main())
