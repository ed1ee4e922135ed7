#!/usr/bin/env python3
"""
Projection Lab Verify CLI
"""
import sys
import argparse

from projection_lab.utils.report_handler import tsv_table
from projection_lab.utils.utils import banner, success, warn
from projection_lab.utils.verify_handler import run_verify_suite


def create_parser():
    parser = argparse.ArgumentParser(
        description="Run the property suites and print a pass/fail table (TSV)",
        prog="projection-verify"
    )
    parser.add_argument('--filter', type=str, help='Only run checks whose name matches this pattern')
    parser.add_argument('--all', action='store_true', help='Include the slow statistical pipeline checks')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    banner("VERIFY", icon="🧪")
    rows = run_verify_suite(args.filter, include_slow=args.all)
    print(tsv_table(rows), end="")
    failed = [r["name"] for r in rows if not r["passed"]]
    if failed:
        warn(f"{len(failed)} of {len(rows)} checks failed: {', '.join(failed)}")
        return 1
    success(f"All {len(rows)} checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
