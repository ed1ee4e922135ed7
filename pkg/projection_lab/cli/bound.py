#!/usr/bin/env python3
"""
Projection Lab Bound CLI
"""
import sys
import argparse

import numpy as np

from projection_lab.utils.errors import LabError
from projection_lab.utils.family import bound_table, theorem_lower_bound
from projection_lab.utils.report_handler import csv_text
from projection_lab.utils.utils import fail


def create_parser():
    parser = argparse.ArgumentParser(
        description="Print p(l) for every regime and samples of the lower-bound curve (CSV)",
        prog="projection-bound"
    )
    parser.add_argument('--n', type=int, required=True, help='Ambient dimension')
    parser.add_argument('--m', type=int, required=True, help='Plane dimension')
    parser.add_argument('--k', type=int, required=True, help='Number of family parameters')
    parser.add_argument('--d', type=float, help='Only print the bound at this dim μ')
    parser.add_argument('--step', type=float, default=0.25, help='Curve sample spacing (default: 0.25)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    try:
        if args.d is not None:
            print(csv_text(["d", "bound"], [[args.d, theorem_lower_bound(args.n, args.m, args.k, args.d)]]), end="")
            return 0
        table = bound_table(args.n, args.m, args.k)
        rows = [[l, p, p + l, p + l + 1] for l, p in enumerate(table.values)]
        print(csv_text(["l", "p", "slope_start", "slope_end"], rows), end="")
        print()
        samples = set(np.round(np.arange(0, args.n + 1e-9, args.step), 12).tolist())
        samples.update(float(b) for b in table.breakpoints if b <= args.n)
        curve = [[d, theorem_lower_bound(args.n, args.m, args.k, d)] for d in sorted(samples)]
        print(csv_text(["d", "bound"], curve), end="")
    except LabError as e:
        fail(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
