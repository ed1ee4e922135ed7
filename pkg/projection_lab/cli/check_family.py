#!/usr/bin/env python3
"""
Projection Lab Family Check CLI
"""
import sys
import argparse

import numpy as np

from projection_lab.utils.errors import LabError
from projection_lab.utils.experiment_handler import lambda_grid_points
from projection_lab.utils.family import FamilySpec, nondegeneracy_check, nondegeneracy_scan
from projection_lab.utils.utils import banner, fail, step, success, warn


def create_parser():
    parser = argparse.ArgumentParser(
        description="Non-degeneracy check ‖A_1 ∧ ... ∧ A_k‖ of a family file",
        prog="projection-check-family"
    )
    parser.add_argument('family', help='Family JSON file')
    parser.add_argument('--lambda', dest='site', type=str, help='Comma-separated site (default: centre)')
    parser.add_argument('--scan', type=int, default=0, help='Also scan a grid with this many points per axis')
    parser.add_argument('--tol', type=float, default=1e-9, help='Pass threshold for the wedge norm')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    try:
        spec = FamilySpec.load(args.family)
        site = np.array([float(x) for x in args.site.split(',')]) if args.site else np.zeros(spec.k)
        banner(f"FAMILY CHECK: {args.family}", icon="🔎")
        step(f"n={spec.n}, m={spec.m}, k={spec.k}, {len(spec.schedule)} schedule entries")
        result = nondegeneracy_check(spec, site, args.tol)
        print(f"{result.wedge_norm:.17g}")
        if args.scan:
            grid = lambda_grid_points(spec.radii, [args.scan] * spec.k)
            _, fraction = nondegeneracy_scan(spec, grid, args.tol)
            step(f"{fraction:.1%} of {len(grid)} grid sites fail the check")
        if result.passed:
            success(f"Non-degenerate: wedge norm {result.wedge_norm:.6g}")
            return 0
        warn(f"Degenerate: wedge norm {result.wedge_norm:.3g} <= {args.tol}")
        return 1
    except LabError as e:
        fail(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
