#!/usr/bin/env python3
"""
Projection Lab Witness CLI
"""
import sys
import json
import argparse

import numpy as np

from projection_lab.utils.errors import LabError
from projection_lab.utils.family import FamilySpec, family_jacobian, find_witness_subspace
from projection_lab.utils.utils import banner, fail, step, success, warn


def create_parser():
    parser = argparse.ArgumentParser(
        description="Search a t-dimensional witness subspace W of V^⊥ and report its margin d'",
        prog="projection-witness"
    )
    parser.add_argument('family', help='Family JSON file')
    parser.add_argument('--t', type=int, required=True, help='Dimension of W')
    parser.add_argument('--l', type=int, required=True, help='Regime index l (wedges of l+1 maps)')
    parser.add_argument('--lambda', dest='site', type=str, help='Comma-separated site (default: centre)')
    parser.add_argument('--trials', type=int, default=200, help='Random restarts (default: 200)')
    parser.add_argument('--sphere-samples', type=int, help='Directions sampled on the unit sphere of W')
    parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    parser.add_argument('--threads', type=int, default=0, help='Worker threads, 0 = one per CPU')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    try:
        spec = FamilySpec.load(args.family)
        site = np.array([float(x) for x in args.site.split(',')]) if args.site else np.zeros(spec.k)
        banner(f"WITNESS SEARCH: t={args.t}, l={args.l}", icon="🔍")
        J = family_jacobian(spec, site)
        step(f"Searching with {args.trials} restarts")
        result = find_witness_subspace(J, args.t, args.l, trials=args.trials,
                                       sphere_samples=args.sphere_samples, seed=args.seed,
                                       threads=args.threads)
        out = result.to_dict()
        out["basis_ambient"] = (result.basis @ J.complement.basis).tolist()
        print(json.dumps(out, indent=2, sort_keys=True))
        if result.passed:
            success(f"d' = {result.d_prime_hat:.6g} on {result.sphere_points} sampled directions")
            return 0
        warn(f"No witness found: d' = {result.d_prime_hat:.3g}")
        return 1
    except LabError as e:
        fail(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
