#!/usr/bin/env python3
"""
Projection Lab Transversality CLI
"""
import sys
import json
import argparse
from pathlib import Path

from projection_lab.utils.config_handler import ExperimentConfig
from projection_lab.utils.errors import LabError
from projection_lab.utils.experiment_handler import run_transversality
from projection_lab.utils.report_handler import write_report
from projection_lab.utils.utils import fail, read_json, step


def create_parser():
    parser = argparse.ArgumentParser(
        description="Fit sublevel-set exponents of λ ↦ |Π_{V_λ}(w)| over a panel of directions",
        prog="projection-transversality"
    )
    parser.add_argument('family', help='Family JSON file')
    parser.add_argument('--extend', action='store_true', help='Probe the extended family for regime --l')
    parser.add_argument('--l', type=int, help='Regime index l used with --extend')
    parser.add_argument('--lambda', dest='site', type=str, help='Comma-separated centre λ0 (default: 0)')
    parser.add_argument('--deltas', type=str, help='Comma-separated decreasing δ values')
    parser.add_argument('--samples', type=int, default=10 ** 6, help='Monte-Carlo samples per direction')
    parser.add_argument('--panel', type=int, default=8, help='Number of random directions (default: 8)')
    parser.add_argument('--seed', type=int, required=True, help='Random seed')
    parser.add_argument('--threads', type=int, default=0, help='Worker threads, 0 = one per CPU')
    parser.add_argument('--out', type=str,
                        help='Directory for report.json and loglog.csv (default: runs/transversality/<family>-seed<seed>)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
    return parser


def default_out_dir(family_path, seed):
    return Path("runs") / "transversality" / f"{Path(family_path).stem}-seed{seed}"


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.extend and args.l is None:
        parser.error("--extend needs --l")
    try:
        data = {
            "mode": "transversality",
            "seed": args.seed,
            "threads": args.threads,
            "family": read_json(args.family),
            "samples": args.samples,
            "panel": args.panel,
        }
        if args.extend:
            data["l"] = args.l
        if args.site:
            data["lambda0"] = [float(x) for x in args.site.split(',')]
        if args.deltas:
            data["deltas"] = [float(x) for x in args.deltas.split(',')]
        report = run_transversality(ExperimentConfig.from_dict(data), verbose=args.verbose)
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        out = args.out or default_out_dir(args.family, args.seed)
        write_report(report, out)
        step(f"Report written to {out}")
        return 0 if report.passed else 1
    except LabError as e:
        fail(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
