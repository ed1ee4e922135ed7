#!/usr/bin/env python3
"""
Projection Lab Sharpness CLI
"""
import sys

from projection_lab.cli.project import create_parser as project_parser, run
from projection_lab.utils.experiment_handler import run_sharpness


def create_parser():
    return project_parser(prog="projection-sharpness",
                          description="Run a sharpness experiment and write its report")


def main(argv=None):
    args = create_parser().parse_args(argv)
    return run(args, "sharpness", run_sharpness)


if __name__ == "__main__":
    sys.exit(main())
