"""
Exception hierarchy shared by the kernels, the harness and the CLI.
"""


class LabError(Exception):
    """Base class for every error raised by projection-lab."""


class InputError(LabError, ValueError):
    """Invalid argument: bad dimensions, out-of-range values, unknown kinds."""


class PreconditionError(InputError):
    """Arguments are well-formed but violate an operation's precondition."""


class ExperimentRefused(LabError):
    """The harness refuses to run, e.g. on a family failing the nondegeneracy gate."""
