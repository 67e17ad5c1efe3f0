"""Exception hierarchy. The CLI maps each class to an exit code."""


class CeiError(Exception):
    exit_code = 2


class DataError(CeiError, ValueError):
    """Bad input data: malformed files, label mismatches, violated invariants."""

    exit_code = 2


class DegenerateError(DataError):
    """Input has no information for the requested statistic (e.g. all zeros)."""


class NumericError(CeiError, ArithmeticError):
    """An iterative routine failed to converge."""

    exit_code = 3


class UsageError(CeiError):
    """Invalid combination of command-line options."""

    exit_code = 1
