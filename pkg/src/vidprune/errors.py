"""Exception types shared across the library and the CLI."""


class VidpruneError(Exception):
    """Base class for all library errors."""


class InvalidInputError(VidpruneError):
    """Malformed tensors, out-of-range configuration, or bad files (CLI exit code 1)."""

    exit_code = 1


class InfeasibleBudgetError(VidpruneError):
    """The requested retention budget cannot be met (CLI exit code 2)."""

    exit_code = 2
