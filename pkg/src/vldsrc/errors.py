"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so library code should raise
these (not bare ValueError) for anything a user can trigger from the
command line.
"""


class VldsrcError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(VldsrcError):
    """Bad input document, argument, or probability value (exit code 2).

    ``path`` optionally points at the offending field, e.g. ``pmf[2][0]``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class BudgetExceededError(VldsrcError):
    """An enumeration would exceed the configured type budget (exit code 3)."""


class InvariantError(VldsrcError):
    """An internal consistency check failed; indicates a bug (exit code 4)."""
