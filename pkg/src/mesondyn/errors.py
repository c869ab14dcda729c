"""Exception types shared across the package.

The CLI maps these onto process exit codes; library callers can catch
them individually.
"""


class MesondynError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MesondynError, ValueError):
    """A precondition on an operation's arguments was violated."""


class CapacityError(MesondynError):
    """Problem size exceeds a configured resource limit."""


class NoOscillationError(MesondynError):
    """The spectrum of a series has no peak above the noise floor."""
