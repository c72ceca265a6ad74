"""Exception types shared across the package.

The CLI maps :class:`InputError` and :class:`ResourceError` to exit code 2
and :class:`PropertyViolation` to exit code 1.
"""


class LabError(Exception):
    """Base class for all package errors."""


class InputError(LabError, ValueError):
    """Malformed or out-of-range input."""


class ResourceError(LabError, RuntimeError):
    """A configured size cap or search budget was exceeded."""


class PropertyViolation(LabError):
    """A mathematical property check failed; carries a witness payload."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
