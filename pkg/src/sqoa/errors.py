"""Exception types shared across the package."""


class SqoaError(Exception):
    """Base class for all package errors."""


class ValidationError(SqoaError):
    """Raised when inputs or constructed objects violate a documented contract."""


class NumericalError(SqoaError):
    """Raised when an iterative numerical routine fails to converge."""
