"""Exception types raised across the package."""


class KeyfuseError(Exception):
    """Base class for all package errors."""


class ValidationError(KeyfuseError, ValueError):
    """A probability vector or parameter failed validation."""


class DimensionError(KeyfuseError, ValueError):
    """Operands live on different key spaces."""


class KeyRangeError(KeyfuseError, ValueError):
    """A key value lies outside ``[0, 2**bits)``."""


class CapacityError(KeyfuseError, ValueError):
    """The key space is too large for an exhaustive operation."""


class UnderflowError(KeyfuseError, RuntimeError):
    """Not enough keys are queued to serve a request."""


class DomainError(KeyfuseError, ValueError):
    """An argument lies outside the mathematical domain of a function."""
