"""Exception types shared across the package."""


class MagspecError(Exception):
    """Base class for all package errors."""


class DomainError(MagspecError, ValueError):
    """A quantity was requested at a point where it is undefined."""


class DivergenceError(MagspecError, ArithmeticError):
    """An integral that should be finite failed to converge."""


class UnknownRegime(MagspecError, LookupError):
    """No exponent-catalog row matches the requested parameters."""

    def __init__(self, message, nearest=()):
        super().__init__(message)
        self.nearest = tuple(nearest)


class ConfigError(MagspecError, ValueError):
    """A run configuration or model document is malformed.

    ``pointer`` is a JSON pointer to the offending field, when known.
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class ResourceCapExceeded(MagspecError, RuntimeError):
    """A requested computation exceeds the desk-scale envelope."""
