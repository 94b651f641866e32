"""Exception types shared across the toolkit."""


class ShapeError(ValueError):
    """Tensor dimensions do not line up for the requested operation."""


class ConfigError(ValueError):
    """A model or template configuration violates its contract."""


class IntegrityError(RuntimeError):
    """A pluggable component broke an internal invariant."""


class NumericError(ArithmeticError):
    """A computation produced NaN or infinite values."""


class ParseError(ValueError):
    """Malformed subtitle input; carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InputError(ValueError):
    """Caller-supplied data outside the accepted domain."""


class SchemaError(ValueError):
    """A record does not match its declared schema (labels, criteria)."""
