"""Shared exception types."""


class ConfigurationError(ValueError):
    """Raised for malformed configuration input (bad keys, values, or coefficient data).

    ``line`` is the 1-based line number in the config text when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleCostError(RuntimeError):
    """Raised when a quadratic-cost reference computation is requested above the size ceiling."""
