"""Exception types shared across the package."""


class ConfigError(Exception):
    """Raised for malformed or invalid experiment configuration (CLI exit 2)."""


class NumericError(RuntimeError):
    """Raised when a numerical routine fails or violates its contract (CLI exit 3)."""
