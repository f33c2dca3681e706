"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when an argument or configuration is outside its domain."""


class NumericError(RuntimeError):
    """Raised when a numeric routine cannot certify or deliver its result."""
