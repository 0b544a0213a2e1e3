class ForwardSignalError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ForwardSignalError, ValueError):
    """Invalid configuration or command-line usage."""


class DataError(ForwardSignalError, ValueError):
    """Input data violates a contract (malformed rows, ordering, non-finite values)."""
