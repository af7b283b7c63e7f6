"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """A malformed message, key, puzzle or configuration value."""


class QueryRangeError(IndexError):
    """An oracle read outside ``[1, n]`` or with ``l > r``."""


class DecodeFailure(RuntimeError):
    """The decoder could not produce an answer for the requested interval."""
