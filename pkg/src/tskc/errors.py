"""Exception types shared across the package."""


class DataError(Exception):
    """Input data is missing, malformed, or inconsistent with the request."""


class NumericalError(Exception):
    """A numerical routine failed to meet its accuracy contract."""
