"""Exception types shared across the package."""


class UsageError(Exception):
    """Bad arguments or configuration; maps to CLI exit code 1."""


class DataError(Exception):
    """Invalid or inconsistent data; maps to CLI exit code 2."""
