"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input data (CLI exit code 2)."""


class InvariantError(RuntimeError):
    """An internal consistency check failed (CLI exit code 3)."""
