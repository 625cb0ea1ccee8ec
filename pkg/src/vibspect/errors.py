"""Exception types shared across the toolkit."""


class DataError(ValueError):
    """Raised when an input file or user-supplied data value is invalid.

    Distinct from plain ValueError (API misuse) so the command-line layer
    can map data problems to their own exit code.
    """
