"""Error taxonomy shared across the package.

Exit-code mapping used by the CLI: InputError -> 2, ResourceError -> 3,
SearchError -> 4.
"""


class MultfunError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(MultfunError):
    """Invalid argument, malformed value, or out-of-range input."""

    exit_code = 2


class ResourceError(MultfunError):
    """Operation would exceed the configured memory/compute budget."""

    exit_code = 3


class SearchError(MultfunError):
    """A bounded search exhausted its bounds without a hit."""

    exit_code = 4
