"""Error types shared by all wglab modules.

Exit-code mapping used by the CLI: PreconditionError -> 2,
ResourceBudgetError -> 3, usage problems -> 1.
"""


class WglabError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(WglabError):
    """An operation was called outside its documented domain.

    ``code`` is a short machine-readable tag such as ``COPRIMALITY``,
    ``DELTA_TOO_LARGE``, ``NONPOSITIVE_N`` or ``UNSOLVABLE``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class ResourceBudgetError(WglabError):
    """A computation would exceed its configured memory or size budget."""
