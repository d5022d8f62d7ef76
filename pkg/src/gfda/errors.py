"""Exception types shared across the package.

Everything derives from GfdaError so callers (and the CLI) can map any
validation-style failure to a single exit path.
"""


class GfdaError(ValueError):
    """Base class for all errors raised by this package."""


class ValidationError(GfdaError):
    """An input violates a documented precondition."""


class DegeneratePairError(GfdaError):
    """Two subspaces overlap: some canonical pair has cosine ~ 1.

    The offending canonical index (0-based) is stored in ``index``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OverlapError(GfdaError):
    """Class subspaces overlap, so a construction that assumes linear
    independence of all basis vectors cannot proceed."""


class UndefinedDirectionError(GfdaError):
    """A direction-dependent quantity was requested for a (numerically)
    zero vector, e.g. normalizing a zero projection."""


class NotApplicableError(GfdaError):
    """A method's structural precondition does not hold for the given data
    (e.g. nullLDA when the within-class scatter has no null space)."""
