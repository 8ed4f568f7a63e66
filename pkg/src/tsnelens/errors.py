"""Exception types shared across the package."""


class TsneLensError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TsneLensError):
    """Raised when an input violates a documented precondition."""


class ComputationError(TsneLensError):
    """Raised when a computation cannot produce a valid result."""


class NotFoundError(TsneLensError):
    """Raised when a referenced id does not resolve."""


class SearchError(TsneLensError):
    """Raised when a grid search fails as a whole."""
