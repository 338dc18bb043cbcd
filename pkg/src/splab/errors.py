"""Exception types shared across the package."""


class SplabError(Exception):
    """Base class for errors raised by this package."""


class GeometryError(SplabError):
    """A domain specification or derived region is geometrically invalid."""


class ResourceLimitError(SplabError):
    """A requested computation exceeds a configured resource cap."""


class NumericError(SplabError):
    """An iterative solver failed to reach its tolerance.

    Carries the residual history of the failed solve when available.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history) if residual_history is not None else []


class StagnationError(SplabError):
    """Descent stalled at the machine step floor; carries the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
