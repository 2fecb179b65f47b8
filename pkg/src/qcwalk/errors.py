"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument is outside the domain an operation accepts."""


class GraphError(InvalidArgument):
    """A graph is not simple, undirected and connected."""


class SizeLimitError(InvalidArgument):
    """Brute-force enumeration was requested above the configured cap."""


class NumericalFailure(RuntimeError):
    """A numerical routine produced an invalid result (drift, negativity, solver failure)."""


class NotConverged(NumericalFailure):
    """A quantity that should have plateaued has not."""

    def __init__(self, message, late=None, early=None):
        super().__init__(message)
        self.late = late
        self.early = early
