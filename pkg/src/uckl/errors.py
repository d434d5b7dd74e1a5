"""Exception types shared across the package."""


class UcklError(Exception):
    """Base class for all errors raised by uckl."""


class DomainError(UcklError, ValueError):
    """Input outside the domain where a quantity is defined."""


class SingularityError(DomainError):
    """Evaluation exactly at a kernel singularity (x == y)."""


class CapacityError(UcklError):
    """A discretization would exceed the configured point cap."""


class UnsupportedError(UcklError, NotImplementedError):
    """Requested a configuration the implementation does not cover."""


class NonConvergenceError(UcklError):
    """An iteration ran out of steps; ``best`` carries the last estimate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
