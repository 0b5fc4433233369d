"""Exception hierarchy shared by every module of the package."""


class ElrfError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(ElrfError):
    """A system, loop or dual refers to something it does not declare."""


class ResourceError(ElrfError):
    """A configured resource cap (FM row cap, retry cap) was exceeded."""


class PreconditionError(ElrfError):
    """An operation was called on an input that violates its contract."""


class SolverError(ElrfError):
    """Internal inconsistency detected in a solver result.

    Raised instead of returning a wrong verdict; seeing one is a bug.
    """
