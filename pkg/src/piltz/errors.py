"""Exception hierarchy shared by all modules."""


class PiltzError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PiltzError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class ConvergenceError(PiltzError, ArithmeticError):
    """A quadrature or series failed to reach its tolerance within the node cap."""


class ResourceLimitError(PiltzError, MemoryError):
    """A request exceeds the documented memory/size cap."""


class UnsupportedError(PiltzError, NotImplementedError):
    """The operation is deliberately not provided for these arguments."""
