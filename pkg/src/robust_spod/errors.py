"""Exception types raised by robust_spod."""


class SpodError(Exception):
    """Base class for all package errors."""


class DomainError(SpodError, ValueError):
    """An argument lies outside the domain of the operation."""


class ShapeError(SpodError, ValueError):
    """Array dimensions are inconsistent."""


class ContractError(SpodError, ValueError):
    """An input violates a documented precondition (e.g. unsorted spectrum)."""


class NumericalError(SpodError, ArithmeticError):
    """A linear algebra routine failed, usually on non-finite input."""


class DivergenceError(NumericalError):
    """A solver produced non-finite iterates.

    The history up to the last finite iterate is kept on ``history``.
    """

    def __init__(self, message, history=None, iteration=None):
        super().__init__(message)
        self.history = history
        self.iteration = iteration


class FormatError(SpodError, ValueError):
    """A file does not follow the expected on-disk layout."""
