"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GFCError(Exception):
    """Base class for every error raised by :mod:`gfc`."""


class DomainError(GFCError, ValueError):
    """An argument lies outside the domain of a function or constructor."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. the Gamma function at a non-positive integer)."""


class RangeOverflowError(GFCError, OverflowError):
    """Result is not representable in double precision."""


class NonConvergenceError(GFCError, ArithmeticError):
    """An iterative method did not reach its error budget."""


class ParseError(GFCError, ValueError):
    """Syntax error in an expression, with a byte offset into the source."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ParseError):
    pass


class DomainFault(GFCError, ArithmeticError):
    """Evaluation of an expression left the real domain of a subexpression."""

    def __init__(self, message: str, subexpression: str = "", value: float | None = None):
        self.subexpression = subexpression
        self.value = value
        super().__init__(message)


class MonotonicityError(DomainError):
    """A map or a series is not strictly increasing where it must be."""

    def __init__(self, message: str, position: float | int | None = None):
        self.position = position
        super().__init__(message)


class ToleranceNotMetError(GFCError, ArithmeticError):
    """Quadrature could not meet its tolerance; carries the best estimate."""

    def __init__(self, message: str, estimate=None, error=None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)


class CertificationError(GFCError):
    """No reading of a kernel pair passed the Sonin certifier."""


class MissingDerivativeError(GFCError, ValueError):
    pass
