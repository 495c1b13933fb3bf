"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): bad input
(:class:`ValidationError`, exit 1) and numerical failure
(:class:`NumericalError`, exit 2).
"""

from __future__ import annotations


class FlashError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FlashError, ValueError):
    """Invalid parameters. ``field`` names the offending input when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PreconditionViolated(ValidationError):
    """The configuration lacks the structure an operation requires."""


class ConstraintViolated(ValidationError):
    """The trimer dark-cavity constraint does not hold within tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message, field="detunings")
        self.residual = residual


class DomainError(ValidationError):
    """A derived quantity leaves its real domain (e.g. a negative radicand)."""


class NumericalError(FlashError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""


class SingularMatrix(NumericalError):
    pass


class Unstable(NumericalError):
    """The drift matrix is not Hurwitz, so no attracting steady state exists."""

    def __init__(self, message: str, abscissa: float):
        super().__init__(message)
        self.abscissa = abscissa


class VerificationFailed(NumericalError):
    """An independently re-computed quantity disagreed with the claimed one."""
