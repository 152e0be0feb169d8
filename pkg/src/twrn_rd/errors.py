"""Exception and warning types.

Validation problems derive from :class:`ValidationError` (CLI exit code 2).
Solver non-convergence is reported as a warning plus a ``converged=False``
flag on the returned result (CLI exit code 3), never as a hard failure.
"""


class TwrnError(Exception):
    """Base class for all package errors."""


class ValidationError(TwrnError, ValueError):
    """Input failed validation."""


class NegativeProbability(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class NonNormalDistortion(ValidationError):
    pass


class DomainError(ValidationError):
    """Argument outside the mathematical domain of a function."""


class ShapeMismatch(ValidationError):
    pass


class NotHamming(ValidationError):
    pass


class NotDifferenceMeasure(ValidationError):
    pass


class InfeasibleDistortion(ValidationError):
    """No admissible channel meets the requested distortion targets."""


class BudgetExceeded(TwrnError):
    """A brute-force enumeration would exceed its evaluation budget."""


class UnknownCommand(ValidationError):
    pass


class BadInputFile(ValidationError):
    pass


class NoConvergence(RuntimeWarning):
    """A solver stopped before meeting its convergence tolerance.

    Issued through :func:`warnings.warn`; the best iterate is still returned.
    """
