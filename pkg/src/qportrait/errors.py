"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, exit
code 2 on the command line) and :class:`NumericalPreconditionError`
(a well-formed input that hits a numerically undefined case, exit code 3).
"""


class QPortraitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QPortraitError, ValueError):
    """Input does not satisfy a structural invariant.

    ``invariant`` names the first violated invariant when known.
    """

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class NumericalPreconditionError(QPortraitError, ArithmeticError):
    """A numerical precondition (non-zero probability, convergence...) fails."""


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NonZeroTrace(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class CoarseProjector(ValidationError):
    pass


class DirectorTooLong(ValidationError):
    pass


class BadDirector(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class EmptySubset(ValidationError):
    pass


class MissingSetting(ValidationError):
    pass


class ShotCountZero(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed input file; message carries the file name and line."""

    def __init__(self, message, path=None, line=None, invariant=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message, invariant=invariant)
        self.path = path
        self.line = line


class ConvergenceFailure(NumericalPreconditionError):
    pass


class ZeroProbabilityOutcome(NumericalPreconditionError):
    pass


class ZeroProbabilityCondition(NumericalPreconditionError):
    pass
