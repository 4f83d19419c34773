"""Exception hierarchy shared by the library and the command line."""


class MBCRError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(MBCRError, ValueError):
    """Invalid parameters: out-of-range indices, bad shapes, mismatched fields."""


class UnsupportedRegimeError(ParameterError):
    """Bound queries outside d >= k."""


class UnsupportedFailurePatternError(ParameterError):
    """Failure set size differs from r, or the survivor set is incomplete."""


class InsufficientSharesError(ParameterError):
    """Fewer than k shares offered for reconstruction."""


class SingularMatrixError(MBCRError, ArithmeticError):
    """A linear system over the field has no unique solution."""


class CorruptionError(MBCRError):
    """Stored data is inconsistent with the code (tampered or damaged shares)."""


class ShareMismatchError(CorruptionError):
    """Share headers disagree on parameters, length or stripe count."""


class SpecParseError(ParameterError):
    """A text input (history spec, schedule) could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
