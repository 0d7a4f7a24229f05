"""Exception hierarchy with stable machine-readable codes.

Every error that can surface through the CLI carries a ``code`` attribute so
that failures serialize deterministically.
"""


class KahlerDynError(Exception):
    """Base class for all library errors."""

    code = "Error"

    def __init__(self, message=""):
        super().__init__(message or self.__doc__)


class NotInvertible(KahlerDynError):
    """Matrix has zero determinant."""

    code = "NotInvertible"


class ThetaNotResolved(KahlerDynError):
    """Plain (untwisted) limit requested but the dominant angles generate a
    positive-dimensional closure, so no canonical subsequence exists."""

    code = "ThetaNotResolved"


class ConeNotPreserved(KahlerDynError):
    """The map does not send the given cone into itself."""

    code = "ConeNotPreserved"


class OverflowBudget(KahlerDynError):
    """Exact entries exceeded the configured digit budget; lower the range."""

    code = "Overflow"


class NotUnitDeterminant(KahlerDynError):
    """Determinant is not a Gaussian unit, so the map is not invertible on
    the lattice."""

    code = "NotUnitDeterminant"


class EmptyWord(KahlerDynError):
    """Composition word is empty."""

    code = "EmptyWord"


class DimensionMismatch(KahlerDynError):
    """Inconsistent dimensions in supplied data."""

    code = "DimensionMismatch"


class CupIncompatible(KahlerDynError):
    """Pullback does not respect the supplied product structure."""

    code = "CupIncompatible"


class CupMissing(KahlerDynError):
    """Operation needs a product structure the model does not carry."""

    code = "CupMissing"


class NotEigenclass(KahlerDynError):
    """Supplied class is not an eigenvector of the pullback for the claimed
    factor."""

    code = "NotEigenclass"


class HypothesisViolated(KahlerDynError):
    """Iteration hypotheses (expansion constants > 1) fail."""

    code = "HypothesisViolated"


class DegenerateFunction(KahlerDynError):
    """Function is constant; regularity exponent is not measurable."""

    code = "DegenerateFunction"


class NoExpansion(KahlerDynError):
    """First degree equals 1; there is no expanding direction to normalize."""

    code = "NoExpansion"


class ZeroFrequency(KahlerDynError):
    """A character frequency vector is zero (constant observable)."""

    code = "ZeroFrequency"


class NotHyperbolic(KahlerDynError):
    """The lattice map has an eigenvalue of modulus one."""

    code = "NotHyperbolic"


class ParseError(KahlerDynError):
    """Configuration text could not be parsed."""

    code = "ParseError"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(KahlerDynError):
    """Configuration violated an invariant."""

    code = "ValidationError"


class AliasWarning(UserWarning):
    """Pulled-back frequencies exceeded the grid Nyquist limit; the reported
    range was truncated."""
