"""Exception types raised across the package."""


class SeqEffectError(Exception):
    """Base class for all library errors."""


class NotHermitian(SeqEffectError, ValueError):
    pass


class NotPSD(SeqEffectError, ValueError):
    pass


class NoConvergence(SeqEffectError, ArithmeticError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class UnsupportedDim(SeqEffectError, ValueError):
    pass


class DimMismatch(SeqEffectError, ValueError):
    pass


class NotAnEffect(SeqEffectError, ValueError):
    pass


class NotADensity(SeqEffectError, ValueError):
    pass


class NotTracePreserving(SeqEffectError, ValueError):
    pass


class NotAResolution(SeqEffectError, ValueError):
    """POVM elements do not sum to the identity."""


class IndexOutOfRange(SeqEffectError, IndexError):
    pass


class NotAffine(SeqEffectError, ValueError):
    """The candidate is not affine in its second argument, so no linear extension exists."""


class NotInvertible(SeqEffectError, ValueError):
    pass


class UnclassifiedMap(SeqEffectError, ValueError):
    pass


class MatrixFormatError(SeqEffectError, ValueError):
    """Malformed matrix JSON."""
