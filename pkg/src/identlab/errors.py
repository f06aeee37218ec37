"""Exception hierarchy shared by all identlab modules."""


class IdentLabError(Exception):
    """Base class for every error raised by identlab."""


class NotPositiveDefinite(IdentLabError, ValueError):
    pass


class IndexOutOfRange(IdentLabError, IndexError):
    pass


class InvalidRho(IdentLabError, ValueError):
    pass


class InvalidP(IdentLabError, ValueError):
    pass


class NoValidR(IdentLabError, ValueError):
    """No mixing weight reproduces Bernoulli(p) marginals.

    ``position`` is the first (1-based) sequence position whose marginal
    constraint could not be met.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class DegenerateBase(IdentLabError, ValueError):
    pass


class DegenerateSample(IdentLabError, ValueError):
    pass


class InsufficientData(IdentLabError, ValueError):
    pass


class ArityMismatch(IdentLabError, ValueError):
    pass


class EqualMeans(IdentLabError, ValueError):
    pass


class EqualValues(IdentLabError, ValueError):
    pass


class GridTooNarrow(IdentLabError, ValueError):
    pass


class NotMatched(IdentLabError, ValueError):
    pass


class TooFewPoints(IdentLabError, ValueError):
    pass


class TooLarge(IdentLabError, ValueError):
    pass


class ConfigInvalid(IdentLabError, ValueError):
    pass


class NumericalFailure(IdentLabError, RuntimeError):
    pass


class CheckFailed(IdentLabError, AssertionError):
    pass
