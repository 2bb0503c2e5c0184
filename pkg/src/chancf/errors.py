"""Exception hierarchy.

Domain errors are caller mistakes (CLI exit status 2); everything deriving
from :class:`NumericalFailure` means a computation could not meet its
accuracy contract (CLI exit status 3).
"""


class ChanCFError(Exception):
    pass


class DomainError(ChanCFError, ValueError):
    pass


class TerminatedOrbit(ChanCFError):
    """The orbit reached 0, where the branch index is infinite."""


class EmptyDigits(ChanCFError, ValueError):
    pass


class EmptySample(ChanCFError, ValueError):
    pass


class DegenerateDigits(ChanCFError, ValueError):
    pass


class NumericalFailure(ChanCFError):
    pass


class PrecisionExhausted(NumericalFailure):
    """Interval enclosure straddles a branch boundary at the precision cap.

    ``partial`` holds the digits certified before the ambiguity.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class GridTooCoarse(NumericalFailure):
    pass


class MonotonicityViolation(NumericalFailure):
    pass


class DegenerateFit(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass
