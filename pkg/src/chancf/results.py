from dataclasses import dataclass


@dataclass(frozen=True)
class QuadratureResult:
    """A computed integral or series with an error estimate.

    ``value`` may be complex (zeta integrals).  ``terms`` is the number of
    series terms or branches used, when that is meaningful.
    """

    value: complex | float
    error: float
    terms: int = 0
    method: str = ""

    def __float__(self):
        return float(self.value)
