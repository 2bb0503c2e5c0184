"""Base-m continued fractions: map, invariant measure, transfer
operator, ergodic constants and Mellin-type zeta integrals."""

from .cf_core import (
    ChanParams,
    DigitSequence,
    as_params,
    branch_index,
    evaluate_cf,
    expand,
    expand_rational,
    fixed_point_branch0,
    inverse_branch,
    tau_step,
    unit_rational,
)
from .errors import (
    ChanCFError,
    DegenerateDigits,
    DegenerateFit,
    DomainError,
    EmptyDigits,
    EmptySample,
    GridTooCoarse,
    MonotonicityViolation,
    NumericalFailure,
    PrecisionExhausted,
    QuadratureFailure,
    TerminatedOrbit,
)

__version__ = "0.1.0"
