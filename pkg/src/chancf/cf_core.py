"""The base-m map tau_m, its digits, inverse branches and finite expansions.

A point x in (0, 1] lies in exactly one branch interval
``I_i = (m**-(i+1), m**-i]`` and on that branch

    tau_m(x) = (1/(m-1)) * (1/(m**i * x) - 1).

Iterating tau_m and recording the branch indices gives the digits of

    x = m**-a1 / (1 + (m-1) m**-a2 / (1 + (m-1) m**-a3 / (1 + ...))).

Two arithmetic paths are provided.  Exact rationals (``fractions.Fraction``)
are closed under tau_m, so their digits are always certified.  Everything
else goes through directed-rounding interval enclosures, and a digit is only
emitted when the whole enclosure sits inside one branch.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral

import mpmath
import numpy as np
from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import fone, fzero, mpf_gt, mpf_lt, to_rational

from .errors import DomainError, EmptyDigits, PrecisionExhausted, TerminatedOrbit

DEFAULT_PRECISION_BITS = 256
MAX_PRECISION_BITS = 8192
PRECISION_ENV = "CHAN_CF_PRECISION_BITS"


def default_precision_bits() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise DomainError(f"{PRECISION_ENV} must be an integer, got {raw!r}")
    if bits < 53:
        raise DomainError(f"{PRECISION_ENV} must be at least 53, got {bits}")
    return bits


@dataclass(frozen=True)
class ChanParams:
    """Base ``m >= 2`` together with its derived constants."""

    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, Integral):
            raise DomainError(f"m must be an integer, got {self.m!r}")
        if self.m < 2:
            raise DomainError(f"m must be >= 2, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def alpha(self) -> Fraction:
        return Fraction(1, self.m)

    @cached_property
    def log_norm(self) -> float:
        """log(m^2 / (2m - 1)), the normaliser shared by every formula."""
        m = self.m
        return math.log1p((m - 1) ** 2 / (2 * m - 1))

    @cached_property
    def k_m_mp(self) -> mpmath.mpf:
        m = self.m
        with mpmath.workdps(50):
            return +((m - 1) ** 2 / mpmath.log(mpmath.mpf(m * m) / (2 * m - 1)))

    @cached_property
    def k_m(self) -> float:
        return float(self.k_m_mp)

    @property
    def rho_max(self) -> float:
        # density is decreasing, so the max sits at x = 0
        return self.k_m / self.m


def as_params(params) -> ChanParams:
    if isinstance(params, ChanParams):
        return params
    return ChanParams(params)


@dataclass(frozen=True)
class DigitSequence:
    digits: tuple
    terminated: bool
    reliable_count: int
    mode: str  # "exact" | "validated"

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if any(d < 0 for d in self.digits):
            raise DomainError("digits must be non-negative")
        if not 0 <= self.reliable_count <= len(self.digits):
            raise DomainError("reliable_count must lie in [0, len(digits)]")
        if self.mode not in ("exact", "validated"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "exact" and self.reliable_count != len(self.digits):
            raise DomainError("exact sequences are fully reliable")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, k):
        return self.digits[k]


def unit_rational(numerator: int, denominator: int = 1) -> Fraction:
    """Exact rational in [0, 1]; Fraction already keeps lowest terms."""
    if denominator <= 0:
        raise DomainError("denominator must be positive")
    x = Fraction(numerator, denominator)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} is outside [0, 1]")
    return x


# ---------------------------------------------------------------------------
# exact helpers

def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite input {x}")
        return Fraction(*x.as_integer_ratio())
    if isinstance(x, mpmath.mpf):
        return Fraction(*(int(v) for v in to_rational(x._mpf_)))
    if isinstance(x, np.floating):
        return _as_fraction(float(x))
    raise DomainError(f"unsupported number type {type(x).__name__}")


def _branch_of_ratio(p: int, q: int, m: int) -> int:
    """Unique i with m**i * p <= q < m**(i+1) * p, for 0 < p <= q."""
    i = max(0, int((q.bit_length() - p.bit_length()) / math.log2(m)) - 2)
    mp = m ** i * p
    while mp > q:  # guess overshot
        i -= 1
        mp //= m
    while mp * m <= q:
        i += 1
        mp *= m
    return i


def _check_unit(x, *, allow_one=True):
    if x < 0 or x > 1 or (not allow_one and x == 1):
        hi = "1]" if allow_one else "1)"
        raise DomainError(f"x = {x} is outside [0, {hi}")


# ---------------------------------------------------------------------------
# scalar operations

def branch_index(x, params) -> int:
    """Index i of the branch interval (m^-(i+1), m^-i] containing x.

    The comparison is exact for floats, ints, Fractions and mpf values, so
    exact powers m^-i map to i.  ``x == 0`` raises :class:`TerminatedOrbit`.
    """
    m = as_params(params).m
    r = _as_fraction(x)
    _check_unit(r)
    if r == 0:
        raise TerminatedOrbit("branch index of 0 is infinite")
    return _branch_of_ratio(r.numerator, r.denominator, m)


def tau_step(x, params):
    """One application of tau_m.  Fractions stay exact; floats stay floats."""
    m = as_params(params).m
    if isinstance(x, (Fraction, Integral)):
        r = Fraction(x)
        _check_unit(r)
        if r == 0:
            return Fraction(0)
        i = _branch_of_ratio(r.numerator, r.denominator, m)
        return (1 / (m ** i * r) - 1) / (m - 1)
    x = float(x)
    _check_unit(x)
    if x == 0.0:
        return 0.0
    i = branch_index(x, m)
    if i * math.log2(m) > 1000:
        # m**i would overflow a float product
        return float(tau_step(_as_fraction(x), m))
    return (1.0 / (m ** i * x) - 1.0) / (m - 1)


def inverse_branch(x, i: int, params):
    """u_{m,i}(x) = m^-i / ((m-1)x + 1), the branch-i preimage of x."""
    m = as_params(params).m
    if i < 0:
        raise DomainError(f"branch index must be >= 0, got {i}")
    if isinstance(x, (Fraction, Integral)):
        r = Fraction(x)
        _check_unit(r)
        return Fraction(1, m ** i) / ((m - 1) * r + 1)
    x = float(x)
    _check_unit(x)
    return m ** -float(i) / ((m - 1) * x + 1.0)


def fixed_point_branch0(params) -> float:
    """Root of (m-1)x^2 + x - 1 = 0, the fixed point of tau_m in I_0."""
    m = as_params(params).m
    return (math.sqrt(4 * m - 3) - 1.0) / (2 * (m - 1))


def evaluate_cf(digits, params, *, exact: bool = False):
    """Evaluate the finite expansion [a1, ..., an]_m bottom-up.

    The infinite tail is taken as 0, which is exact for terminated
    sequences.  With ``exact=True`` the result is a Fraction.
    """
    m = as_params(params).m
    ds = tuple(digits)
    if not ds:
        raise EmptyDigits("cannot evaluate an empty digit sequence")
    if exact:
        t = Fraction(0)
        for a in reversed(ds[1:]):
            t = Fraction(m - 1, m ** a) / (1 + t)
        return Fraction(1, m ** ds[0]) / (1 + t)
    t = 0.0
    for a in reversed(ds[1:]):
        t = (m - 1) * m ** -float(a) / (1.0 + t)
    return m ** -float(ds[0]) / (1.0 + t)


# ---------------------------------------------------------------------------
# expansions

def expand_rational(x, n: int, params) -> DigitSequence:
    """Exact digits of a rational x in [0, 1), up to depth n."""
    m = as_params(params).m
    r = Fraction(x)
    _check_unit(r, allow_one=False)
    if n < 0:
        raise DomainError("digit count must be >= 0")
    digits = []
    terminated = r == 0
    while len(digits) < n and not terminated:
        p, q = r.numerator, r.denominator
        i = _branch_of_ratio(p, q, m)
        digits.append(i)
        # tau on branch i: (q - m^i p) / ((m-1) m^i p)
        mip = m ** i * p
        r = Fraction(q - mip, (m - 1) * mip)
        terminated = r == 0
    return DigitSequence(tuple(digits), terminated, len(digits), "exact")


def _interval_endpoints(X):
    a, b = X._mpi_
    return (Fraction(*(int(v) for v in to_rational(a))),
            Fraction(*(int(v) for v in to_rational(b))))


def _enclose(x, ctx):
    if isinstance(x, tuple):
        lo, hi = ctx.mpf(x[0]), ctx.mpf(x[1])
        return ctx.make_mpf((lo._mpi_[0], hi._mpi_[1]))
    return ctx.mpf(x)


def _clip_unit(X, ctx):
    """Intersect an enclosure with [0, 1] (tau_m maps into it)."""
    a, b = X._mpi_
    if mpf_lt(a, fzero):
        a = fzero
    if mpf_gt(b, fone):
        b = fone
    return ctx.make_mpf((a, b))


def _expand_interval(x, n: int, m: int, prec: int) -> DigitSequence:
    ctx = MPIntervalContext()
    ctx.prec = prec
    X = _enclose(x, ctx)
    lo, hi = _interval_endpoints(X)
    if hi < 0 or lo >= 1 or lo > hi:
        raise DomainError(f"x = {x} is outside [0, 1)")
    X = _clip_unit(X, ctx)
    digits = []
    terminated = False
    while len(digits) < n:
        lo, hi = _interval_endpoints(X)
        if hi == 0:
            terminated = True
            break
        if lo == 0:
            break  # enclosure touches 0: digit unbounded
        i = _branch_of_ratio(lo.numerator, lo.denominator, m)
        if i != _branch_of_ratio(hi.numerator, hi.denominator, m):
            break
        digits.append(i)
        X = _clip_unit((1 / (ctx.mpf(m ** i) * X) - 1) / (m - 1), ctx)
    return DigitSequence(tuple(digits), terminated, len(digits), "validated")


def expand(x, n: int, params, *, precision_bits: int | None = None,
           max_precision_bits: int = MAX_PRECISION_BITS,
           strict: bool = True) -> DigitSequence:
    """First n digits of x.

    Fractions and ints take the exact path.  Floats, mpf values, decimal
    strings and ``(lo, hi)`` enclosures take the validated path: the input
    is enclosed at ``precision_bits`` (default 256, or the environment
    override) and the precision is doubled on ambiguity up to
    ``max_precision_bits``.  A float whose orbit cannot be resolved by
    intervals (it hits 0 or a branch endpoint exactly) is finished in exact
    rational arithmetic.  If digits are still missing, ``strict`` raises
    :class:`PrecisionExhausted`, otherwise the partial sequence is returned.
    """
    p = as_params(params)
    if n < 1:
        raise DomainError("digit count must be >= 1")
    if isinstance(x, (Fraction, Integral)) and not isinstance(x, bool):
        return expand_rational(x, n, p)
    if isinstance(x, float) or isinstance(x, np.floating):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"non-finite input {x}")
        _check_unit(x, allow_one=False)
    prec = precision_bits or default_precision_bits()
    while True:
        seq = _expand_interval(x, n, p.m, prec)
        if seq.terminated or len(seq) == n:
            return seq
        if prec * 2 > max_precision_bits:
            if isinstance(x, float):
                # a float is an exact dyadic rational; orbits that land on
                # 0 (or a branch boundary) cannot be certified by intervals
                exact = expand_rational(Fraction(x), n, p)
                if exact.digits[: len(seq)] == seq.digits:
                    return exact
            if strict:
                raise PrecisionExhausted(
                    f"only {seq.reliable_count} of {n} digits certified at "
                    f"{prec} bits", partial=seq)
            return seq
        prec *= 2


# ---------------------------------------------------------------------------
# vectorised float versions used by the Monte-Carlo code

def branch_index_array(x: np.ndarray, params) -> np.ndarray:
    """Branch indices for float x > 0; agrees with :func:`branch_index`."""
    m = as_params(params).m
    x = np.asarray(x, dtype=float)
    i = np.floor(-np.log(x) / math.log(m)).astype(np.int64)
    i = np.maximum(i, 0)
    # log rounding can be off by one near m^-i
    i = np.where(x > np.power(float(m), -i.astype(float)), i - 1, i)
    i = np.where(x <= np.power(float(m), -(i + 1).astype(float)), i + 1, i)
    # m^-i is rounded in float; settle values within a few ulps of an
    # endpoint with the exact comparison
    near = np.zeros(x.shape, dtype=bool)
    for k in (i, i + 1):
        edge = np.power(float(m), -k.astype(float))
        near |= np.abs(x - edge) <= 4 * np.spacing(edge)
    flat, xf = i.reshape(-1), x.reshape(-1)
    for j in np.flatnonzero(near):
        flat[j] = branch_index(float(xf[j]), m)
    return flat.reshape(x.shape)


def tau_array(x: np.ndarray, params) -> np.ndarray:
    """tau_m applied elementwise; 0 maps to 0."""
    m = as_params(params).m
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x > 0
    xs = x[nz]
    i = branch_index_array(xs, m)
    big = i * math.log2(m) > 1000  # m**i would overflow; rare, so go exact
    vals = np.empty_like(xs)
    small = ~big
    vals[small] = (1.0 / (np.power(float(m), i[small].astype(float)) * xs[small]) - 1.0) / (m - 1)
    vals[big] = [float(tau_step(_as_fraction(float(v)), m)) for v in xs[big]]
    out[nz] = vals
    np.clip(out, 0.0, 1.0, out=out)
    return out
