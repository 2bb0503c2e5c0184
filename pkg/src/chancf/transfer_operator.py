"""Transfer operator, transition probabilities and Gauss-Kuzmin iteration.

Grid functions live on uniform nodes over [0, 1].  CDFs and densities are
read off-grid through a monotone piecewise-cubic (PCHIP) interpolant,
residuals through a not-a-knot cubic spline.

The Gauss-Kuzmin recursion maps distribution functions to distribution
functions,

    F_{n+1}(x) = sum_i F_n(m^-i) - F_n(m^-i / (1 + (m-1)x)),

and omega_m is its fixed point.  Because the map is linear, the residual
``R = F - omega_m`` obeys the same recursion.  Iterating R instead of F keeps
full relative precision as the error decays; iterating F directly stalls at
the interpolation error of omega_m on the grid (about 1e-11 for 4097 nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline, PchipInterpolator

from .cf_core import as_params
from .errors import DegenerateFit, DomainError, GridTooCoarse, MonotonicityViolation
from .invariant_measure import cdf_omega, density_rho

KINDS = ("cdf", "density", "residual")


def _interpolator(kind):
    # residuals change sign, so shape preservation buys nothing and PCHIP's
    # flattened extrema would cost accuracy; the spline is also linear in R
    return CubicSpline if kind == "residual" else PchipInterpolator


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on ``len(values)`` uniform nodes of [0, 1].

    ``kind`` is ``"cdf"`` (0 at 0, 1 at 1, nondecreasing), ``"density"``
    (nonnegative) or ``"residual"`` (a CDF minus omega_m; 0 at both ends).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.kind not in KINDS:
            raise DomainError(f"unknown grid function kind {self.kind!r}")
        if v.ndim != 1 or v.size < 2:
            raise DomainError("need at least two nodes")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid values must be finite")
        if self.kind == "cdf":
            if abs(v[0]) > 1e-12 or abs(v[-1] - 1) > 1e-12:
                raise DomainError("cdf must run from 0 to 1")
            if np.any(np.diff(v) < -1e-12):
                raise MonotonicityViolation("cdf values decrease")
        elif self.kind == "density":
            if np.any(v < 0):
                raise DomainError("density values must be nonnegative")
        elif v[0] != 0 or v[-1] != 0:
            raise DomainError("residual must vanish at both ends")

    @classmethod
    def from_function(cls, f, grid_size: int, kind: str) -> "GridFunction":
        return cls(f(np.linspace(0.0, 1.0, grid_size)), kind)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size)

    @cached_property
    def interpolant(self):
        return _interpolator(self.kind)(self.nodes, self.values)

    def __call__(self, x):
        return self.interpolant(x)

    @cached_property
    def interpolation_error(self) -> float:
        """Half-grid estimate: max miss at the odd nodes of the even-node
        interpolant.  Overestimates the full-grid error."""
        n = self.grid_size
        if n < 5:
            return math.inf
        idx = np.arange(0, n, 2)
        if idx[-1] != n - 1:
            idx = np.append(idx, n - 1)
        coarse = _interpolator(self.kind)(self.nodes[idx], self.values[idx])
        rest = np.setdiff1d(np.arange(n), idx)
        return float(np.max(np.abs(coarse(self.nodes[rest]) - self.values[rest])))

    def integral(self) -> float:
        # Simpson: the trapezoid rule misses 1e-8 for steep densities at 4097 nodes
        return float(integrate.simpson(self.values, x=self.nodes))


@dataclass(frozen=True)
class RateReport:
    sup_errors: tuple
    ratios: tuple
    fitted_rate: float
    window: tuple  # (first, last) iteration actually used, inclusive
    requested_window: tuple
    floor: float


# ---------------------------------------------------------------------------
# RSCC transition probabilities

def _transition_prob(i, y, m):
    # valid for any y >= 0; the public wrapper restricts y to [0, 1]
    a = float(m) ** -np.asarray(i, dtype=float)
    return ((m - 1) * (a / m) * (y + 1) * (y + m)
            / ((y + (m - 1) * a + 1) * (y + (m - 1) * (a / m) + 1)))


def transition_prob(i, x, params):
    """P_{m,i}(x); sums to 1 over i for every x."""
    m = as_params(params).m
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("x must lie in [0, 1]")
    if np.any(np.asarray(i) < 0):
        raise DomainError("branch index must be >= 0")
    out = _transition_prob(i, x, m)
    return float(out) if np.ndim(out) == 0 else out


def _series_terms(m: int, rel: float = 1e-17) -> int:
    return math.ceil(math.log(m / rel) / math.log(m)) + 1


def markov_kernel(x: float, a: float, b: float, params) -> float:
    """Q_m(x, [a, b]): total transition probability into branches whose
    preimage point u_{m,i}(x) lands in [a, b]."""
    m = as_params(params).m
    if not 0 <= x <= 1:
        raise DomainError("x must lie in [0, 1]")
    if not 0 <= a <= b <= 1:
        raise DomainError("need 0 <= a <= b <= 1")
    i = np.arange(_series_terms(m))
    u = float(m) ** -i.astype(float) / ((m - 1) * x + 1)
    hit = (u >= a) & (u <= b)
    return float(np.sum(_transition_prob(i[hit], x, m)))


# ---------------------------------------------------------------------------
# transfer operator on densities

def apply_G(f, params, x=None, *, tol: float = 1e-6):
    """Transfer operator of tau_m applied to a density.

    ``f`` is either a callable (evaluated exactly at the preimage points; the
    result is returned at ``x``, default 1001 uniform points) or a density
    :class:`GridFunction`, in which case preimage points are read through the
    PCHIP interpolant and a GridFunction comes back.
    """
    m = as_params(params).m
    grid = isinstance(f, GridFunction)
    if grid:
        if f.kind != "density":
            raise DomainError("apply_G expects a density grid function")
        if f.interpolation_error > tol:
            raise GridTooCoarse(
                f"interpolation error estimate {f.interpolation_error:.3g} "
                f"exceeds {tol:.3g}")
        x = f.nodes
        evaluate = f.interpolant
    else:
        x = np.linspace(0.0, 1.0, 1001) if x is None else np.asarray(x, float)
        evaluate = f
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("x must lie in [0, 1]")
    # tail <= sup f * m^(1-I)
    base = (m - 1) * x + 1
    out = np.zeros_like(x)
    for i in range(_series_terms(m)):
        scale = float(m) ** -i
        out += (m - 1) * scale / base ** 2 * evaluate(scale / base)
    if grid:
        return GridFunction(np.maximum(out, 0.0), "density")
    return out


def apply_ratio_recursion(f, x, params):
    """One step of the recursion for f = (1+(m-1)x)(m+(m-1)x) F'(x):
    sum_i P_{m,i}((m-1)x) f(u_{m,i}(x))."""
    m = as_params(params).m
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(_series_terms(m)):
        u = float(m) ** -i / ((m - 1) * x + 1)
        out += _transition_prob(i, (m - 1) * x, m) * f(u)
    return out


# ---------------------------------------------------------------------------
# Gauss-Kuzmin recursion on distribution functions

def _kuzmin_sum(evaluate, x, m, n_terms):
    out = np.zeros_like(x)
    base = 1.0 + (m - 1) * x
    for i in range(n_terms):
        a = float(m) ** -i
        out += evaluate(np.array([a]))[0] - evaluate(a / base)
    return out


def _check_grid(F: GridFunction, tol: float):
    if F.interpolation_error > tol:
        raise GridTooCoarse(
            f"{F.grid_size}-node grid: interpolation error estimate "
            f"{F.interpolation_error:.3g} exceeds {tol:.3g}")


def _check_monotone(values, what="iterate"):
    worst = float(np.min(np.diff(values)))
    if worst < -1e-9:
        raise MonotonicityViolation(f"{what} decreases by {-worst:.3g}")


def kuzmin_iterate(F: GridFunction, params, *, tol: float = 1e-8,
                   tail: float = 1e-12, max_terms: int = 4000) -> GridFunction:
    """One Gauss-Kuzmin step on a CDF grid function.

    The branch series stops at the first I with F(m^-(I+1)) < ``tail``,
    which bounds the dropped terms.  The result is clamped to [0, 1] and made
    monotone; a decrease beyond 1e-9 raises MonotonicityViolation.
    """
    m = as_params(params).m
    if F.kind != "cdf":
        raise DomainError("kuzmin_iterate expects a cdf grid function")
    _check_grid(F, tol)
    P = F.interpolant
    n_terms = 1
    while n_terms < max_terms and P(float(m) ** -n_terms) >= tail:
        n_terms += 1
    out = _kuzmin_sum(P, F.nodes, m, n_terms)
    _check_monotone(out)
    out = np.maximum.accumulate(np.clip(out, 0.0, 1.0))
    out[0], out[-1] = 0.0, 1.0
    return GridFunction(out, "cdf")


def kuzmin_iterate_residual(R: GridFunction, params, *,
                            tol: float = 1e-8) -> GridFunction:
    """One Gauss-Kuzmin step applied to R = F - omega_m.

    The series is cut at m^-I < 2^-64, a tail bound relative to the slope
    of R at 0, so the relative accuracy of R survives any number of steps.
    """
    p = as_params(params)
    m = p.m
    if R.kind != "residual":
        raise DomainError("kuzmin_iterate_residual expects a residual")
    _check_grid(R, tol)
    n_terms = math.ceil(64 / math.log2(m)) + 1
    out = _kuzmin_sum(R.interpolant, R.nodes, m, n_terms)
    out[0] = out[-1] = 0.0
    _check_monotone(cdf_omega(R.nodes, p) + out)
    return GridFunction(out, "residual")


@dataclass(frozen=True)
class KuzminRun:
    sup_errors: np.ndarray
    final: GridFunction  # cdf
    representation: str
    floor: float


def kuzmin_run(params, *, grid_size: int = 4097, iters: int = 40,
               start="lebesgue", representation: str = "residual",
               tol: float = 1e-8) -> KuzminRun:
    """Iterate the Gauss-Kuzmin recursion and record sup|F_n - omega_m|.

    ``start`` is ``"lebesgue"`` (F_0(x) = x), ``"omega"``, a callable CDF or
    a :class:`~chancf.invariant_measure.MeasureSpec`.  ``floor`` in the
    result is the level below which errors are numerical noise: ten times
    the interpolation error of omega_m for the direct representation, 0 for
    the residual one.
    """
    p = as_params(params)
    if representation not in ("residual", "direct"):
        raise DomainError(f"unknown representation {representation!r}")
    if iters < 0:
        raise DomainError("iters must be >= 0")
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2")
    x = np.linspace(0.0, 1.0, grid_size)
    omega = cdf_omega(x, p)
    omega_grid = GridFunction(omega, "cdf")
    _check_grid(omega_grid, tol)
    if start == "lebesgue":
        F0 = x.copy()
    elif start == "omega":
        F0 = omega.copy()
    elif hasattr(start, "cdf"):
        F0 = np.asarray(start.cdf(x), dtype=float)
    elif callable(start):
        F0 = np.asarray(start(x), dtype=float)
    else:
        raise DomainError(f"unknown start {start!r}")
    F = GridFunction(F0, "cdf")

    errors = []
    if representation == "direct":
        for n in range(iters + 1):
            errors.append(float(np.max(np.abs(F.values - omega))))
            if n < iters:
                F = kuzmin_iterate(F, p, tol=tol)
        final = F
        floor = 10 * omega_grid.interpolation_error
    else:
        R0 = F.values - omega
        R0[0] = R0[-1] = 0.0
        R = GridFunction(R0, "residual")
        for n in range(iters + 1):
            errors.append(float(np.max(np.abs(R.values))))
            if n < iters:
                R = kuzmin_iterate_residual(R, p, tol=tol)
        vals = np.maximum.accumulate(np.clip(omega + R.values, 0.0, 1.0))
        vals[0], vals[-1] = 0.0, 1.0
        final = GridFunction(vals, "cdf")
        floor = 0.0
    return KuzminRun(np.array(errors), final, representation, floor)


def estimate_rate(errors, window=None, floor: float = 0.0) -> RateReport:
    """Geometric rate exp(slope) of a least-squares line through log e_n.

    ``window`` is an inclusive ``(first, last)`` pair of iteration indices
    (default: everything after n = 0).  The window is cut at the first error
    at or below ``floor``; fewer than three usable points raise
    :class:`DegenerateFit`.
    """
    e = np.asarray(errors, dtype=float)
    if np.count_nonzero(e > 0) < 6:
        raise DegenerateFit("need at least six positive errors")
    ratios = np.full(max(e.size - 1, 0), np.nan)
    ok = e[:-1] > 0
    ratios[ok] = e[1:][ok] / e[:-1][ok]
    lo, hi = (1, e.size - 1) if window is None else window
    if not 0 <= lo <= hi < e.size:
        raise DomainError(f"window {window} outside 0..{e.size - 1}")
    last = lo - 1
    for n in range(lo, hi + 1):
        if e[n] <= floor:
            break
        last = n
    if last - lo + 1 < 3:
        raise DegenerateFit(
            f"errors reach the floor {floor:.3g} inside window {(lo, hi)}")
    n = np.arange(lo, last + 1)
    slope = np.polyfit(n, np.log(e[lo:last + 1]), 1)[0]
    return RateReport(tuple(e.tolist()), tuple(ratios.tolist()),
                      float(math.exp(slope)), (int(lo), int(last)),
                      (int(lo), int(hi)), float(floor))


# ---------------------------------------------------------------------------
# contraction constant and the partial-fraction apparatus

def q_bound(params, tol: float = 1e-15) -> float:
    """(m-1)^2 (m^2+1) sum_i 1/(m^(i+1) + m - 1)^2, summed until the
    geometric tail bound drops below ``tol``."""
    m = as_params(params).m
    if tol <= 0:
        raise DomainError("tol must be positive")
    pref = (m - 1) ** 2 * (m * m + 1)
    total, i = 0.0, 0
    while True:
        total += 1.0 / (float(m) ** (i + 1) + m - 1) ** 2
        i += 1
        # sum_{j >= i} m^(-2(j+1)) bounds the remaining terms
        if pref * float(m) ** (-2 * (i + 1)) / (1 - m ** -2.0) < tol:
            return pref * total


@dataclass(frozen=True)
class PartialFractionResiduals:
    delta: float
    beta: float
    partial_fraction: float
    derivative: float


def delta_i(i: int, params) -> float:
    a = float(as_params(params).m) ** -i
    return a - a * a


def beta_i(i: int, x, params):
    m = as_params(params).m
    a = float(m) ** -i
    return (m - 1) * delta_i(i, m) / ((m - 1) * x + (m - 1) * a + 1) ** 2


def _pf_rhs(i, x, m):
    a = float(m) ** -i
    d0, d1 = delta_i(i, m), delta_i(i + 1, m)
    y = (m - 1) * x
    return (m - 1) * (a / m + d0 / (y + (m - 1) * a + 1)
                      - d1 / (y + (m - 1) * a / m + 1))


def partial_fraction_identities(i: int, x: float, params, h: float = 1e-5) -> PartialFractionResiduals:
    """Residuals of the partial-fraction form of P_{m,i}((m-1)x) and of
    its derivative identity (m-1)(beta_{i+1} - beta_i), the latter against a
    central difference of step ``h``."""
    m = as_params(params).m
    if i < 0:
        raise DomainError("branch index must be >= 0")
    if not 0 <= x <= 1:
        raise DomainError("x must lie in [0, 1]")
    lhs = _transition_prob(i, (m - 1) * x, m)
    pf = float(lhs - _pf_rhs(i, x, m))
    fd = (_transition_prob(i, (m - 1) * (x + h), m)
          - _transition_prob(i, (m - 1) * (x - h), m)) / (2 * h)
    deriv = (m - 1) * (beta_i(i + 1, x, m) - beta_i(i, x, m))
    return PartialFractionResiduals(delta_i(i, m), float(beta_i(i, x, m)), pf,
                            float(fd - deriv))


def invariant_density_grid(params, grid_size: int) -> GridFunction:
    return GridFunction.from_function(lambda x: density_rho(x, params),
                                      grid_size, "density")
