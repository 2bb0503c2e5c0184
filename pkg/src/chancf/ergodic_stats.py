"""Monte-Carlo pushforwards, Birkhoff averages and the ergodic constants.

Orbit simulation here runs in double precision on purpose.  Pointwise
orbits lose all accuracy after a few dozen steps, but the statistics computed
here are averages over many points or many steps and are insensitive to that
shadowing error.  Digit-accurate expansions live in :mod:`chancf.cf_core`.

Random streams come from counter-based Philox generators keyed by
``SeedSequence([seed, block])``.  Work is split into fixed-size blocks, so
results are bit-identical whatever the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .cf_core import ChanParams, as_params, tau_array, tau_step
from .errors import DegenerateDigits, DomainError, EmptySample, QuadratureFailure
from .invariant_measure import (
    MeasureSpec,
    cdf_omega,
    density_rho,
    digit_probability,
    sample_gamma,
)
from .results import QuadratureResult

KS_FLOOR_COEFF = 1.36  # 95% quantile of the Kolmogorov distribution


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov

def ks_statistic(sorted_samples, cdf) -> float:
    """One-sample sup distance between the empirical CDF and ``cdf``."""
    x = np.asarray(sorted_samples, dtype=float)
    n = x.size
    if n == 0:
        raise EmptySample("KS statistic of an empty sample")
    if np.any(np.diff(x) < 0):
        raise DomainError("samples must be sorted ascending")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))


# ---------------------------------------------------------------------------
# pushforward experiment

@dataclass(frozen=True)
class SimulationConfig:
    params: ChanParams
    samples: int
    iterations: int
    seed: int = 0
    initial: MeasureSpec = field(default_factory=MeasureSpec)
    block_size: int = 1 << 16

    def __post_init__(self):
        object.__setattr__(self, "params", as_params(self.params))
        if self.samples < 1:
            raise DomainError("need at least one sample")
        if self.iterations < 0:
            raise DomainError("iterations must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.block_size < 1:
            raise DomainError("block_size must be positive")


@dataclass(frozen=True)
class ErrorReport:
    ks: np.ndarray  # KS distance to omega_m after n = 0..iterations steps
    eval_grid: np.ndarray
    errors: np.ndarray  # empirical CDF minus omega_m on eval_grid, per step
    samples: int

    @property
    def sampling_noise(self) -> float:
        return KS_FLOOR_COEFF / math.sqrt(self.samples)


def _draw_block(cfg: SimulationConfig, b: int) -> np.ndarray:
    size = min(cfg.block_size, cfg.samples - b * cfg.block_size)
    u = block_rng(cfg.seed, b).random(size)
    return np.asarray(cfg.initial.sample(u), dtype=float).reshape(size)


def simulate_pushforward(cfg: SimulationConfig, *, threads: int = 1,
                         eval_points: int = 101) -> ErrorReport:
    """Push N samples of the initial measure through tau_m and measure the
    KS distance of each generation to omega_m."""
    p = cfg.params
    n_blocks = -(-cfg.samples // cfg.block_size)
    grid = np.linspace(0.0, 1.0, eval_points)
    omega_grid = cdf_omega(grid, p)
    ks, errs = [], []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(lambda b: _draw_block(cfg, b), range(n_blocks)))
        for n in range(cfg.iterations + 1):
            x = np.sort(np.concatenate(blocks))
            ks.append(ks_statistic(x, lambda y: cdf_omega(y, p)))
            errs.append(np.searchsorted(x, grid, side="right") / x.size - omega_grid)
            if n < cfg.iterations:
                blocks = list(pool.map(lambda xb: tau_array(xb, p), blocks))
    return ErrorReport(np.array(ks), grid, np.array(errs), cfg.samples)


# ---------------------------------------------------------------------------
# float orbits

def _orbit(x0: float, steps: int, m: int, rng, visit):
    """Run a float orbit, calling visit(x, digit) at each point.

    An orbit that lands exactly on 0 (a rational endpoint) is restarted from
    a fresh gamma_m draw; returns the number of restarts.
    """
    logm = math.log(m)
    kmax = int(1000 / math.log2(m))  # m^k stays finite below this
    down = [float(m) ** -k if k < kmax else 0.0 for k in range(1100)]
    up = [float(m) ** k for k in range(kmax)]
    x = x0
    restarts = 0
    for _ in range(steps):
        while x == 0.0:
            restarts += 1
            x = sample_gamma(rng.random(), m)
        i = int(-math.log(x) / logm)
        if x > down[i]:
            i -= 1
        elif x <= down[i + 1]:
            i += 1
        visit(x, i)
        if i < kmax:
            x = (1.0 / (x * up[i]) - 1.0) / (m - 1)
        else:
            x = tau_step(x, m)
    return restarts


def orbit_digits(x0: float, n: int, params, seed: int = 0) -> list:
    """Digits of the float orbit of x0 (see the module note on shadowing)."""
    m = as_params(params).m
    out = []
    _orbit(x0, n, m, block_rng(seed, 1), lambda x, i: out.append(i))
    return out


OBSERVABLES = ("one", "digit", "neg_log", "log_deriv")


def birkhoff_average(observable: str, params, steps: int, seed: int = 0) -> float:
    """Time average of an observable along one float orbit started at a
    gamma_m-distributed point.

    Observables: ``one``, ``digit`` (a_1), ``neg_log`` (-log x) and
    ``log_deriv`` (log|tau_m'(x)|).
    """
    p = as_params(params)
    m = p.m
    if observable not in OBSERVABLES:
        raise DomainError(f"observable must be one of {OBSERVABLES}")
    if steps < 1:
        raise DomainError("steps must be >= 1")
    rng = block_rng(seed, 0)
    x0 = sample_gamma(rng.random(), p)
    logm, lm1 = math.log(m), math.log(m - 1)
    acc = [0.0]
    if observable == "one":
        def visit(x, i):
            acc[0] += 1.0
    elif observable == "digit":
        def visit(x, i):
            acc[0] += i
    elif observable == "neg_log":
        def visit(x, i):
            acc[0] -= math.log(x)
    else:
        def visit(x, i):
            acc[0] += -i * logm - lm1 - 2.0 * math.log(x)
    _orbit(x0, steps, m, rng, visit)
    return acc[0] / steps


# ---------------------------------------------------------------------------
# constants

def khinchin_chi(params, tol: float = 1e-13) -> QuadratureResult:
    """(log m) * sum_i i * gamma_m(I_i), the almost-sure limit of the log
    geometric mean of m^{a_n}."""
    p = as_params(params)
    m = p.m
    if tol <= 0:
        raise DomainError("tol must be positive")
    r = 1.0 / m
    total, i = 0.0, 1
    while True:
        total += i * digit_probability(i, p)
        i += 1
        # sum_{j >= i} j rho_max m^-j, closed form
        tail = p.rho_max * r ** i * (i * (1 - r) + r) / (1 - r) ** 2
        if tail * math.log(m) < tol:
            break
    return QuadratureResult(math.log(m) * total, tail * math.log(m), i, "series")


def levy_growth(params, tol: float = 1e-11) -> QuadratureResult:
    """k_m * int_0^1 -log t / (((m-1)t+1)((m-1)t+m)) dt.

    Computed as an integral over u in [0, inf) after t = exp(-u), which
    removes the log singularity at t = 0.
    """
    p = as_params(params)
    m = p.m
    if tol <= 0:
        raise DomainError("tol must be positive")

    def integrand(u):
        t = math.exp(-u)
        return u * t / (((m - 1) * t + 1) * ((m - 1) * t + m))

    # integrand <= u e^-u / m, so the tail past U is below (U+1) e^-U / m
    upper = 50.0
    tail = (upper + 1) * math.exp(-upper) / m
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=tol / 100,
                              epsrel=0.0, limit=500)
    err = p.k_m * (err + tail)
    if err > tol:
        raise QuadratureFailure(f"levy_growth error {err:.3g} exceeds {tol:.3g}")
    return QuadratureResult(p.k_m * val, err, 0, "quad, t = exp(-u)")


def levy_growth_bound(params) -> float:
    p = as_params(params)
    m = p.m
    return p.k_m * (3 * m - 1) / (2 * m * (2 * m - 1))


@dataclass(frozen=True)
class EntropyResult:
    quadrature: QuadratureResult  # int log|tau'| rho, branch by branch
    identity: QuadratureResult  # 2 levy_growth - chi - log(m-1)

    @property
    def discrepancy(self) -> float:
        return abs(self.quadrature.value - self.identity.value)


def entropy(params, tol: float = 1e-10) -> EntropyResult:
    """Entropy of tau_m w.r.t. gamma_m, by Rohlin's integral and by the
    identity through the growth and Khinchin constants."""
    p = as_params(params)
    m = p.m
    if tol <= 0:
        raise DomainError("tol must be positive")
    logm, lm1 = math.log(m), math.log(m - 1)
    total, err, i = 0.0, 0.0, 0
    while True:
        a, b = float(m) ** -(i + 1), float(m) ** -i

        def integrand(x, i=i):
            return (-i * logm - lm1 - 2.0 * math.log(x)) * density_rho(x, p)

        v, e = integrate.quad(integrand, a, b, epsabs=tol / 100, epsrel=1e-14)
        total += v
        err += e
        i += 1
        # |log tau'| <= (j+2) log m + log(m-1) on I_j, and gamma(I_j) <= rho_max m^-j
        j = np.arange(i, i + 400)
        tail = float(np.sum(((j + 2) * logm + lm1) * p.rho_max * float(m) ** -j.astype(float)))
        if tail < tol / 10:
            break
    if err + tail > tol:
        raise QuadratureFailure(f"entropy error {err + tail:.3g} exceeds {tol:.3g}")
    quad = QuadratureResult(total, err + tail, i, "branchwise quad")
    eta = levy_growth(p, tol / 4)
    chi = khinchin_chi(p, tol / 4)
    ident = QuadratureResult(2 * eta.value - chi.value - lm1,
                             2 * eta.error + chi.error, 0, "identity")
    return EntropyResult(quad, ident)


# ---------------------------------------------------------------------------
# random Fibonacci-type recurrence

@dataclass(frozen=True)
class GrowthResult:
    estimates: tuple  # (1/n) log f_n, one per digit source
    mean: float
    stderr: float
    n: int


def fibonacci_log_trace(digits, params) -> np.ndarray:
    """log f_1, ..., log f_n for f_n = m^{a_n} f_{n-1} + (m-1) m^{a_{n-1}} f_{n-2}
    with f_{-1} = 0, f_0 = 1, a_0 = 0.

    Tracks r = f_{n-1}/f_n, so f_n/f_{n-1} = m^{a_n} + (m-1) m^{a_{n-1}} r
    and nothing overflows.
    """
    m = as_params(params).m
    logm = math.log(m)
    out = np.empty(len(digits))
    logf, c = 0.0, 0.0  # c = (m-1) m^{a_{n-1}} r_{n-1}, in [0, m-1]
    for k, a in enumerate(digits):
        step = a * logm + math.log1p(c * math.exp(-a * logm))
        logf += step
        out[k] = logf
        # next c uses a_n and r_n = exp(-step)
        c = (m - 1) * math.exp(a * logm - step)
    return out


def random_fibonacci(params, n: int, seeds=(0,), digits=None) -> GrowthResult:
    """Growth exponents (1/n) log f_n of the random Fibonacci recurrence.

    Digits come from ``digits`` if given, otherwise from the float orbit of
    a gamma_m-distributed starting point for each seed.
    """
    p = as_params(params)
    if n < 2:
        raise DomainError("n must be >= 2")
    if digits is not None:
        ds = list(digits)
        if len(ds) < n:
            raise DegenerateDigits(f"need {n} digits, got {len(ds)}")
        sources = [ds[:n]]
    else:
        sources = []
        for s in seeds:
            rng = block_rng(s, 0)
            x0 = sample_gamma(rng.random(), p)
            sources.append(orbit_digits(x0, n, p, seed=s))
    est = [fibonacci_log_trace(d, p)[-1] / n for d in sources]
    mean = float(np.mean(est))
    se = float(np.std(est, ddof=1) / math.sqrt(len(est))) if len(est) > 1 else math.nan
    return GrowthResult(tuple(float(e) for e in est), mean, se, n)
