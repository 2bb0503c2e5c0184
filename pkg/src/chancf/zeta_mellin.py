"""Mellin-type integrals of interval maps over the critical strip.

For the Gauss map tau(x) = 1/x - floor(1/x) and 0 < Re(s) < 1,

    zeta(s) = s/(s-1) - s * int_0^1 tau(x) x^(s-1) dx,

(equivalently 1 + 1/(s-1) - s * int ...; dropping the leading 1 gives
zeta(s) - 1).  The base-m analogue is defined literally as

    Z_m(s) = 1/(s-1) - s * int_0^1 tau_m(x) x^(s-1) dx.

On every branch interval
the integrand is a combination of powers of x, so each branch integrates in
closed form; the functions here sum branch antiderivatives and bound or
correct the tail.  The ``*_quadrature`` variants integrate numerically
instead and serve as independent cross-checks.

Complex powers use the principal branch, x^s = exp(s log x) with x > 0.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import integrate
from scipy.special import bernoulli

from .cf_core import as_params
from .errors import DomainError, QuadratureFailure
from .results import QuadratureResult


def _strip_point(s) -> complex:
    s = complex(s)
    if not 0 < s.real < 1:
        raise DomainError(f"s = {s} is outside the strip 0 < Re(s) < 1")
    return s


def _hurwitz_tail(s: complex, a: int, terms: int = 12):
    """Euler-Maclaurin expansion of zeta(s, a) for large integer a, with a
    Backlund-type bound on the remainder."""
    B = bernoulli(2 * terms + 2)
    val = a ** (1 - s) / (s - 1) + 0.5 * a ** (-s)
    rising = s  # (s)_{2j-1}, the rising factorial
    for j in range(1, terms + 2):
        term = B[2 * j] / math.factorial(2 * j) * rising * a ** (-s - 2 * j + 1)
        if j <= terms:
            val += term
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    err = abs(term) * abs(s + 2 * terms + 1) / (s.real + 2 * terms + 1)
    return val, err


def _gauss_branch_terms(s: complex, k: np.ndarray) -> np.ndarray:
    """int over (1/(k+1), 1/k] of (1/x - k) x^(s-1) dx."""
    lk, lk1 = np.log(k), np.log(k + 1.0)
    first = (np.exp((1 - s) * lk) - np.exp((1 - s) * lk1)) / (s - 1)
    second = k * (np.exp(-s * lk) - np.exp(-s * lk1)) / s
    return first - second


def gauss_map_zeta(s, tol: float = 1e-12, branches: int = 40) -> QuadratureResult:
    """zeta(s) = s/(s-1) - s int_0^1 tau(x) x^(s-1) dx, tau the Gauss map.

    The first ``branches`` branch integrals are summed in closed form.  The
    remaining ones telescope into a Hurwitz zeta value at K+1, evaluated by
    its Euler-Maclaurin expansion.
    """
    s = _strip_point(s)
    K = branches
    if abs(s) > K / 4:
        K = int(4 * abs(s)) + 1  # keep the expansion in its convergent regime
    k = np.arange(1, K + 1, dtype=float)
    head = complex(np.sum(_gauss_branch_terms(s, k)))
    a = K + 1
    hz, hz_err = _hurwitz_tail(s, a)
    tail = a ** (1 - s) / (s - 1) - (hz + K * a ** (-s)) / s
    integral = head + tail
    # integral error is hz_err / |s|; multiplying by s gives hz_err on zeta
    err = hz_err + 1e-15 * K * abs(s) * abs(integral)
    if err > tol:
        raise QuadratureFailure(f"gauss_map_zeta error {err:.3g} exceeds {tol:.3g}")
    return QuadratureResult(s / (s - 1) - s * integral, err, K, "branch sum + EM tail")


def _chan_branch_terms(s: complex, i: np.ndarray, m: int) -> np.ndarray:
    """int over I_i of (1/(m-1)) (m^-i x^(s-2) - x^(s-1)) dx."""
    logm = math.log(m)
    lb, la = -i * logm, -(i + 1) * logm  # log of right and left endpoints
    first = np.exp(-i * logm) * (np.exp((s - 1) * lb) - np.exp((s - 1) * la)) / (s - 1)
    second = (np.exp(s * lb) - np.exp(s * la)) / s
    return (first - second) / (m - 1)


def chan_zeta(s, params, tol: float = 1e-13) -> QuadratureResult:
    """Z_m(s) = 1/(s-1) - s int_0^1 tau_m(x) x^(s-1) dx.

    Branches are added until the remaining ones, which live in [0, m^-I]
    where 0 <= tau_m <= 1, are bounded by |s| m^(-I Re s) / Re s < tol.
    """
    s = _strip_point(s)
    m = as_params(params).m
    sig = s.real
    n_terms = max(1, math.ceil(math.log(abs(s) / (sig * tol)) / (sig * math.log(m))))
    i = np.arange(n_terms, dtype=float)
    terms = _chan_branch_terms(s, i, m)
    integral = complex(np.sum(terms))
    tail = abs(s) * float(m) ** (-n_terms * sig) / sig
    # each term carries the phase m^(-i s), whose argument is known only to
    # eps * |s| * i * log(m) in absolute terms
    eps = np.finfo(float).eps
    phase = abs(s) * i * math.log(m) + n_terms + 10
    err = float(tail + abs(s) * eps * np.sum(np.abs(terms) * phase))
    return QuadratureResult(1 / (s - 1) - s * integral, err, n_terms, "branch sum")


def chan_zeta_geometric(s, params) -> complex:
    """Closed form of Z_m(s) from self-similarity of the branches.

    tau_m(m^-i y) = tau_m(y) for y in I_0, so branch i contributes m^(-i s)
    times the branch-0 integral and the branch sum is geometric.
    """
    s = _strip_point(s)
    m = as_params(params).m
    j0 = ((1 - m ** (1 - s)) / (s - 1) - (1 - m ** (-s)) / s) / (m - 1)
    return 1 / (s - 1) - s * j0 / (1 - m ** (-s))


# ---------------------------------------------------------------------------
# quadrature cross-checks

def _quad_complex(f, a, b, **kw):
    re, ere = integrate.quad(lambda x: f(x).real, a, b, **kw)
    im, eim = integrate.quad(lambda x: f(x).imag, a, b, **kw)
    return complex(re, im), ere + eim


def chan_zeta_quadrature(s, params, tol: float = 1e-10) -> QuadratureResult:
    """Z_m(s) by adaptive quadrature of the raw integrand.

    Substituting x = m^-v turns the integral into
    log(m) int_0^inf tau_m(m^-v) m^(-v s) dv, which has no endpoint
    singularity and kinks only at integer v.
    """
    s = _strip_point(s)
    m = as_params(params).m
    sig = s.real
    logm = math.log(m)
    # the tail beyond v = V gets half of the error budget
    V = max(1, math.ceil(math.log(2 * abs(s) / (sig * tol)) / (sig * logm)))

    total, err = 0j, 0.0
    for j in range(V):
        # v in [j, j+1] is x in I_j, where tau_m(x) = (1/(m^j x) - 1)/(m-1)
        def f(v, j=j):
            x = math.exp(-v * logm)
            tau = (1.0 / (m ** j * x) - 1.0) / (m - 1)
            return tau * cmath.exp(-v * s * logm) * logm

        val, e = _quad_complex(f, j, j + 1, epsabs=tol / (10 * V), epsrel=1e-13, limit=200)
        total += val
        err += e
    err = abs(s) * (err + float(m) ** (-V * sig) / sig)
    if err > tol:
        raise QuadratureFailure(f"quadrature error {err:.3g} exceeds {tol:.3g}")
    return QuadratureResult(1 / (s - 1) - s * total, err, V, "quad in v = -log_m x")


def gauss_map_zeta_quadrature(s, branches: int = 2000) -> QuadratureResult:
    """zeta(s) by adaptive quadrature of tau(x) x^(s-1) over the first
    ``branches`` branches, plus the two-term tail for x < 1/(K+1) where tau
    averages 1/2: (K+1)^-s / (2s) - (K+1)^(-s-1) / 12."""
    s = _strip_point(s)
    K = branches

    total, err = 0j, 0.0
    for k in range(1, K + 1):
        a, b = 1.0 / (k + 1), 1.0 / k

        def g(x, k=k):
            return (1.0 / x - k) * cmath.exp((s - 1) * math.log(x))

        val, e = _quad_complex(g, a, b, epsabs=1e-15, epsrel=1e-13)
        total += val
        err += e
    a = K + 1.0
    total += a ** (-s) / (2 * s) - a ** (-s - 1) / 12
    # next Euler-Maclaurin term of the tail is O((K+1)^(-s-3))
    err += abs((s + 1) * (s + 2)) / 720 * a ** (-s.real - 3)
    return QuadratureResult(s / (s - 1) - s * total, abs(s) * err, K, "quad per branch")
