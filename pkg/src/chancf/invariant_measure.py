"""Invariant density, its CDF, interval measures and exact sampling.

All functions accept scalars or numpy arrays.  The CDF is written with
``log1p`` so that it keeps full relative accuracy near 0:

    omega_m(x) = log1p((m-1)^2 x / ((m-1)x + m)) / log(m^2 / (2m-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cf_core import ChanParams, as_params
from .errors import DomainError


def _unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def density_rho(x, params):
    p = as_params(params)
    m = p.m
    x = _unit(x)
    return _out(p.k_m / (((m - 1) * x + 1) * ((m - 1) * x + m)))


def cdf_omega(x, params):
    p = as_params(params)
    m = p.m
    x = _unit(x)
    return _out(np.log1p((m - 1) ** 2 * x / ((m - 1) * x + m)) / p.log_norm)


def gamma_interval(a, b, params):
    """gamma_m([a, b]), computed without cancellation for short intervals."""
    p = as_params(params)
    m = p.m
    a, b = _unit(a, "a"), _unit(b, "b")
    if np.any(a > b):
        raise DomainError("gamma_interval needs a <= b")
    # numerator minus denominator of the log argument is (m-1)^2 (b-a)
    ratio = (m - 1) ** 2 * (b - a) / (((m - 1) * a + 1) * ((m - 1) * b + m))
    return _out(np.log1p(ratio) / p.log_norm)


def digit_probability(i, params):
    """gamma_m(I_i): the stationary probability that a digit equals i."""
    p = as_params(params)
    i = np.asarray(i)
    if np.any(i < 0):
        raise DomainError("branch index must be >= 0")
    m = float(p.m)
    return gamma_interval(m ** -(i + 1.0), m ** -(i + 0.0), p)


def sample_gamma(u, params):
    """Inverse CDF of gamma_m (closed form); maps uniforms to gamma_m draws."""
    p = as_params(params)
    m = p.m
    u = _unit(u, "u")
    cm1 = np.expm1(u * p.log_norm)  # C - 1 with C = (m^2/(2m-1))^u
    x = m * cm1 / ((m - 1 - cm1) * (m - 1))
    return _out(np.clip(x, 0.0, 1.0))


def truncation_index(params, eps: float = 1e-14) -> int:
    """Smallest I with m^-I < eps / rho_max."""
    p = as_params(params)
    return max(1, math.ceil(math.log(p.rho_max / eps) / math.log(p.m)) + 1)


def preimage_measure(a, b, params, eps: float = 1e-14):
    """gamma_m(tau_m^-1([a, b])) as a branch sum, plus its tail bound.

    Branch i contributes gamma_m([u_i(b), u_i(a)]); the branches beyond the
    truncation index all live in [0, m^-I], whose measure bounds the tail.
    """
    p = as_params(params)
    m = p.m
    if not 0 <= a <= b <= 1:
        raise DomainError("need 0 <= a <= b <= 1")
    n_terms = truncation_index(p, eps)
    i = np.arange(n_terms, dtype=float)
    scale = float(m) ** -i
    ub = scale / ((m - 1) * b + 1)
    ua = scale / ((m - 1) * a + 1)
    total = float(np.sum(gamma_interval(ub, ua, p)))
    tail = gamma_interval(0.0, float(m) ** -n_terms, p)
    return total, tail


@dataclass(frozen=True)
class MeasureSpec:
    """Initial distribution for pushforward experiments.

    ``kind`` is ``"lebesgue"``, ``"gamma"`` or ``"grid"``.  A grid measure is
    given by CDF values on a uniform grid over [0, 1].
    """

    kind: str = "lebesgue"
    params: ChanParams | None = None
    cdf_values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("lebesgue", "gamma", "grid"):
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if self.kind == "gamma" and self.params is None:
            raise DomainError("gamma measure needs params")
        if self.kind == "grid":
            v = np.asarray(self.cdf_values, dtype=float)
            if v.size < 2 or v[0] != 0.0 or v[-1] != 1.0 or np.any(np.diff(v) < 0):
                raise DomainError("grid CDF must be nondecreasing from 0 to 1")
            object.__setattr__(self, "cdf_values", tuple(v))

    def cdf(self, x):
        x = _unit(x)
        if self.kind == "lebesgue":
            return _out(x)
        if self.kind == "gamma":
            return cdf_omega(x, self.params)
        v = np.asarray(self.cdf_values)
        return _out(np.interp(x, np.linspace(0, 1, v.size), v))

    def sample(self, u):
        """Map uniforms u in [0, 1] to draws from this measure."""
        u = _unit(u, "u")
        if self.kind == "lebesgue":
            return _out(u)
        if self.kind == "gamma":
            return sample_gamma(u, self.params)
        v = np.asarray(self.cdf_values)
        return _out(np.interp(u, v, np.linspace(0, 1, v.size)))
