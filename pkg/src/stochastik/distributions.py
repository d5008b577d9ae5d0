"""Samplers built from uniforms, exact pmfs, and the binomial-to-Poisson
total-variation bound.

All logarithms of uniforms are taken of 1 - U with U in [0, 1), so they are
always finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import DomainError, NonPositiveRate
from .linalg import to_fraction
from .rng import RngStream, as_generator

POISSON_COUNTING_MAX = 30.0
# Absolute slack for the bound check: both pmfs are evaluated in floating
# point, so a distance that is truly below 1e-30 can come out as rounding noise.
L1_ROUNDING = 1e-14

__all__ = [
    "RngStream",
    "exponential_from_uniform",
    "sample_exponential",
    "box_muller",
    "sample_normal_pair",
    "sample_poisson",
    "pmf_binomial",
    "pmf_poisson",
    "L1Result",
    "l1_binomial_poisson",
    "gamma_pdf",
]


def _check_rate(lam: float) -> None:
    if not lam > 0 or not math.isfinite(lam):
        raise NonPositiveRate(f"rate must be positive and finite, got {lam}")


def exponential_from_uniform(u, lam: float):
    """Inverse-CDF transform -log(1 - u) / lam."""
    _check_rate(lam)
    return -np.log1p(-np.asarray(u, dtype=float)) / lam


def sample_exponential(lam: float, rng, size=None):
    _check_rate(lam)
    u = as_generator(rng).random(size)
    out = exponential_from_uniform(u, lam)
    return float(out) if size is None else out


def box_muller(u, v):
    """Map two uniforms to two independent standard normals."""
    r = np.sqrt(-2.0 * np.log1p(-np.asarray(u, dtype=float)))
    phi = 2.0 * np.pi * np.asarray(v, dtype=float)
    return r * np.cos(phi), r * np.sin(phi)


def sample_normal_pair(rng, size=None):
    gen = as_generator(rng)
    u = gen.random(size)
    v = gen.random(size)
    y1, y2 = box_muller(u, v)
    if size is None:
        return float(y1), float(y2)
    return y1, y2


def _poisson_by_counting(lam: float, gen: np.random.Generator, size: int) -> np.ndarray:
    # N = number of arrivals of a rate-lam Poisson process in [0, 1]
    counts = np.zeros(size, dtype=np.int64)
    t = np.zeros(size)
    active = np.arange(size)
    while active.size:
        t[active] += -np.log1p(-gen.random(active.size)) / lam
        inside = t[active] <= 1.0
        counts[active[inside]] += 1
        active = active[inside]
    return counts


def _poisson_by_inversion(lam: float, gen: np.random.Generator, size: int) -> np.ndarray:
    kmax = int(lam + 40 * math.sqrt(lam) + 40)
    k = np.arange(kmax + 1)
    logp = k * math.log(lam) - lam - np.array([math.lgamma(x + 1) for x in k])
    cdf = np.cumsum(np.exp(logp - logp.max())) * math.exp(logp.max())
    cdf /= cdf[-1]
    return np.searchsorted(cdf, gen.random(size), side="right").astype(np.int64)


def sample_poisson(lam: float, rng, size=None):
    """Poisson(lam) draws: exponential interarrival counting for lam <= 30,
    inversion of the log-space CDF above."""
    _check_rate(lam)
    gen = as_generator(rng)
    n = 1 if size is None else int(np.prod(size))
    if lam <= POISSON_COUNTING_MAX:
        out = _poisson_by_counting(lam, gen, n)
    else:
        out = _poisson_by_inversion(lam, gen, n)
    if size is None:
        return int(out[0])
    return out.reshape(size)


def pmf_binomial(n: int, q, k: int) -> Fraction:
    """Exact b_{n,q}(k); floats for q are read through their decimal repr."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    q = to_fraction(q)
    if not 0 <= q <= 1:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if not 0 <= k <= n:
        return Fraction(0)
    return math.comb(n, k) * q**k * (1 - q) ** (n - k)


def pmf_poisson(lam: float, k: int) -> float:
    _check_rate(lam)
    if k < 0:
        return 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def _log_binomial_pmf(n: int, q: float, k: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    with np.errstate(divide="ignore"):
        return (
            gammaln(n + 1)
            - gammaln(k + 1)
            - gammaln(n - k + 1)
            + k * np.log(q)
            + (n - k) * np.log1p(-q)
        )


@dataclass(frozen=True)
class L1Result:
    distance: float
    bound: float
    terms: int

    @property
    def within_bound(self) -> bool:
        return self.distance <= self.bound + L1_ROUNDING


def l1_binomial_poisson(n: int, q: float) -> L1Result:
    """sum_k |b_{n,q}(k) - pi_{nq}(k)| together with the bound 2 n q^2.

    The sum runs over k <= n, where both laws live, plus the Poisson mass
    above n, which is added as a survival-function value rather than
    summed term by term.
    """
    if n < 0 or not 0 <= q <= 1:
        raise DomainError("need n >= 0 and q in [0, 1]")
    bound = 2.0 * n * q * q
    lam = n * q
    if q == 0 or n == 0:
        return L1Result(0.0, bound, 1)
    k = np.arange(n + 1)
    if q == 1:
        b = (k == n).astype(float)
    else:
        b = np.exp(_log_binomial_pmf(n, q, k))
    p = stats.poisson.pmf(k, lam)
    tail = float(stats.poisson.sf(n, lam))
    dist = float(math.fsum(np.abs(b - p))) + tail
    result = L1Result(dist, bound, n + 1)
    if not result.within_bound:
        raise AssertionError(f"distance {dist} exceeds the bound {bound}")
    return result


def gamma_pdf(lam: float, n: int, x: float) -> float:
    """Density lam^n x^(n-1) e^(-lam x) / (n-1)! of a sum of n Exp(lam)."""
    _check_rate(lam)
    if n < 1 or int(n) != n:
        raise DomainError("shape n must be a positive integer")
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return lam if n == 1 else 0.0
    return math.exp(n * math.log(lam) + (n - 1) * math.log(x) - lam * x - math.lgamma(n))
