"""Homogeneous and thinned Poisson point processes on [0, T]."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadInterval, Collision, DomainError, HorizonMismatch, NonPositiveRate
from .rng import as_generator


@dataclass(frozen=True, eq=False)
class PointProcessSample:
    horizon: float
    times: np.ndarray  # strictly increasing, in (0, horizon]
    rate: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size and (t[0] <= 0 or t[-1] > self.horizon or np.any(np.diff(t) <= 0)):
            raise DomainError("event times must be strictly increasing inside (0, T]")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    def counting(self, t) -> np.ndarray:
        """N_t = #{n : X_n <= t}, right-continuous; vectorized in t."""
        return np.searchsorted(self.times, t, side="right")

    def interarrivals(self) -> np.ndarray:
        return np.diff(self.times, prepend=0.0)


def _check(lam: float, T: float) -> None:
    if not lam > 0:
        raise NonPositiveRate(f"rate must be positive, got {lam}")
    if not T > 0:
        raise DomainError(f"horizon must be positive, got {T}")


def sample_poisson_process(lam: float, T: float, rng) -> PointProcessSample:
    """Partial sums of i.i.d. Exp(lam) gaps, stopped at the first one past T."""
    _check(lam, T)
    gen = as_generator(rng)
    chunks = []
    t = 0.0
    block = max(16, int(lam * T * 1.1 + 10 * np.sqrt(lam * T) + 16))
    while True:
        gaps = -np.log1p(-gen.random(block)) / lam
        pts = t + np.cumsum(gaps)
        keep = pts[pts <= T]
        chunks.append(keep)
        if keep.size < block:
            break
        t = pts[-1]
        block = max(16, block // 4)
    times = np.concatenate(chunks) if chunks else np.empty(0)
    return PointProcessSample(T, times, lam)


def count_batch(lam: float, T: float, runs: int, rng) -> np.ndarray:
    """N_T for ``runs`` independent processes, by the same gap construction."""
    _check(lam, T)
    gen = as_generator(rng)
    counts = np.zeros(runs, dtype=np.int64)
    t = np.zeros(runs)
    active = np.arange(runs)
    while active.size:
        t[active] += -np.log1p(-gen.random(active.size)) / lam
        inside = t[active] <= T
        counts[active[inside]] += 1
        active = active[inside]
    return counts


def count(sample: PointProcessSample, s: float, t: float) -> int:
    """Number of events in (s, t]."""
    if not 0 <= s <= t <= sample.horizon:
        raise BadInterval(f"need 0 <= s <= t <= T, got s={s}, t={t}, T={sample.horizon}")
    return int(sample.counting(t) - sample.counting(s))


def thin(sample: PointProcessSample, keep_prob: float, rng) -> PointProcessSample:
    """Keep each point independently with probability ``keep_prob``."""
    if not 0 <= keep_prob <= 1:
        raise DomainError("keep probability must lie in [0, 1]")
    keep = as_generator(rng).random(len(sample)) < keep_prob
    rate = None if sample.rate is None else sample.rate * keep_prob
    return PointProcessSample(sample.horizon, sample.times[keep], rate)


def superpose(a: PointProcessSample, b: PointProcessSample) -> PointProcessSample:
    if a.horizon != b.horizon:
        raise HorizonMismatch(f"horizons {a.horizon} and {b.horizon} differ")
    merged = np.concatenate([a.times, b.times])
    merged.sort(kind="mergesort")
    if merged.size and np.any(np.diff(merged) == 0):
        raise Collision("two processes share an event time")
    rate = None if a.rate is None or b.rate is None else a.rate + b.rate
    return PointProcessSample(a.horizon, merged, rate)


@dataclass(frozen=True)
class CompoundPath:
    times: np.ndarray
    values: np.ndarray  # S at each event time (after the jump)

    def at(self, t) -> np.ndarray:
        """S_t as a right-continuous step function, 0 before the first event."""
        idx = np.searchsorted(self.times, t, side="right")
        padded = np.concatenate([[0.0], self.values])
        return padded[idx]


def compound(sample: PointProcessSample, jump_sampler: Callable, rng) -> CompoundPath:
    """S_t = sum_{i <= N_t} Y_i; ``jump_sampler(gen, size)`` returns the Y_i."""
    gen = as_generator(rng)
    n = len(sample)
    jumps = np.asarray(jump_sampler(gen, n), dtype=float) if n else np.empty(0)
    return CompoundPath(sample.times, np.cumsum(jumps))


def sample_inhomogeneous(rate: Callable, rate_max: float, T: float, rng) -> PointProcessSample:
    """Rate function lam(t) <= rate_max: sample at rate_max and keep a point
    at time t with probability lam(t) / rate_max."""
    gen = as_generator(rng)
    base = sample_poisson_process(rate_max, T, gen)
    r = np.asarray(rate(base.times), dtype=float)
    if np.any(r < 0) or np.any(r > rate_max * (1 + 1e-12)):
        raise DomainError("rate function leaves [0, rate_max]")
    keep = gen.random(len(base)) * rate_max < r
    return PointProcessSample(T, base.times[keep], None)


def residual_waiting_time(sample: PointProcessSample, t: float) -> float:
    """Time from t to the next event; inf if none before the horizon."""
    i = np.searchsorted(sample.times, t, side="right")
    return float(sample.times[i] - t) if i < len(sample) else float("inf")


def conditional_all_before(lam: float, T: float, n: int, a: float, runs: int, rng) -> tuple[float, float, int]:
    """Monte Carlo estimate of P(all events in (0, a] | N_T = n).

    Each run builds the first n + 1 arrival times from exponential gaps and
    is kept when exactly n of them land in (0, T]. Returns the estimate,
    its standard error and the number of kept runs.
    """
    _check(lam, T)
    if not 0 <= a <= T:
        raise BadInterval(f"need 0 <= a <= T, got a={a}, T={T}")
    gen = as_generator(rng)
    arrivals = np.cumsum(-np.log1p(-gen.random((runs, n + 1))) / lam, axis=1)
    kept = (arrivals[:, n - 1] <= T if n else np.ones(runs, bool)) & (arrivals[:, n] > T)
    k = int(kept.sum())
    if k == 0:
        raise DomainError("no run had the requested count; raise runs")
    hits = arrivals[kept, n - 1] <= a if n else np.ones(k, bool)
    p = float(hits.mean())
    return p, float(np.sqrt(p * (1 - p) / k)), k
