"""Markovian queues in closed form and a FIFO multi-server simulator.

Conventions: rates are per unit time, ``L`` is the mean number in the
system, ``Lq`` the mean number waiting, ``W`` the mean wait before service
starts and ``sojourn`` the mean time in the system. With lambda* the rate of
accepted arrivals, Little's law reads L = lambda* sojourn and
Lq = lambda* W.

Closed forms are evaluated in exact rationals when the backend is
``"exact"`` (the default), except where an exponential is unavoidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit
from scipy import stats

from .errors import CapTooSmall, DivergentNormalizer, DomainError, InsufficientData, StabilityError, UsageError
from .jump import Generator, generator_from_rates, stationary_jump
from .linalg import to_fraction
from .rng import as_generator

TAIL_MASS = 1e-12
WARMUP_FRACTION = 0.1


@dataclass(frozen=True)
class QueueMetrics:
    pi: tuple  # stationary law, truncated at tail mass TAIL_MASS when infinite
    utilization: object  # fraction of time a given server is busy
    busy_servers: object  # mean number of busy servers
    L: object
    Lq: object
    W: object
    sojourn: object
    throughput: object  # lambda*
    p_wait: object  # probability an accepted arrival has to wait
    loss: object = 0
    backlog_at_arrival: object | None = None  # E_pi[N] / mu, see mm1n
    extras: dict = field(default_factory=dict)


def _num(x, exact: bool):
    return to_fraction(x) if exact else float(x)


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")


def _geometric_cut(rho: float) -> int:
    """Smallest N with rho^(N+1) < TAIL_MASS."""
    if rho <= 0:
        return 0
    return max(0, math.ceil(math.log(TAIL_MASS) / math.log(rho)) - 1)


def mm1(lam, mu, backend: str = "exact") -> QueueMetrics:
    exact = backend == "exact"
    lam, mu = _num(lam, exact), _num(mu, exact)
    _positive(lam=lam, mu=mu)
    if lam >= mu:
        raise StabilityError(f"lambda={lam} >= mu={mu}: the queue grows without bound")
    rho = lam / mu
    N = _geometric_cut(float(rho))
    pi = tuple((1 - rho) * rho**n for n in range(N + 1))
    L = rho / (1 - rho)
    W = lam / (mu * (mu - lam))
    return QueueMetrics(
        pi=pi,
        utilization=rho,
        busy_servers=rho,
        L=L,
        Lq=rho * rho / (1 - rho),
        W=W,
        sojourn=1 / (mu - lam),
        throughput=lam,
        p_wait=rho,
        extras={"lambda": lam, "mu": mu},
    )


def mm1_pi(lam, mu, n: int):
    """Exact pi(n) = (1 - rho) rho^n for any n."""
    rho = to_fraction(lam) / to_fraction(mu)
    return (1 - rho) * rho**n


def mm1_wait_tail(lam: float, mu: float, t: float) -> float:
    """P(W > t): atom 1 - rho at zero, then Exp(mu - lam) given W > 0."""
    if lam >= mu:
        raise StabilityError("unstable queue")
    rho = lam / mu
    return 1.0 if t < 0 else rho * math.exp(-(mu - lam) * t)


def mm1n(lam, mu, N: int, backend: str = "exact") -> QueueMetrics:
    """M/M/1 with at most N customers in the system; arrivals finding N leave."""
    if N < 1:
        raise DomainError("capacity N must be >= 1")
    exact = backend == "exact"
    lam, mu = _num(lam, exact), _num(mu, exact)
    _positive(lam=lam, mu=mu)
    rho = lam / mu
    if rho == 1:
        pi = tuple(_num(Fraction(1, N + 1), exact) for _ in range(N + 1))
    else:
        z = (1 - rho) / (1 - rho ** (N + 1))
        pi = tuple(z * rho**n for n in range(N + 1))
    loss = pi[N]
    lam_star = lam * (1 - loss)
    L = sum(n * p for n, p in enumerate(pi))
    Lq = sum((n - 1) * p for n, p in enumerate(pi) if n >= 1)
    return QueueMetrics(
        pi=pi,
        utilization=1 - pi[0],
        busy_servers=1 - pi[0],
        L=L,
        Lq=Lq,
        W=Lq / lam_star,
        sojourn=L / lam_star,
        throughput=lam_star,
        p_wait=sum(pi[1:N]) / (1 - loss),
        loss=loss,
        backlog_at_arrival=L / mu,
        extras={"lambda": lam, "mu": mu, "N": N},
    )


def mms(lam, mu, s: int, backend: str = "exact") -> QueueMetrics:
    if s < 1:
        raise DomainError("need at least one server")
    exact = backend == "exact"
    lam, mu = _num(lam, exact), _num(mu, exact)
    _positive(lam=lam, mu=mu)
    if lam >= s * mu:
        raise StabilityError(f"lambda={lam} >= s*mu={s * mu}")
    a = lam / mu
    rho = a / s
    head = [a**n / math.factorial(n) for n in range(s)]
    top = a**s / math.factorial(s)
    pi0 = 1 / (sum(head) + top / (1 - rho))
    p_wait = top / (1 - rho) * pi0
    N = s + _geometric_cut(float(rho))
    pi = tuple(pi0 * head[n] if n < s else pi0 * top * rho ** (n - s) for n in range(N + 1))
    Lq = p_wait * rho / (1 - rho)
    W = Lq / lam
    return QueueMetrics(
        pi=pi,
        utilization=rho,
        busy_servers=a,
        L=Lq + a,
        Lq=Lq,
        W=W,
        sojourn=W + 1 / mu,
        throughput=lam,
        p_wait=p_wait,
        extras={"lambda": lam, "mu": mu, "s": s, "pi0": pi0},
    )


def mm_infinity(lam, mu, backend: str = "exact") -> QueueMetrics:
    """Infinitely many servers: N ~ Poisson(lam/mu), nobody waits."""
    exact = backend == "exact"
    lam, mu = _num(lam, exact), _num(mu, exact)
    _positive(lam=lam, mu=mu)
    a = lam / mu
    af = float(a)
    pi = []
    n = 0
    mass = 0.0
    while True:
        p = math.exp(n * math.log(af) - af - math.lgamma(n + 1)) if af > 0 else float(n == 0)
        pi.append(p)
        mass += p
        n += 1
        if n > af and 1.0 - mass < TAIL_MASS:
            break
    return QueueMetrics(
        pi=tuple(pi),
        utilization=0,
        busy_servers=a,
        L=a,
        Lq=0,
        W=0,
        sojourn=1 / mu,
        throughput=lam,
        p_wait=0,
        extras={"lambda": lam, "mu": mu},
    )


def mer1_generator(lam, mu, r: int, phase_cap: int) -> Generator:
    """Phase process of M/E_r/1: the state counts service phases still owed.

    Each arrival adds r phases, each phase is completed at rate mu. Arrivals
    that would push the count above ``phase_cap`` are dropped, which makes
    the generator finite; :func:`mer1_stationary` checks that this
    truncation is harmless.
    """
    if r < 1:
        raise DomainError("r must be >= 1")
    lam, mu = float(lam), float(mu)
    _positive(lam=lam, mu=mu)
    if lam * r >= mu:
        raise DivergentNormalizer(f"offered load lambda*r/mu = {lam * r / mu:.4g} >= 1")
    if phase_cap < r:
        raise CapTooSmall("phase cap must be at least r")
    rates = {}
    for n in range(phase_cap + 1):
        if n >= 1:
            rates[(n, n - 1)] = mu
        if n + r <= phase_cap:
            rates[(n, n + r)] = lam
    return generator_from_rates(phase_cap + 1, rates, "float")


def mer1_stationary(lam, mu, r: int, phase_cap: int):
    pi = stationary_jump(mer1_generator(lam, mu, r, phase_cap)).as_float()
    if pi[-r:].sum() > TAIL_MASS:
        raise CapTooSmall(f"mass {pi[-r:].sum():.3g} near the cap {phase_cap}")
    return pi


def mer1_queue_length_law(pi_phases: np.ndarray, r: int) -> np.ndarray:
    """Customers in system = ceil(phases / r)."""
    n = np.ceil(np.arange(pi_phases.size) / r).astype(int)
    return np.bincount(n, weights=pi_phases)


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class Law:
    """Positive random variable given by a spec string.

    ``exp:<rate>``, ``det:<value>`` or ``gamma:<rate>,<shape>``.
    """

    kind: str
    params: tuple

    @classmethod
    def parse(cls, text: str) -> "Law":
        try:
            kind, _, rest = text.partition(":")
            params = tuple(float(x) for x in rest.split(","))
        except ValueError as exc:
            raise UsageError(f"cannot parse law {text!r}") from exc
        arity = {"exp": 1, "det": 1, "gamma": 2}
        if kind not in arity or len(params) != arity[kind]:
            raise UsageError(f"law must be exp:<rate>, det:<value> or gamma:<rate>,<shape>; got {text!r}")
        if any(p <= 0 for p in params):
            raise DomainError(f"law parameters must be positive: {text!r}")
        return cls(kind, params)

    @property
    def mean(self) -> float:
        if self.kind == "exp":
            return 1.0 / self.params[0]
        if self.kind == "det":
            return self.params[0]
        rate, shape = self.params
        return shape / rate

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "exp":
            return -np.log1p(-gen.random(size)) / self.params[0]
        if self.kind == "det":
            return np.full(size, self.params[0])
        rate, shape = self.params
        return gen.gamma(shape, 1.0 / rate, size)

    def __str__(self):
        return f"{self.kind}:" + ",".join(f"{p:g}" for p in self.params)


def _as_law(x) -> Law:
    return x if isinstance(x, Law) else Law.parse(x)


@njit(cache=True)
def _fifo_servers(arrivals, services, s):
    n = arrivals.size
    free = np.zeros(s)
    start = np.empty(n)
    depart = np.empty(n)
    for k in range(n):
        j = 0
        for m in range(1, s):
            if free[m] < free[j]:
                j = m
        st = arrivals[k] if arrivals[k] > free[j] else free[j]
        start[k] = st
        free[j] = st + services[k]
        depart[k] = free[j]
    return start, depart


@dataclass(frozen=True, eq=False)
class SimulationResult:
    servers: int
    horizon: float
    warmup: float
    arrivals: np.ndarray
    service_start: np.ndarray
    departures: np.ndarray  # per customer, in arrival order
    L: float  # time-average number in system over [warmup, horizon]
    Lq: float
    W: float  # mean wait of customers arriving in the window
    sojourn: float
    arrival_rate: float  # accepted arrivals per unit time in the window
    busy_fraction: float  # time-average fraction of busy servers
    time_average_law: np.ndarray  # time-weighted law of the number in system
    arrival_seen_law: np.ndarray  # law of the number found by arrivals
    busy_periods: np.ndarray  # single-server only; periods starting after warm-up

    @property
    def little_residual(self) -> float:
        return abs(self.L - self.arrival_rate * self.sojourn) / self.L

    @property
    def little_residual_queue(self) -> float:
        return abs(self.Lq - self.arrival_rate * self.W) / self.Lq if self.Lq > 0 else 0.0

    def departure_times(self, after_warmup: bool = True) -> np.ndarray:
        d = np.sort(self.departures)
        d = d[d <= self.horizon]
        return d[d > self.warmup] if after_warmup else d


def _arrival_times(law: Law, T: float, gen: np.random.Generator) -> np.ndarray:
    chunks = []
    t = 0.0
    block = max(64, int(1.1 * T / law.mean) + 64)
    while True:
        pts = t + np.cumsum(law.sample(gen, block))
        keep = pts[pts <= T]
        chunks.append(keep)
        if keep.size < block:
            return np.concatenate(chunks)
        t = pts[-1]
        block = max(64, block // 4)


def _step_integrals(arrivals, departures, s, lo, hi):
    """Time integrals of the number in system over [lo, hi].

    Events are ordered by (time, kind, sequence) with departures before
    arrivals at equal times.
    """
    d = departures[departures <= hi]
    times = np.concatenate([d, arrivals])
    kinds = np.concatenate([np.zeros(d.size, np.int8), np.ones(arrivals.size, np.int8)])
    seq = np.arange(times.size)
    order = np.lexsort((seq, kinds, times))
    times = times[order]
    jumps = np.where(kinds[order] == 1, 1, -1)
    counts = np.cumsum(jumps)  # number in system right after each event
    ends = np.append(times[1:], hi)
    a = np.clip(times, lo, hi)
    b = np.clip(ends, lo, hi)
    dur = b - a
    # state before the first event is 0; it contributes nothing to any integral
    size = int(counts.max()) + 1 if counts.size else 1
    law = np.bincount(counts, weights=dur, minlength=size)
    return law, counts


def simulate_queue(arrival, service, horizon: float, rng, servers: int = 1, warmup_fraction: float = WARMUP_FRACTION) -> SimulationResult:
    """FIFO queue with ``servers`` identical servers, started empty.

    Customers are processed in arrival order; each one takes the server that
    frees up first, so the service start of customer k is
    max(a_k, earliest free time), which is the event-driven simulation
    collapsed to a per-customer recursion.
    """
    if servers < 1:
        raise DomainError("need at least one server")
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    arrival, service = _as_law(arrival), _as_law(service)
    gen = as_generator(rng)
    a = _arrival_times(arrival, horizon, gen)
    x = service.sample(gen, a.size)
    start, dep = _fifo_servers(a, x, servers)
    lo = warmup_fraction * horizon
    span = horizon - lo
    law, counts = _step_integrals(a, dep, servers, lo, horizon)
    law = law / span
    n_vals = np.arange(law.size)
    L = float((n_vals * law).sum())
    Lq = float((np.maximum(n_vals - servers, 0) * law).sum())
    busy = float((np.minimum(n_vals, servers) * law).sum() / servers)
    window = a > lo
    waits = (start - a)[window]
    soj = (dep - a)[window]
    # number found by each arrival in the window: earlier arrivals minus departures up to a_k
    d_sorted = np.sort(dep)
    idx = np.flatnonzero(window)
    seen = idx - np.searchsorted(d_sorted, a[idx], side="right")
    seen_law = np.bincount(seen, minlength=law.size) / max(1, seen.size)
    periods = np.empty(0)
    if servers == 1 and a.size:
        new = np.empty(a.size, dtype=bool)
        new[0] = True
        new[1:] = a[1:] >= dep[:-1]
        starts = np.flatnonzero(new)
        ends = np.append(starts[1:], a.size) - 1
        periods = dep[ends] - a[starts]
        keep = (a[starts] > lo) & (dep[ends] <= horizon)
        periods = periods[keep]
    return SimulationResult(
        servers=servers,
        horizon=horizon,
        warmup=lo,
        arrivals=a,
        service_start=start,
        departures=dep,
        L=L,
        Lq=Lq,
        W=float(waits.mean()) if waits.size else 0.0,
        sojourn=float(soj.mean()) if soj.size else 0.0,
        arrival_rate=waits.size / span,
        busy_fraction=busy,
        time_average_law=law,
        arrival_seen_law=seen_law,
        busy_periods=periods,
    )


def simulate_gg1(arrival, service, horizon: float, rng, warmup_fraction: float = WARMUP_FRACTION) -> SimulationResult:
    return simulate_queue(arrival, service, horizon, rng, 1, warmup_fraction)


@dataclass(frozen=True)
class BurkeReport:
    n: int
    rate: float
    ks_statistic: float
    ks_pvalue: float
    lag1_autocorrelation: float
    autocorrelation_bound: float
    significance: float

    @property
    def passed(self) -> bool:
        return self.ks_pvalue > self.significance and abs(self.lag1_autocorrelation) <= self.autocorrelation_bound


def burke_departure_test(result: SimulationResult, lam: float, significance: float = 1e-3, min_departures: int = 10_000) -> BurkeReport:
    """Departure gaps after warm-up against Exp(lam): KS test plus a bound on
    the lag-1 autocorrelation (two-sided normal quantile at ``significance``
    divided by sqrt(n))."""
    d = result.departure_times(after_warmup=True)
    gaps = np.diff(d)
    if gaps.size < min_departures:
        raise InsufficientData(f"{gaps.size} departure gaps, need {min_departures}")
    ks = stats.kstest(gaps, "expon", args=(0, 1.0 / lam))
    g = gaps - gaps.mean()
    rho1 = float((g[:-1] @ g[1:]) / (g @ g))
    z = stats.norm.ppf(1 - significance / 2)
    return BurkeReport(gaps.size, lam, float(ks.statistic), float(ks.pvalue), rho1, z / math.sqrt(gaps.size), significance)


def pasta_distance(result: SimulationResult) -> float:
    """l1 distance between the arrival-seen law and the time-average law."""
    n = max(result.arrival_seen_law.size, result.time_average_law.size)
    a = np.zeros(n)
    b = np.zeros(n)
    a[: result.arrival_seen_law.size] = result.arrival_seen_law
    b[: result.time_average_law.size] = result.time_average_law
    return float(np.abs(a - b).sum())
