"""Continuous-time Markov jump processes on finite state spaces.

A generator L has nonnegative off-diagonal rates q(i, j) and diagonal
-lambda(i), lambda(i) being the total exit rate of i, so every row sums to 0.
Transition kernels P_t = exp(tL) are computed by uniformization: with
Lam >= max lambda(i), R = I + L / Lam is stochastic and
P_t = sum_n e^{-Lam t} (Lam t)^n / n! R^n, a mixture with nonnegative
weights, so the result is stochastic up to truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from . import linalg
from .chain import (
    BACKENDS,
    Distribution,
    StochasticMatrix,
    _cumulative,
    validate_distribution,
    validate_stochastic,
)
from .errors import (
    BadDiagonal,
    DegenerateNullSpace,
    DimensionMismatch,
    DivergentNormalizer,
    DomainError,
    NegativeRate,
    NotIrreducible,
    RowSumNotZero,
    SingularMatrix,
    ToleranceUnachievable,
)
from .rng import as_generator
from .stationary import ReversibilityCertificate, reversible_vector

KERNEL_TOL = 1e-12
MAX_TERMS = 20_000
SPLIT_THRESHOLD = 50.0


@dataclass(frozen=True, eq=False)
class Generator:
    entries: object  # tuple of tuples of Fraction, or read-only float ndarray
    backend: str
    labels: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self):
        if self.exact:
            return [list(r) for r in self.entries]
        return np.array(self.entries, dtype=float)

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array([[float(x) for x in r] for r in self.entries], dtype=float)
        return np.array(self.entries, dtype=float)

    def exit_rates(self) -> tuple:
        return tuple(-self.entries[i][i] for i in range(self.n))

    def rate(self, i: int, j: int):
        if i == j:
            raise ValueError("q(i, i) is not a rate")
        return self.entries[i][j]

    def support(self) -> np.ndarray:
        a = self.as_float() > 0
        np.fill_diagonal(a, False)
        return a

    def __repr__(self):
        return f"Generator(n={self.n}, backend={self.backend!r})"


def validate_generator(raw, backend: str = "exact", labels=None, tol: float = 1e-12) -> Generator:
    """Check signs and zero row sums; nothing is repaired."""
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    rows = [list(r) for r in raw]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise DimensionMismatch("generator must be square with n >= 1")
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != n:
            raise DimensionMismatch("one label per state is required")
    if backend == "exact":
        rows = linalg.fmatrix(rows)
    else:
        rows = [[float(x) for x in r] for r in rows]
    for i, r in enumerate(rows):
        if r[i] > 0:
            raise BadDiagonal(f"diagonal entry {r[i]} at state {i} is positive")
        for j, x in enumerate(r):
            if j != i and x < 0:
                raise NegativeRate(f"rate q({i}, {j}) = {x} is negative")
        s = sum(r) if backend == "exact" else math.fsum(r)
        if (backend == "exact" and s != 0) or (backend == "float" and abs(s) > tol * max(1.0, -r[i])):
            raise RowSumNotZero(i, float(s))
    if backend == "exact":
        return Generator(tuple(tuple(r) for r in rows), "exact", labels)
    a = np.array(rows, dtype=float)
    a.setflags(write=False)
    return Generator(a, "float", labels)


def generator_from_rates(n: int, rates: dict, backend: str = "exact", labels=None) -> Generator:
    """Build L from off-diagonal rates {(i, j): q}; the diagonal is filled in."""
    zero = Fraction(0) if backend == "exact" else 0.0
    conv = linalg.to_fraction if backend == "exact" else float
    rows = [[zero] * n for _ in range(n)]
    for (i, j), q in rates.items():
        if i == j:
            raise BadDiagonal("rates dictionary must not contain diagonal entries")
        if q < 0:
            raise NegativeRate(f"rate q({i}, {j}) = {q} is negative")
        rows[i][j] += conv(q)
    for i in range(n):
        rows[i][i] = -sum(rows[i][j] for j in range(n) if j != i)
    return validate_generator(rows, backend, labels)


@dataclass(frozen=True)
class EmbeddedChain:
    exit_rates: tuple
    jump: StochasticMatrix  # absorbing rows are the identity row
    absorbing: tuple[int, ...]


def embedded_chain(L: Generator) -> EmbeddedChain:
    lam = L.exit_rates()
    rows = L.rows()
    n = L.n
    out = []
    absorbing = []
    for i in range(n):
        if lam[i] == 0:
            absorbing.append(i)
            out.append([1 if j == i else 0 for j in range(n)])
        else:
            out.append([0 if j == i else rows[i][j] / lam[i] for j in range(n)])
    P = validate_stochastic(out, L.backend, L.labels, tol=1e-10)
    return EmbeddedChain(lam, P, tuple(absorbing))


@dataclass(frozen=True)
class JumpPath:
    jump_times: np.ndarray  # T_0 = 0 < T_1 < ... (all <= horizon)
    states: np.ndarray  # Y_n, the state held on [T_n, T_{n+1})
    horizon: float

    def state_at(self, t) -> np.ndarray:
        return self.states[np.searchsorted(self.jump_times, t, side="right") - 1]

    def occupation(self, n_states: int) -> np.ndarray:
        """Fraction of [0, horizon] spent in each state."""
        ends = np.append(self.jump_times[1:], self.horizon)
        dur = ends - self.jump_times
        return np.bincount(self.states, weights=dur, minlength=n_states) / self.horizon


def simulate_jump(L: Generator, i0: int, T: float, rng) -> JumpPath:
    """Alternate Exp(lambda(Y)) holding times and embedded-chain jumps."""
    if not T > 0:
        raise DomainError("horizon must be positive")
    gen = as_generator(rng)
    emb = embedded_chain(L)
    lam = np.array([float(x) for x in emb.exit_rates])
    cum = _cumulative(emb.jump.as_float())
    times = [0.0]
    states = [int(i0)]
    t, x = 0.0, int(i0)
    block = 4096
    while True:
        e = -np.log1p(-gen.random(block))
        u = gen.random(block)
        for k in range(block):
            if lam[x] == 0:
                return JumpPath(np.array(times), np.array(states, dtype=np.int64), T)
            t += e[k] / lam[x]
            if t > T:
                return JumpPath(np.array(times), np.array(states, dtype=np.int64), T)
            x = int(np.searchsorted(cum[x], u[k], side="right"))
            times.append(t)
            states.append(x)


def _poisson_weights(mu: float, tol: float) -> np.ndarray:
    """Weights e^{-mu} mu^n / n! for n <= K, K the first index where the
    remaining tail is provably below tol."""
    w = [math.exp(-mu)]
    n = 0
    while True:
        nxt = w[-1] * mu / (n + 1)
        # tail after index n is sum_{k>n} w_k <= w_{n+1} / (1 - mu/(n+2))
        if n + 2 > mu and nxt / (1.0 - mu / (n + 2)) < tol:
            return np.array(w)
        n += 1
        if n > MAX_TERMS:
            raise ToleranceUnachievable(f"more than {MAX_TERMS} terms needed for tol={tol}")
        w.append(nxt)


def transition_kernel(L: Generator, t: float, tol: float = KERNEL_TOL) -> StochasticMatrix:
    """P_t = exp(tL) by uniformization (float result).

    For Lam t above 50 the time is halved until it is not, and the kernel
    is squared back up, which keeps e^{-Lam t} well inside float range.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if not tol > 0:
        raise ToleranceUnachievable("tolerance must be positive")
    n = L.n
    a = L.as_float()
    lam = float(max(-a[i, i] for i in range(n)))
    if t == 0 or lam == 0:
        return validate_stochastic(np.eye(n), "float", L.labels)
    halvings = 0
    while lam * t / 2**halvings > SPLIT_THRESHOLD:
        halvings += 1
    tau = t / 2**halvings
    R = np.eye(n) + a / lam
    weights = _poisson_weights(lam * tau, tol / 2 ** (halvings + 1))
    acc = weights[0] * np.eye(n)
    term = np.eye(n)
    for w in weights[1:]:
        term = term @ R
        acc += w * term
    for _ in range(halvings):
        acc = acc @ acc
    acc = np.clip(acc, 0.0, None)
    dev = np.abs(acc.sum(axis=1) - 1.0).max()
    if dev > max(tol, 1e-9) * 10:
        raise ToleranceUnachievable(f"row sums off by {dev:.3g}")
    acc /= acc.sum(axis=1, keepdims=True)
    return validate_stochastic(acc, "float", L.labels, tol=1e-10)


def _rate_graph(L: Generator) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(L.n))
    src, dst = np.nonzero(L.support())
    g.add_edges_from(zip(src.tolist(), dst.tolist()))
    return g


def is_irreducible(L: Generator) -> bool:
    return nx.is_strongly_connected(_rate_graph(L))


def stationary_jump(L: Generator) -> Distribution:
    """Unique pi with pi L = 0 and unit mass."""
    if not is_irreducible(L):
        raise NotIrreducible("some pair of states is not joined by a positive-rate path")
    n = L.n
    if L.exact:
        rows = L.rows()
        a = [[rows[j][i] for j in range(n)] for i in range(n)]
        a.append([Fraction(1)] * n)
        b = [Fraction(0)] * n + [Fraction(1)]
        try:
            pi = linalg.solve_overdetermined(a, b)
        except SingularMatrix as exc:
            raise DegenerateNullSpace(str(exc)) from exc
        return validate_distribution(pi, "exact")
    a = np.vstack([L.as_float().T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(a, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return validate_distribution(pi / pi.sum(), "float", tol=1e-9)


def uniformized_chain(L: Generator) -> StochasticMatrix:
    """R = I + L / Lam with Lam the largest exit rate (identity if L = 0)."""
    lam = max(L.exit_rates())
    rows = L.rows()
    n = L.n
    if lam == 0:
        return validate_stochastic([[int(i == j) for j in range(n)] for i in range(n)], L.backend, L.labels)
    out = [[(1 if i == j else 0) + rows[i][j] / lam for j in range(n)] for i in range(n)]
    return validate_stochastic(out, L.backend, L.labels, tol=1e-10)


def detailed_balance_jump(L: Generator) -> ReversibilityCertificate:
    """pi(i) q(i, j) = pi(j) q(j, i) search.

    The off-diagonal entries of R = I + L / Lam are q(i, j) / Lam, so the
    balance equations of L and of R coincide and the discrete search is
    reused unchanged.
    """
    if not is_irreducible(L):
        raise NotIrreducible("detailed balance search needs an irreducible generator")
    return reversible_vector(uniformized_chain(L))


def birth_death_generator(births: Sequence, deaths: Sequence, backend: str = "exact") -> Generator:
    """States 0..N with q(n, n+1) = births[n] and q(n, n-1) = deaths[n-1]."""
    if len(births) != len(deaths):
        raise DimensionMismatch("need as many death rates (mu_1..mu_N) as birth rates")
    N = len(births)
    rates = {}
    for k in range(N):
        rates[(k, k + 1)] = births[k]
        rates[(k + 1, k)] = deaths[k]
    return generator_from_rates(N + 1, rates, backend)


def birth_death_stationary(births: Sequence, deaths: Sequence, backend: str = "exact") -> Distribution:
    """pi(n) proportional to (lambda_0 ... lambda_{n-1}) / (mu_1 ... mu_n)."""
    if len(births) != len(deaths):
        raise DimensionMismatch("need as many death rates (mu_1..mu_N) as birth rates")
    conv = linalg.to_fraction if backend == "exact" else float
    lam = [conv(x) for x in births]
    mu = [conv(x) for x in deaths]
    if any(x <= 0 for x in lam + mu):
        raise DomainError("birth and death rates must be positive")
    w = [conv(1)]
    for a, b in zip(lam, mu):
        w.append(w[-1] * a / b)
    z = sum(w)
    return validate_distribution([x / z for x in w], backend, tol=1e-9)


def birth_death_stationary_infinite(
    birth: Callable[[int], float],
    death: Callable[[int], float],
    truncation: int,
    tol: float = 1e-12,
) -> Distribution:
    """Stationary law of a birth-death chain on {0, 1, 2, ...}, truncated.

    ``birth(n)`` is lambda_n and ``death(n)`` is mu_n (n >= 1). The
    unnormalized weights are summed up to ``truncation``; if the last weight
    still carries more than ``tol`` of the running total, or the weights are
    not decreasing at the cut, the normalizer is declared divergent.
    """
    logw = [0.0]
    for k in range(truncation):
        a, b = float(birth(k)), float(death(k + 1))
        if a <= 0 or b <= 0:
            raise DomainError("rates must be positive")
        logw.append(logw[-1] + math.log(a) - math.log(b))
    logw = np.array(logw)
    top = logw.max()
    w = np.exp(logw - top)
    z = w.sum()
    ratio_at_cut = float(birth(truncation - 1)) / float(death(truncation))
    if w[-1] / z > tol or ratio_at_cut >= 1:
        raise DivergentNormalizer("unnormalized weights do not decay; no stationary law")
    return validate_distribution(w / z, "float", tol=1e-9)
