"""Metropolis sampling, Ising dynamics and simulated annealing.

An :class:`EnergyModel` supplies the allowed moves from a state; proposals
are uniform over them, so the proposal weight is 1/(number of moves). A
move that does not raise the energy is always accepted; one that raises it
by dH > 0 is accepted with probability exp(-beta dH) (``"threshold"``
rule) or every move with 1/(1 + exp(beta dH)) (``"heatbath"`` rule). The
sign test comes first so that beta = inf never produces inf * 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .errors import BadDistanceMatrix, BadSite, DomainError, EmptyProposalSet, UniformConfig
from .rng import as_generator

RULES = ("threshold", "heatbath")


def acceptance_probability(delta_h: float, beta: float, rule: str = "threshold") -> float:
    if rule == "threshold":
        if delta_h <= 0:
            return 1.0
        return math.exp(-beta * delta_h)
    if rule == "heatbath":
        x = beta * delta_h
        if x > 700:
            return 0.0
        return 1.0 / (1.0 + math.exp(x))
    raise DomainError(f"rule must be one of {RULES}")


class EnergyModel:
    """Base class: override ``energy``, ``moves`` and ``apply``.

    ``delta_energy`` defaults to recomputing both energies; models with a
    local update override it.
    """

    def energy(self, state) -> float:
        raise NotImplementedError

    def moves(self, state) -> Sequence:
        raise NotImplementedError

    def apply(self, state, move):
        raise NotImplementedError

    def delta_energy(self, state, move) -> float:
        return self.energy(self.apply(state, move)) - self.energy(state)

    def states(self) -> list:
        """All states, for models small enough to enumerate."""
        raise NotImplementedError


class FiniteEnergyModel(EnergyModel):
    """States 0..k-1 with given energies; every other state is a neighbor."""

    def __init__(self, energies: Sequence[float]):
        self.energies = [float(e) for e in energies]

    def energy(self, state):
        return self.energies[state]

    def moves(self, state):
        return [j for j in range(len(self.energies)) if j != state]

    def apply(self, state, move):
        return move

    def states(self):
        return list(range(len(self.energies)))


class HypercubeModel(EnergyModel):
    """Bits b in {0,1}^N with H(b) = -h * sum(b); moves flip one bit.

    With h = 0 every move is accepted and the number of ones performs the
    Ehrenfest urn chain.
    """

    def __init__(self, N: int, h: float = 0.0):
        self.N, self.h = N, h

    def energy(self, state):
        return -self.h * sum(state)

    def moves(self, state):
        return range(self.N)

    def apply(self, state, move):
        s = list(state)
        s[move] = 1 - s[move]
        return tuple(s)

    def delta_energy(self, state, move):
        return -self.h * (1 - 2 * state[move])

    def states(self):
        return list(itertools.product((0, 1), repeat=self.N))


def metropolis_step(state, model: EnergyModel, beta: float, rule: str = "threshold", rng=None, u=None):
    """One Metropolis transition. ``u`` may pass two pre-drawn uniforms."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    moves = model.moves(state)
    k = len(moves)
    if k == 0:
        raise EmptyProposalSet("no allowed move from this state")
    if u is None:
        u = as_generator(rng).random(2)
    move = moves[min(int(u[0] * k), k - 1)]
    dh = model.delta_energy(state, move)
    if u[1] < acceptance_probability(dh, beta, rule):
        return model.apply(state, move)
    return state


def run_metropolis(model: EnergyModel, start, beta: float, steps: int, rng, rule: str = "threshold", observable: Callable | None = None):
    """Run ``steps`` transitions; returns the observable along the path
    (the states themselves when no observable is given), X_0 included."""
    gen = as_generator(rng)
    u = gen.random((steps, 2))
    state = start
    out = [observable(state) if observable else state]
    for n in range(steps):
        state = metropolis_step(state, model, beta, rule, u=u[n])
        out.append(observable(state) if observable else state)
    return np.asarray(out) if observable else out


def metropolis_kernel(model: EnergyModel, beta: float, rule: str = "threshold", states: Sequence | None = None) -> np.ndarray:
    """Dense transition matrix of the Metropolis chain on an enumerable model."""
    states = list(model.states() if states is None else states)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    P = np.zeros((n, n))
    for i, s in enumerate(states):
        moves = list(model.moves(s))
        if not moves:
            raise EmptyProposalSet("no allowed move from a state")
        q = 1.0 / len(moves)
        for m in moves:
            j = index[model.apply(s, m)]
            P[i, j] += q * acceptance_probability(model.delta_energy(s, m), beta, rule)
        P[i, i] += 1.0 - P[i].sum()
    return P


def gibbs_weights(model: EnergyModel, beta: float, states: Sequence | None = None) -> np.ndarray:
    states = list(model.states() if states is None else states)
    e = np.array([model.energy(s) for s in states], dtype=float)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


# ---------------------------------------------------------------------------
# Ising model


def neighbor_table(shape: Sequence[int], periodic: bool = False) -> np.ndarray:
    """(N, 2d) array of nearest-neighbor flat indices, -1 where missing."""
    shape = tuple(int(s) for s in shape)
    d = len(shape)
    N = int(np.prod(shape))
    coords = np.array(np.unravel_index(np.arange(N), shape)).T
    table = -np.ones((N, 2 * d), dtype=np.int64)
    for axis in range(d):
        for col, step in ((2 * axis, -1), (2 * axis + 1, 1)):
            c = coords.copy()
            c[:, axis] += step
            if periodic:
                # a side of length 1 would wrap a site onto itself: no bond
                c[:, axis] %= shape[axis]
                ok = np.full(N, shape[axis] > 1)
            else:
                ok = (c[:, axis] >= 0) & (c[:, axis] < shape[axis])
            flat = np.ravel_multi_index(tuple(np.clip(c, 0, np.array(shape) - 1).T), shape)
            table[ok, col] = flat[ok]
    return table


@dataclass
class IsingConfig:
    """Spins in {-1, +1} on a box of Z^d with free boundary by default."""

    shape: tuple
    spins: np.ndarray  # int8, shape ``shape``
    h: float = 0.0
    beta: float = 0.0
    periodic: bool = False
    _nbr: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        self.spins = np.asarray(self.spins, dtype=np.int8).reshape(self.shape)
        if not np.all(np.abs(self.spins) == 1):
            raise DomainError("spins must be -1 or +1")
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")

    @classmethod
    def uniform(cls, shape, value: int = 1, **kw) -> "IsingConfig":
        return cls(tuple(shape), np.full(tuple(shape), value, dtype=np.int8), **kw)

    @classmethod
    def random(cls, shape, rng, **kw) -> "IsingConfig":
        s = np.where(as_generator(rng).random(tuple(shape)) < 0.5, 1, -1).astype(np.int8)
        return cls(tuple(shape), s, **kw)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def neighbors(self) -> np.ndarray:
        if self._nbr is None:
            self._nbr = neighbor_table(self.shape, self.periodic)
        return self._nbr

    def flat(self) -> np.ndarray:
        return self.spins.reshape(-1)

    def total_spin(self) -> int:
        return int(self.spins.sum(dtype=np.int64))

    def magnetization(self) -> float:
        return self.total_spin() / self.size

    def energy(self) -> float:
        return ising_energy(self)

    def copy(self) -> "IsingConfig":
        return IsingConfig(self.shape, self.spins.copy(), self.h, self.beta, self.periodic, self._nbr)


def ising_energy(config: IsingConfig) -> float:
    """H = -sum over nearest-neighbor pairs of s_i s_j - h sum_i s_i."""
    s = config.flat().astype(np.int64)
    nbr = config.neighbors
    pair = 0
    for col in range(1, nbr.shape[1], 2):  # forward neighbors: each bond once
        ok = nbr[:, col] >= 0
        pair += int((s[ok] * s[nbr[ok, col]]).sum())
    return -pair - config.h * int(s.sum())


def _site_index(config: IsingConfig, k) -> int:
    if isinstance(k, (tuple, list)):
        if len(k) != len(config.shape) or any(not 0 <= c < n for c, n in zip(k, config.shape)):
            raise BadSite(f"site {k} outside the lattice {config.shape}")
        return int(np.ravel_multi_index(tuple(k), config.shape))
    k = int(k)
    if not 0 <= k < config.size:
        raise BadSite(f"site {k} outside the lattice of {config.size} sites")
    return k


def ising_delta_h(config: IsingConfig, k) -> float:
    """Energy change 2 s_k (sum of neighbor spins + h) of flipping site k."""
    k = _site_index(config, k)
    s = config.flat()
    nb = config.neighbors[k]
    local = int(sum(int(s[j]) for j in nb if j >= 0))
    return 2 * int(s[k]) * (local + config.h)


class IsingModel(EnergyModel):
    """Generic-interface view of the Ising model (states are spin tuples)."""

    def __init__(self, shape, h: float = 0.0, periodic: bool = False):
        self.shape = tuple(shape)
        self.h = h
        self.periodic = periodic
        self.nbr = neighbor_table(self.shape, periodic)
        self.N = int(np.prod(self.shape))

    def _config(self, state) -> IsingConfig:
        return IsingConfig(self.shape, np.array(state, dtype=np.int8), self.h, 0.0, self.periodic, self.nbr)

    def energy(self, state):
        return ising_energy(self._config(state))

    def moves(self, state):
        return range(self.N)

    def apply(self, state, move):
        s = list(state)
        s[move] = -s[move]
        return tuple(s)

    def delta_energy(self, state, move):
        local = sum(state[j] for j in self.nbr[move] if j >= 0)
        return 2 * state[move] * (local + self.h)

    def states(self):
        return list(itertools.product((-1, 1), repeat=self.N))


def state_code(spins: np.ndarray) -> int:
    """Integer whose bit k is set when site k carries +1."""
    flat = np.asarray(spins).reshape(-1)
    return int(sum(1 << k for k, v in enumerate(flat) if v > 0))


def gibbs_measure(shape, h: float, beta: float, periodic: bool = False) -> np.ndarray:
    """Exact Gibbs law indexed by :func:`state_code`, by enumeration."""
    N = int(np.prod(shape))
    if N > 20:
        raise DomainError("enumeration is limited to 20 sites")
    nbr = neighbor_table(shape, periodic)
    energies = np.empty(2**N)
    for code in range(2**N):
        s = np.array([1 if code >> k & 1 else -1 for k in range(N)], dtype=np.int8)
        energies[code] = ising_energy(IsingConfig(tuple(shape), s, h, 0.0, periodic, nbr))
    w = np.exp(-beta * (energies - energies.min()))
    return w / w.sum()


@njit(cache=True)
def _glauber_kernel(s, nbr, h, beta, heatbath, u_site, u_acc, total, code, record_every, offset, out_m, occ, track):
    N = s.size
    accepted = 0
    total_sum = 0
    for n in range(u_site.size):
        k = int(u_site[n] * N)
        if k == N:
            k = N - 1
        local = 0
        for c in range(nbr.shape[1]):
            j = nbr[k, c]
            if j >= 0:
                local += s[j]
        dh = 2.0 * s[k] * (local + h)
        if heatbath:
            x = beta * dh
            acc = u_acc[n] < (0.0 if x > 700.0 else 1.0 / (1.0 + np.exp(x)))
        elif dh <= 0.0:
            acc = True
        else:
            acc = u_acc[n] < np.exp(-beta * dh)
        if acc:
            s[k] = -s[k]
            total += 2 * s[k]
            accepted += 1
            if track:
                code ^= 1 << k
        total_sum += total
        if track:
            occ[code] += 1
        step = offset + n + 1
        if step % record_every == 0:
            out_m[step // record_every] = total
    return total, code, accepted, total_sum


@dataclass(frozen=True, eq=False)
class GlauberResult:
    steps: int
    record_every: int
    magnetization: np.ndarray  # m at steps 0, r, 2r, ...
    running_mean: float  # (1/(n+1)) sum_{k=0..n} m_k
    final: IsingConfig
    accepted: int
    final_total_spin: int  # incrementally maintained sum of spins
    occupation: np.ndarray | None  # visits per state code after each step


def glauber_chain(
    config: IsingConfig,
    steps: int,
    rng,
    record_every: int = 1,
    rule: str = "threshold",
    track_occupation: bool | None = None,
    chunk: int = 1 << 20,
) -> GlauberResult:
    """Single-spin-flip Metropolis dynamics.

    Each step picks a site uniformly; the sum of spins is updated by
    +2 s_k(new) on a flip, so the magnetization is tracked in exact integer
    arithmetic without rescanning the lattice. The input config is not
    modified.
    """
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    if rule not in RULES:
        raise DomainError(f"rule must be one of {RULES}")
    gen = as_generator(rng)
    cfg = config.copy()
    s = cfg.flat().copy()
    N = s.size
    track = (N <= 16) if track_occupation is None else bool(track_occupation)
    if track and N > 24:
        raise DomainError("occupation tracking needs at most 24 sites")
    occ = np.zeros(2**N if track else 1, dtype=np.int64)
    out_m = np.zeros(steps // record_every + 1, dtype=np.int64)
    total = int(s.sum(dtype=np.int64))
    out_m[0] = total
    code = state_code(s) if track else 0
    accepted = 0
    total_sum = total
    nbr = cfg.neighbors
    done = 0
    while done < steps:
        k = min(chunk, steps - done)
        u_site = gen.random(k)
        u_acc = gen.random(k)
        total, code, acc, tsum = _glauber_kernel(
            s, nbr, float(cfg.h), float(config.beta), rule == "heatbath", u_site, u_acc,
            total, code, record_every, done, out_m, occ, track,
        )
        accepted += acc
        total_sum += tsum
        done += k
    final = IsingConfig(cfg.shape, s.reshape(cfg.shape), cfg.h, cfg.beta, cfg.periodic, nbr)
    return GlauberResult(
        steps=steps,
        record_every=record_every,
        magnetization=out_m / N,
        running_mean=total_sum / N / (steps + 1),
        final=final,
        accepted=accepted,
        final_total_spin=int(total),
        occupation=occ if track else None,
    )


def kawasaki_delta_h(config: IsingConfig, i: int, j: int) -> float:
    """Energy change of exchanging the opposite spins at sites i and j."""
    s = config.flat()
    d = ising_delta_h(config, i) + ising_delta_h(config, j)
    if j in config.neighbors[i]:
        # the i-j bond is counted in both single-flip terms but is unchanged
        d -= 4 * int(s[i]) * int(s[j])
    return d


def kawasaki_step(config: IsingConfig, rng, rule: str = "threshold") -> IsingConfig:
    """Propose exchanging a uniformly chosen (+1, -1) pair of sites.

    The number of such pairs is n+ n-, which an exchange preserves, so the
    uniform proposal is symmetric. Returns a new config.
    """
    s = config.flat()
    plus = np.flatnonzero(s > 0)
    minus = np.flatnonzero(s < 0)
    if plus.size == 0 or minus.size == 0:
        raise UniformConfig("all spins are equal; no exchange is possible")
    gen = as_generator(rng)
    u = gen.random(3)
    i = int(plus[min(int(u[0] * plus.size), plus.size - 1)])
    j = int(minus[min(int(u[1] * minus.size), minus.size - 1)])
    dh = kawasaki_delta_h(config, i, j)
    out = config.copy()
    if u[2] < acceptance_probability(dh, config.beta, rule):
        f = out.flat()
        f[i], f[j] = f[j], f[i]
    return out


def kawasaki_chain(config: IsingConfig, steps: int, rng, rule: str = "threshold"):
    """Run Kawasaki dynamics; returns the final config and the total spin
    after every step."""
    gen = as_generator(rng)
    cfg = config.copy()
    totals = np.empty(steps + 1, dtype=np.int64)
    totals[0] = cfg.total_spin()
    for n in range(steps):
        cfg = kawasaki_step(cfg, gen, rule)
        totals[n + 1] = cfg.total_spin()
    return cfg, totals


# ---------------------------------------------------------------------------
# mean estimation


def sample_size_bound(var_y: float, delta: float, eps: float, lambda0: float) -> float:
    """Steps n with P(|S_n - E Y| > delta) <= eps by the Chebyshev bound
    Var(S_n) <= (Var Y / n) (1 + |lambda0|) / (1 - |lambda0|), valid for a
    reversible chain started from its stationary law."""
    lam = abs(lambda0)
    if not 0 <= lam < 1:
        raise DomainError("|lambda0| must be < 1")
    if delta <= 0 or not 0 < eps <= 1:
        raise DomainError("need delta > 0 and 0 < eps <= 1")
    return var_y / (delta**2 * eps) * (1 + lam) / (1 - lam)


@dataclass(frozen=True)
class MeanEstimate:
    estimate: float
    n: int
    burn_in: int
    sample_variance: float
    required_n: float | None = None
    assumption: str = "bound assumes the chain starts from its stationary law"


def mcmc_mean_estimator(
    model: EnergyModel,
    observable: Callable,
    n: int,
    burn_in: int,
    rng,
    beta: float,
    start,
    rule: str = "threshold",
    lambda0: float | None = None,
    delta: float | None = None,
    eps: float | None = None,
    var_y: float | None = None,
) -> MeanEstimate:
    """S_n = (1/n) sum of the observable over n states after burn-in.

    When ``lambda0``, ``delta`` and ``eps`` are given, the planner bound is
    reported too, using ``var_y`` if supplied and the sample variance
    otherwise.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    ys = run_metropolis(model, start, beta, burn_in + n - 1, rng, rule, observable)[burn_in:]
    ys = np.asarray(ys, dtype=float)
    est = float(ys.mean())
    var = float(ys.var())
    req = None
    if lambda0 is not None and delta is not None and eps is not None:
        req = sample_size_bound(var if var_y is None else var_y, delta, eps, lambda0)
    return MeanEstimate(est, n, burn_in, var, req)


# ---------------------------------------------------------------------------
# simulated annealing


@dataclass(frozen=True)
class AnnealSchedule:
    beta0: float
    K: float
    steps: int

    def __post_init__(self):
        if not self.beta0 > 0:
            raise DomainError("beta0 must be positive")
        if not self.K > 1:
            raise DomainError("K must exceed 1")
        if self.steps < 0:
            raise DomainError("steps must be nonnegative")

    def beta(self, n) -> np.ndarray:
        return self.beta0 * np.power(self.K, n)


def validate_distances(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise BadDistanceMatrix("distance matrix must be square")
    if d.shape[0] < 3:
        raise BadDistanceMatrix("need at least 3 cities")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise BadDistanceMatrix("distances must be finite and nonnegative")
    if np.any(np.diag(d) != 0):
        raise BadDistanceMatrix("diagonal must be zero")
    if not np.allclose(d, d.T, rtol=0, atol=1e-12):
        raise BadDistanceMatrix("distance matrix must be symmetric")
    return d


def distances_from_coords(coords) -> np.ndarray:
    c = np.asarray(coords, dtype=float)
    return np.sqrt(((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=-1))


def tour_length(d: np.ndarray, tour) -> float:
    t = np.asarray(tour)
    return float(d[t, np.roll(t, -1)].sum())


class TourModel(EnergyModel):
    """Closed tours through all cities with city 0 fixed in front; moves are
    transpositions of two of the other positions."""

    def __init__(self, distances):
        self.d = validate_distances(distances)
        self.n = self.d.shape[0]

    def energy(self, state):
        return tour_length(self.d, state)

    def moves(self, state):
        return list(itertools.combinations(range(1, self.n), 2))

    def apply(self, state, move):
        i, j = move
        s = list(state)
        s[i], s[j] = s[j], s[i]
        return tuple(s)

    def states(self):
        return [(0,) + p for p in itertools.permutations(range(1, self.n))]


@njit(cache=True)
def _anneal_kernel(d, tour, beta0, K, u1, u2, u3, two_opt):
    n = tour.size
    m = n - 1
    cur = 0.0
    for p in range(n):
        cur += d[tour[p], tour[(p + 1) % n]]
    best = cur
    best_tour = tour.copy()
    beta = beta0
    for step in range(u1.size):
        i = 1 + int(u1[step] * m)
        j = 1 + int(u2[step] * (m - 1))
        if i > m:
            i = m
        if j > m - 1:
            j = m - 1
        if j >= i:
            j += 1
        if i > j:
            i, j = j, i
        a = tour[i - 1]
        b = tour[i]
        c = tour[j]
        e = tour[(j + 1) % n]
        if two_opt:
            if i == 1 and j == m:
                dh = 0.0
            else:
                dh = d[a, c] + d[b, e] - d[a, b] - d[c, e]
        elif j == i + 1:
            dh = d[a, c] + d[b, e] - d[a, b] - d[c, e]
        elif i == 1 and j == m:
            # tour is cyclic: positions m and 1 are adjacent through city 0
            f = tour[i + 1]
            g = tour[j - 1]
            dh = d[g, b] + d[b, 0] + d[0, c] + d[c, f] - d[g, c] - d[c, 0] - d[0, b] - d[b, f]
        else:
            f = tour[i + 1]
            g = tour[j - 1]
            dh = d[a, c] + d[c, f] + d[g, b] + d[b, e] - d[a, b] - d[b, f] - d[g, c] - d[c, e]
        if dh <= 0.0:
            acc = True
        else:
            acc = u3[step] < np.exp(-beta * dh)
        if acc:
            if two_opt:
                lo, hi = i, j
                while lo < hi:
                    tour[lo], tour[hi] = tour[hi], tour[lo]
                    lo += 1
                    hi -= 1
            else:
                tour[i], tour[j] = tour[j], tour[i]
            cur += dh
            if cur < best - 1e-12:
                best = cur
                best_tour[:] = tour
        beta *= K
    return best_tour, best, cur


@dataclass(frozen=True)
class AnnealResult:
    tour: tuple
    length: float
    schedule: AnnealSchedule
    moves: str


def simulated_annealing_tsp(distances, schedule: AnnealSchedule, rng, moves: str = "transposition", start=None) -> AnnealResult:
    """Metropolis on tours with beta_n = beta0 K^n; returns the best tour seen."""
    d = validate_distances(distances)
    if moves not in ("transposition", "2opt"):
        raise DomainError("moves must be 'transposition' or '2opt'")
    n = d.shape[0]
    gen = as_generator(rng)
    tour = np.arange(n, dtype=np.int64) if start is None else np.array(start, dtype=np.int64)
    if tour[0] != 0 or sorted(tour.tolist()) != list(range(n)):
        raise DomainError("start must be a permutation with city 0 first")
    if n == 3:
        return AnnealResult(tuple(int(x) for x in tour), tour_length(d, tour), schedule, moves)
    u = gen.random((3, schedule.steps))
    best, _, _ = _anneal_kernel(d, tour, float(schedule.beta0), float(schedule.K), u[0], u[1], u[2], moves == "2opt")
    return AnnealResult(tuple(int(x) for x in best), tour_length(d, best), schedule, moves)


def brute_force_tsp(distances) -> tuple[tuple, float]:
    """Optimal tour by enumerating all (n-1)! orders with city 0 first."""
    d = validate_distances(distances)
    n = d.shape[0]
    best, best_len = None, math.inf
    for p in itertools.permutations(range(1, n)):
        if p[0] > p[-1]:
            continue  # each cycle once per direction
        t = (0,) + p
        L = tour_length(d, t)
        if L < best_len:
            best, best_len = t, L
    return best, best_len
