"""Finite Markov chains: validated transition matrices, distributions,
structural classification and trajectory sampling.

Two numeric backends exist. ``"exact"`` stores :class:`~fractions.Fraction`
entries and every analysis is bit-exact; ``"float"`` stores a read-only numpy
array and is meant for large chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np

from . import linalg
from .errors import DimensionMismatch, DomainError, NegativeEntry, NoReturnPath, RowSumNotOne
from .rng import as_generator

BACKENDS = ("exact", "float")
FLOAT_TOL = 1e-12


def _check_backend(backend: str) -> None:
    if backend not in BACKENDS:
        raise DomainError(f"backend must be one of {BACKENDS}, got {backend!r}")


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Row-stochastic matrix. Build it with :func:`validate_stochastic`."""

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
        """Mutable copy of the entries (list of Fraction lists, or ndarray)."""
        if self.exact:
            return [list(r) for r in self.entries]
        return np.array(self.entries, dtype=float)

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array([[float(x) for x in r] for r in self.entries], dtype=float)
        return np.array(self.entries, dtype=float)

    def support(self) -> np.ndarray:
        """Boolean adjacency matrix of positive transition probabilities."""
        if self.exact:
            return np.array([[x > 0 for x in r] for r in self.entries], dtype=bool)
        return np.asarray(self.entries) > 0

    def index(self, state) -> int:
        """Position of a state given by label or integer index."""
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if not 0 <= state < self.n:
                raise IndexError(f"state {state} out of range")
            return int(state)
        if self.labels is None or state not in self.labels:
            raise KeyError(f"unknown state {state!r}")
        return self.labels.index(state)

    def __matmul__(self, other: "StochasticMatrix") -> "StochasticMatrix":
        if self.n != other.n:
            raise DimensionMismatch("matrices have different sizes")
        if self.exact and other.exact:
            return validate_stochastic(linalg.matmul(self.rows(), other.rows()), "exact", self.labels)
        prod = self.as_float() @ other.as_float()
        return validate_stochastic(prod, "float", self.labels, tol=1e-10)

    def power(self, m: int) -> "StochasticMatrix":
        if m < 0:
            raise DomainError("power must be nonnegative")
        result = identity_chain(self.n, self.backend, self.labels)
        base = self
        while m:
            if m & 1:
                result = result @ base
            m >>= 1
            if m:
                base = base @ base
        return result

    def __repr__(self):
        return f"StochasticMatrix(n={self.n}, backend={self.backend!r})"


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: object  # tuple of Fraction, or read-only float ndarray
    backend: str

    @property
    def n(self) -> int:
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    def __len__(self):
        return len(self.probs)

    def as_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.probs], dtype=float)

    def __eq__(self, other):
        if isinstance(other, Distribution):
            other = other.probs
        try:
            return len(other) == self.n and all(a == b for a, b in zip(self.probs, other))
        except TypeError:
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        if self.backend == "exact":
            body = ", ".join(str(p) for p in self.probs)
        else:
            body = ", ".join(f"{p:.6g}" for p in self.probs)
        return f"Distribution([{body}])"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def validate_stochastic(raw, backend: str = "exact", labels=None, tol: float = FLOAT_TOL) -> StochasticMatrix:
    """Check that ``raw`` is row-stochastic and wrap it; nothing is normalized.

    Raises NegativeEntry for an entry outside [0, 1] and RowSumNotOne with the
    offending row and its deviation. The float backend accepts row sums
    within ``tol`` of 1.
    """
    _check_backend(backend)
    rows = [list(r) for r in raw]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise DimensionMismatch("transition matrix must be square with n >= 1")
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != n:
            raise DimensionMismatch("one label per state is required")
    if backend == "exact":
        rows = linalg.fmatrix(rows)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                if x < 0 or x > 1:
                    raise NegativeEntry(i, j, x)
            s = sum(r)
            if s != 1:
                raise RowSumNotOne(i, float(s - 1))
        return StochasticMatrix(tuple(tuple(r) for r in rows), "exact", labels)
    a = np.array([[float(x) for x in r] for r in rows], dtype=float)
    bad = np.argwhere((a < 0) | (a > 1) | ~np.isfinite(a))
    if len(bad):
        i, j = bad[0]
        raise NegativeEntry(int(i), int(j), a[i, j])
    dev = a.sum(axis=1) - 1.0
    worst = int(np.argmax(np.abs(dev)))
    if abs(dev[worst]) > tol:
        raise RowSumNotOne(worst, float(dev[worst]))
    return StochasticMatrix(_readonly(a), "float", labels)


def identity_chain(n: int, backend: str = "exact", labels=None) -> StochasticMatrix:
    if backend == "exact":
        return StochasticMatrix(tuple(tuple(r) for r in linalg.identity(n)), "exact", labels)
    return StochasticMatrix(_readonly(np.eye(n)), "float", labels)


def validate_distribution(raw, backend: str = "exact", n: int | None = None, tol: float = FLOAT_TOL) -> Distribution:
    _check_backend(backend)
    vals = list(raw)
    if n is not None and len(vals) != n:
        raise DimensionMismatch(f"distribution has {len(vals)} entries, chain has {n} states")
    if backend == "exact":
        vals = [linalg.to_fraction(x) for x in vals]
        for j, x in enumerate(vals):
            if x < 0:
                raise NegativeEntry(0, j, x)
        if sum(vals) != 1:
            raise RowSumNotOne(0, float(sum(vals) - 1))
        return Distribution(tuple(vals), "exact")
    a = np.array([float(x) for x in vals])
    if np.any(a < 0):
        j = int(np.argmax(a < 0))
        raise NegativeEntry(0, j, a[j])
    if abs(a.sum() - 1) > tol:
        raise RowSumNotOne(0, float(a.sum() - 1))
    return Distribution(_readonly(a), "float")


def dirac(i: int, n: int, backend: str = "exact") -> Distribution:
    return validate_distribution([int(k == i) for k in range(n)], backend)


def _coerce_pair(nu: Distribution, P: StochasticMatrix):
    if nu.n != P.n:
        raise DimensionMismatch(f"distribution of size {nu.n} vs {P.n}-state chain")
    if P.exact and nu.backend != "exact":
        P = validate_stochastic(P.as_float(), "float")
    if not P.exact and nu.backend == "exact":
        nu = validate_distribution(nu.as_float(), "float")
    return nu, P


def power_step(nu: Distribution, P: StochasticMatrix, m: int) -> Distribution:
    """Law of X_m when X_0 ~ nu, i.e. the row vector nu P^m."""
    if m < 0:
        raise DomainError("number of steps must be nonnegative")
    nu, P = _coerce_pair(nu, P)
    if P.exact:
        v = list(nu.probs)
        rows = P.rows()
        for _ in range(m):
            v = linalg.vecmat(v, rows)
        return Distribution(tuple(v), "exact")
    v = np.array(nu.probs, dtype=float)
    a = P.as_float()
    for _ in range(m):
        v = v @ a
    return Distribution(_readonly(v), "float")


@dataclass(frozen=True)
class ChainClassification:
    classes: tuple[frozenset, ...]
    class_kind: tuple[str, ...]  # "recurrent" (closed) or "transient" (not closed)
    irreducible: bool
    absorbing_states: tuple[int, ...]
    absorbing_chain: bool
    regular: bool
    regular_witness: int | None
    periods: tuple[int | None, ...]  # None when the state never returns

    def class_of(self, i: int) -> frozenset:
        for c in self.classes:
            if i in c:
                return c
        raise IndexError(i)


def _digraph(P: StochasticMatrix) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(P.n))
    src, dst = np.nonzero(P.support())
    g.add_edges_from(zip(src.tolist(), dst.tolist()))
    return g


def _class_period(g: nx.DiGraph, members: frozenset) -> int | None:
    root = min(members)
    level = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.successors(u):
                if v in members and v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    d = 0
    for u in members:
        for v in g.successors(u):
            if v in members:
                d = math.gcd(d, level[u] + 1 - level[v])
    return d or None


def period(P: StochasticMatrix, i) -> int:
    """gcd of the return lengths of state ``i``.

    Computed from BFS levels inside the strongly connected class of ``i``:
    every edge u->v of the class contributes level(u) + 1 - level(v).
    """
    i = P.index(i)
    g = _digraph(P)
    members = next(frozenset(c) for c in nx.strongly_connected_components(g) if i in c)
    d = _class_period(g, members)
    if d is None:
        raise NoReturnPath(f"state {i} never returns to itself")
    return d


def default_regular_cap(n: int) -> int:
    return (n - 1) ** 2 + 1


def classify(P: StochasticMatrix, regular_exponent_cap: int | None = None) -> ChainClassification:
    n = P.n
    cap = default_regular_cap(n) if regular_exponent_cap is None else regular_exponent_cap
    if cap < 1:
        raise DomainError("regular exponent cap must be >= 1")
    g = _digraph(P)
    comps = [frozenset(c) for c in nx.strongly_connected_components(g)]
    comps.sort(key=min)
    cond = nx.condensation(g, scc=[set(c) for c in comps])
    kinds = []
    for k in range(len(comps)):
        kinds.append("recurrent" if cond.out_degree(k) == 0 else "transient")
    periods: list[int | None] = [None] * n
    for c in comps:
        d = _class_period(g, c)
        for i in c:
            periods[i] = d
    absorbing = tuple(i for i in range(n) if P[i, i] == 1)
    absorbing_chain = False
    if absorbing:
        reach = set(absorbing)
        for a in absorbing:
            reach |= nx.ancestors(g, a)
        absorbing_chain = len(reach) == n
    irreducible = len(comps) == 1
    regular, witness = False, None
    if irreducible and periods[0] == 1:
        s = P.support().astype(np.int64)
        cur = s.copy()
        for k in range(1, cap + 1):
            if cur.all():
                regular, witness = True, k
                break
            cur = ((cur @ s) > 0).astype(np.int64)
    return ChainClassification(
        classes=tuple(comps),
        class_kind=tuple(kinds),
        irreducible=irreducible,
        absorbing_states=absorbing,
        absorbing_chain=absorbing_chain,
        regular=regular,
        regular_witness=witness,
        periods=tuple(periods),
    )


def _cumulative(probs: np.ndarray) -> np.ndarray:
    """Row-wise CDF with the tail past the last positive entry pinned to +inf,
    so rounding can never select a zero-probability state."""
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    cum = np.cumsum(probs, axis=1)
    for r in range(probs.shape[0]):
        last = np.flatnonzero(probs[r] > 0)[-1]
        cum[r, last:] = np.inf
    return cum


def sample_index(cum_row: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cum_row, u, side="right"))


def simulate_trajectory(P: StochasticMatrix, nu: Distribution, steps: int, rng) -> np.ndarray:
    """Sample X_0..X_steps by inverse-CDF draws over the current row."""
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    if nu.n != P.n:
        raise DimensionMismatch("distribution and chain sizes differ")
    gen = as_generator(rng)
    cum = _cumulative(P.as_float())
    cum0 = _cumulative(nu.as_float())[0]
    u = gen.random(steps + 1)
    path = np.empty(steps + 1, dtype=np.int64)
    x = sample_index(cum0, u[0])
    path[0] = x
    for t in range(1, steps + 1):
        x = int(np.searchsorted(cum[x], u[t], side="right"))
        path[t] = x
    return path


def simulate_many(P: StochasticMatrix, starts: np.ndarray, steps: int, rng, stop: Sequence[int] = ()) -> np.ndarray:
    """Advance many independent copies in lockstep; returns final states.

    Copies that enter a state listed in ``stop`` are frozen there.
    """
    gen = as_generator(rng)
    cum = _cumulative(P.as_float())
    x = np.array(starts, dtype=np.int64)
    frozen = np.isin(x, stop)
    for _ in range(steps):
        active = np.flatnonzero(~frozen)
        if active.size == 0:
            break
        u = gen.random(active.size)
        x[active] = (u[:, None] >= cum[x[active]]).sum(axis=1)
        frozen[active] = np.isin(x[active], stop)
    return x

