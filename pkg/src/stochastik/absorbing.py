"""Absorbing chains in canonical form.

States are reordered transient-first, absorbing-last (stable within each
group), which exposes the blocks Q (transient to transient) and R (transient
to absorbing). From those: the fundamental matrix F = (I - Q)^-1, the
absorption matrix B = F R and the expected absorption times F 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .chain import Distribution, StochasticMatrix, classify, simulate_many, validate_distribution
from .errors import DimensionMismatch, NotAbsorbing, SingularMatrix


@dataclass(frozen=True)
class AbsorbingDecomposition:
    ordering: tuple[int, ...]
    transient: tuple[int, ...]
    absorbing: tuple[int, ...]
    Q: object
    R: object
    backend: str
    F: object = field(default=None, repr=False)
    B: object = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return len(self.transient)

    @property
    def r(self) -> int:
        return len(self.absorbing)


def canonical_form(P: StochasticMatrix) -> AbsorbingDecomposition:
    cls = classify(P, regular_exponent_cap=1)
    if not cls.absorbing_chain:
        raise NotAbsorbing("some state cannot reach an absorbing state")
    absorbing = cls.absorbing_states
    transient = tuple(i for i in range(P.n) if i not in absorbing)
    rows = P.rows()
    if P.exact:
        Q = [[rows[i][j] for j in transient] for i in transient]
        R = [[rows[i][k] for k in absorbing] for i in transient]
    else:
        Q = rows[np.ix_(transient, transient)]
        R = rows[np.ix_(transient, absorbing)]
    return AbsorbingDecomposition(transient + absorbing, transient, absorbing, Q, R, P.backend)


def fundamental_matrix(dec: AbsorbingDecomposition):
    """F = (I - Q)^-1; entry (i, j) is the mean number of visits to j from i."""
    if dec.backend == "exact":
        i_minus_q = linalg.sub(linalg.identity(dec.q), dec.Q)
        return linalg.inverse(i_minus_q)
    try:
        return np.linalg.inv(np.eye(dec.q) - dec.Q)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc


def _with_f(dec: AbsorbingDecomposition) -> AbsorbingDecomposition:
    if dec.F is None:
        dec = replace(dec, F=fundamental_matrix(dec))
    return dec


def absorption_probabilities(dec: AbsorbingDecomposition):
    """B = F R; entry (i, k) is the probability of ending in absorbing state k."""
    dec = _with_f(dec)
    if dec.backend == "exact":
        return linalg.matmul(dec.F, dec.R)
    return dec.F @ dec.R


def expected_absorption_times(dec: AbsorbingDecomposition):
    """Mean number of steps to absorption from each transient state."""
    dec = _with_f(dec)
    if dec.backend == "exact":
        return [sum(row) for row in dec.F]
    return dec.F.sum(axis=1)


def solve(P: StochasticMatrix) -> AbsorbingDecomposition:
    """Canonical form with F and B filled in."""
    dec = _with_f(canonical_form(P))
    return replace(dec, B=absorption_probabilities(dec))


def restrict_initial(dec: AbsorbingDecomposition, nu) -> list:
    """Weights of a full-state initial law on the transient states.

    Mass placed on absorbing states contributes zero time and is returned
    separately by the callers that need it.
    """
    if isinstance(nu, Distribution):
        nu = nu.probs
    nu = list(nu)
    if len(nu) != len(dec.ordering):
        raise DimensionMismatch("initial law must cover every state")
    return [nu[i] for i in dec.transient]


def averaged_absorption_time(dec: AbsorbingDecomposition, nu):
    times = expected_absorption_times(dec)
    w = restrict_initial(dec, nu)
    return sum(wi * ti for wi, ti in zip(w, times))


def averaged_absorption_probabilities(dec: AbsorbingDecomposition, nu) -> list:
    """P_nu[X_tau = k] for every absorbing state k (in ``dec.absorbing`` order)."""
    B = absorption_probabilities(dec)
    full = list(nu.probs if isinstance(nu, Distribution) else nu)
    w = restrict_initial(dec, full)
    out = []
    for col, k in enumerate(dec.absorbing):
        out.append(full[k] + sum(wi * B[i][col] for i, wi in enumerate(w)))
    return out


def truncated_series(dec: AbsorbingDecomposition, terms: int = 500) -> np.ndarray:
    """Float partial sum I + Q + ... + Q^terms, converging to F."""
    Q = np.array([[float(x) for x in row] for row in dec.Q], dtype=float)
    acc = np.eye(dec.q)
    term = np.eye(dec.q)
    for _ in range(terms):
        term = term @ Q
        acc += term
    return acc


def simulate_absorption(P: StochasticMatrix, start: int, runs: int, rng, max_steps: int = 100_000) -> np.ndarray:
    """Final states of ``runs`` independent trajectories started at ``start``."""
    cls = classify(P, regular_exponent_cap=1)
    starts = np.full(runs, start, dtype=np.int64)
    return simulate_many(P, starts, max_steps, rng, stop=cls.absorbing_states)


def initial_law(values, n: int, backend: str = "exact") -> Distribution:
    return validate_distribution(values, backend, n=n)
