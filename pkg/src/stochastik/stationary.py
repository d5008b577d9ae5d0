"""Invariant laws of irreducible chains and what follows from them.

The stationary law is the unique solution of pi P = pi with unit mass. In the
exact backend it is obtained by eliminating the augmented system
[(P^T - I); 1 ... 1] pi = [0; 1] over the rationals, so pi P = pi holds
bit-for-bit on the output.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .chain import (
    Distribution,
    StochasticMatrix,
    classify,
    power_step,
    validate_distribution,
)
from .errors import (
    ConvergenceError,
    DegenerateNullSpace,
    DomainError,
    NotIrreducible,
    NotReversible,
    SingularMatrix,
    ZeroMass,
)

GAP_TOL = 1e-10
GAP_MAX_ITER = 100_000


@dataclass(frozen=True)
class StationaryResult:
    pi: Distribution
    limit_matrix: object | None  # every row equal to pi; only for regular chains
    recurrence_times: tuple


@dataclass(frozen=True)
class ReversibilityCertificate:
    reversible: bool
    alpha: tuple | None = None  # normalized to unit mass when reversible
    violating_pair: tuple[int, int] | None = None

    def __bool__(self):
        return self.reversible


def stationary_distribution(P: StochasticMatrix) -> Distribution:
    cls = classify(P, regular_exponent_cap=1)
    if not cls.irreducible:
        raise NotIrreducible(f"chain has {len(cls.classes)} communicating classes")
    n = P.n
    if P.exact:
        rows = P.rows()
        a = [[rows[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
        a.append([Fraction(1)] * n)
        b = [Fraction(0)] * n + [Fraction(1)]
        try:
            pi = linalg.solve_overdetermined(a, b)
        except SingularMatrix as exc:
            raise DegenerateNullSpace(str(exc)) from exc
        return validate_distribution(pi, "exact")
    a = P.as_float().T - np.eye(n)
    a = np.vstack([a, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < n:
        raise DegenerateNullSpace("null space of P^T - I is not one-dimensional")
    pi = np.clip(pi, 0.0, None)
    return validate_distribution(pi / pi.sum(), "float", tol=1e-9)


def mean_recurrence_times(pi: Distribution) -> tuple:
    """E_i[tau_i] = 1 / pi_i."""
    out = []
    for i, p in enumerate(pi.probs):
        if p <= 0:
            raise ZeroMass(f"state {i} has zero stationary mass")
        out.append(1 / p if pi.backend == "exact" else 1.0 / float(p))
    return tuple(out)


def limit_matrix(pi: Distribution):
    if pi.backend == "exact":
        return [list(pi.probs) for _ in range(pi.n)]
    return np.tile(pi.as_float(), (pi.n, 1))


def stationary(P: StochasticMatrix) -> StationaryResult:
    pi = stationary_distribution(P)
    cls = classify(P)
    lim = limit_matrix(pi) if cls.regular else None
    return StationaryResult(pi, lim, mean_recurrence_times(pi))


def _close(a, b, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def reversible_vector(P: StochasticMatrix) -> ReversibilityCertificate:
    """Search for alpha with alpha_i p_ij = alpha_j p_ji for every pair.

    The support must be symmetric; the first asymmetric pair in
    lexicographic order is returned as the witness. Otherwise alpha is
    propagated from alpha_0 = 1 along a BFS spanning tree and every
    remaining edge is checked directly.
    """
    n = P.n
    exact = P.exact
    rows = P.rows()
    for i in range(n):
        for j in range(i + 1, n):
            if (rows[i][j] > 0) != (rows[j][i] > 0):
                return ReversibilityCertificate(False, violating_pair=(i, j))
    one = Fraction(1) if exact else 1.0
    alpha: list = [None] * n
    alpha[0] = one
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in range(n):
            if rows[i][j] > 0 and alpha[j] is None:
                alpha[j] = alpha[i] * rows[i][j] / rows[j][i]
                queue.append(j)
    if any(a is None for a in alpha):
        raise NotIrreducible("reversibility search needs an irreducible chain")
    for i in range(n):
        for j in range(i + 1, n):
            if not _close(alpha[i] * rows[i][j], alpha[j] * rows[j][i], exact):
                return ReversibilityCertificate(False, violating_pair=(i, j))
    total = sum(alpha)
    return ReversibilityCertificate(True, alpha=tuple(a / total for a in alpha))


def detailed_balance_holds(P: StochasticMatrix, pi: Distribution) -> bool:
    rows = P.rows()
    exact = P.exact and pi.backend == "exact"
    p = pi.probs
    return all(
        _close(p[i] * rows[i][j], p[j] * rows[j][i], exact) for i in range(P.n) for j in range(i + 1, P.n)
    )


def ergodic_average(P: StochasticMatrix, nu: Distribution, reward, n: int):
    """(1/n) E_nu[sum_{m<n} reward(X_m)], by propagating the law of X_m."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if P.exact and nu.backend == "exact":
        r = [linalg.to_fraction(x) for x in reward]
    else:
        r = [float(x) for x in reward]
    total = 0
    law = nu
    for m in range(n):
        if m:
            law = power_step(law, P, 1)
        total += sum(pi_i * ri for pi_i, ri in zip(law.probs, r))
    return total / n


def path_probability(P: StochasticMatrix, pi: Distribution, path) -> object:
    """P_pi[X_0 = path[0], ..., X_k = path[k]]."""
    prob = pi.probs[path[0]]
    for a, b in zip(path, path[1:]):
        prob = prob * P[a, b]
    return prob


def _symmetrized(P: StochasticMatrix, pi: Distribution) -> tuple[np.ndarray, np.ndarray]:
    p = pi.as_float()
    s = np.sqrt(p)
    a = P.as_float() * s[:, None] / s[None, :]
    return 0.5 * (a + a.T), s


def second_eigenvalue_modulus(P: StochasticMatrix, pi: Distribution, tol: float = GAP_TOL, max_iter: int = GAP_MAX_ITER) -> float:
    """|lambda_0|, the largest modulus among eigenvalues other than the
    trivial 1, for a reversible chain.

    D^{1/2} P D^{-1/2} (D = diag pi) is symmetric; the vector sqrt(pi) spans
    the constant direction in the pi-inner product and is projected out.
    Iterating the square of the operator makes a pair +-lambda harmless.
    """
    if not detailed_balance_holds(P, pi):
        raise NotReversible("detailed balance fails; the variational gap does not apply")
    if any(float(x) <= 0 for x in pi.probs):
        raise ZeroMass("stationary law must be positive")
    a, s = _symmetrized(P, pi)
    u = s / np.linalg.norm(s)
    a2 = a @ a
    # Deterministic start with components along every direction generically.
    v = np.cos(np.arange(1, P.n + 1) * 1.2345) + 0.1
    v -= u * (u @ v)
    nv = np.linalg.norm(v)
    if nv == 0 or P.n == 1:
        return 0.0
    v /= nv
    prev = None
    for _ in range(max_iter):
        w = a2 @ v
        w -= u * (u @ w)
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            return 0.0
        rq = float(v @ w)
        v = w / nw
        if prev is not None and abs(rq - prev) <= tol * max(rq, 1e-300) and abs(nw - rq) <= math.sqrt(tol):
            return math.sqrt(max(rq, 0.0))
        prev = rq
        if rq < tol**2:
            return 0.0
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def spectral_gap(P: StochasticMatrix, pi: Distribution, **kw) -> float:
    """1 - |lambda_0| for a reversible chain."""
    return 1.0 - second_eigenvalue_modulus(P, pi, **kw)


def l1_distance(mu: Distribution, nu: Distribution) -> float:
    return float(np.abs(mu.as_float() - nu.as_float()).sum())


__all__ = [
    "StationaryResult",
    "ReversibilityCertificate",
    "stationary_distribution",
    "mean_recurrence_times",
    "limit_matrix",
    "stationary",
    "reversible_vector",
    "detailed_balance_holds",
    "ergodic_average",
    "path_probability",
    "second_eigenvalue_modulus",
    "spectral_gap",
    "l1_distance",
]
