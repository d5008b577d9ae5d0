"""Named classic models with reference values.

Each :class:`NamedModel` carries a transition matrix or generator and a list
of :class:`Oracle` entries: a quantity, its known value, how to compute it
with this package, and a short note on how the value is obtained by hand.
States are 0-indexed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import absorbing, jump, queueing, stationary
from .chain import StochasticMatrix, classify, validate_stochastic
from .errors import UnknownModel
from .jump import Generator

F = Fraction


@dataclass(frozen=True)
class Oracle:
    quantity: str
    expected: object
    compute: Callable = field(repr=False)
    source: str
    tol: float | None = None  # None means exact equality


@dataclass(frozen=True)
class NamedModel:
    name: str
    description: str
    payload: object  # StochasticMatrix or Generator
    oracles: tuple


@dataclass(frozen=True)
class OracleCheck:
    quantity: str
    expected: object
    got: object
    passed: bool
    source: str
    error: str | None = None


@dataclass(frozen=True)
class VerifyReport:
    name: str
    checks: tuple
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# helpers


def _abs(P):
    return absorbing.solve(P)


def _pi(P):
    return list(stationary.stationary_distribution(P).probs)


def _recurrence(P, i):
    return stationary.mean_recurrence_times(stationary.stationary_distribution(P))[i]


def graph_walk(adjacency: dict, order: list) -> StochasticMatrix:
    """Uniform random walk on an undirected graph given as neighbor lists."""
    idx = {v: k for k, v in enumerate(order)}
    rows = []
    for v in order:
        nb = adjacency[v]
        row = [F(0)] * len(order)
        for w in nb:
            row[idx[w]] += F(1, len(nb))
        rows.append(row)
    return validate_stochastic(rows, "exact", labels=[str(v) for v in order])


def _board(moves: Callable, squares=None):
    squares = squares or [(r, c) for r in range(8) for c in range(8)]
    sq = set(squares)
    adj = {s: [t for t in moves(*s) if t in sq] for s in squares}
    return graph_walk(adj, squares)


def _on_board(r, c):
    return 0 <= r < 8 and 0 <= c < 8


def _knight(r, c):
    jumps = [(1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1)]
    return [(r + a, c + b) for a, b in jumps if _on_board(r + a, c + b)]


def _king(r, c):
    return [(r + a, c + b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a or b) and _on_board(r + a, c + b)]


def _slide(r, c, dirs):
    out = []
    for a, b in dirs:
        k = 1
        while _on_board(r + k * a, c + k * b):
            out.append((r + k * a, c + k * b))
            k += 1
    return out


def _bishop(r, c):
    return _slide(r, c, [(1, 1), (1, -1), (-1, 1), (-1, -1)])


def _queen(r, c):
    return _bishop(r, c) + _slide(r, c, [(1, 0), (-1, 0), (0, 1), (0, -1)])


# ---------------------------------------------------------------------------
# discrete-time models


def mouse() -> NamedModel:
    P = validate_stochastic(
        [
            [0, F(1, 3), F(1, 3), 0, F(1, 3)],
            [F(1, 2), 0, 0, F(1, 2), 0],
            [F(1, 2), 0, 0, F(1, 2), 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
        ],
        labels=["room1", "room2", "room3", "food", "den"],
    )
    src = "canonical-form computation for the 5-room maze"
    return NamedModel(
        "mouse",
        "mouse in a maze: rooms 1-3 transient, food and den absorbing",
        P,
        (
            Oracle("F", [[F(3, 2), F(1, 2), F(1, 2)], [F(3, 4), F(5, 4), F(1, 4)], [F(3, 4), F(1, 4), F(5, 4)]], lambda P: _abs(P).F, src),
            Oracle("P_room1[food]", F(1, 2), lambda P: _abs(P).B[0][0], src),
            Oracle("P_room2[food]", F(3, 4), lambda P: _abs(P).B[1][0], src),
            Oracle("E_room1[tau]", F(5, 2), lambda P: absorbing.expected_absorption_times(_abs(P))[0], src),
            Oracle("E_room2[tau]", F(9, 4), lambda P: absorbing.expected_absorption_times(_abs(P))[1], src),
        ),
    )


def coin_game() -> NamedModel:
    P = validate_stochastic(
        [
            [F(1, 2), F(1, 2), 0, 0, 0, 0],
            [0, 0, 0, F(1, 2), 0, F(1, 2)],
            [F(1, 2), F(1, 2), 0, 0, 0, 0],
            [0, 0, F(1, 2), 0, F(1, 2), 0],
            [0, 0, 0, 0, 1, 0],
            [0, 0, 0, 0, 0, 1],
        ],
        labels=["PP", "PF", "FP", "FF", "A", "B"],
    )
    nu = [F(1, 4)] * 4 + [0, 0]
    src = "fundamental matrix of the two-toss pattern game"
    return NamedModel(
        "coin_game",
        "players A and B wait for their two-toss patterns; states are the last two tosses",
        P,
        (
            Oracle("Q", [[F(1, 2), F(1, 2), 0, 0], [0, 0, 0, F(1, 2)], [F(1, 2), F(1, 2), 0, 0], [0, 0, F(1, 2), 0]], lambda P: absorbing.canonical_form(P).Q, src),
            Oracle("R", [[0, 0], [0, F(1, 2)], [0, 0], [F(1, 2), 0]], lambda P: absorbing.canonical_form(P).R, src),
            Oracle(
                "F",
                [
                    [F(7, 3), F(4, 3), F(1, 3), F(2, 3)],
                    [F(1, 3), F(4, 3), F(1, 3), F(2, 3)],
                    [F(4, 3), F(4, 3), F(4, 3), F(2, 3)],
                    [F(2, 3), F(2, 3), F(2, 3), F(4, 3)],
                ],
                lambda P: _abs(P).F,
                src,
            ),
            Oracle("B", [[F(1, 3), F(2, 3)]] * 3 + [[F(2, 3), F(1, 3)]], lambda P: _abs(P).B, src),
            Oracle("P_nu[A wins]", F(5, 12), lambda P: absorbing.averaged_absorption_probabilities(_abs(P), nu)[0], src),
            Oracle("E_PP[tau]", F(14, 3), lambda P: absorbing.expected_absorption_times(_abs(P))[0], src),
            Oracle("E_nu[tau]", F(23, 6), lambda P: absorbing.averaged_absorption_time(_abs(P), nu), src),
            Oracle("mean game length", F(35, 6), lambda P: 2 + absorbing.averaged_absorption_time(_abs(P), nu), "two initial tosses plus E_nu[tau]"),
        ),
    )


def tennis() -> NamedModel:
    P = validate_stochastic(
        [
            [0, F(3, 5), F(2, 5), 0, 0],
            [F(2, 5), 0, 0, F(3, 5), 0],
            [F(3, 5), 0, 0, 0, F(2, 5)],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
        ],
        labels=["deuce", "adv_A", "adv_B", "A_wins", "B_wins"],
    )
    src = "fundamental matrix from deuce, A wins each point with probability 3/5"
    N = [[F(25, 13), F(15, 13), F(10, 13)], [F(10, 13), F(19, 13), F(4, 13)], [F(15, 13), F(9, 13), F(19, 13)]]
    return NamedModel(
        "tennis",
        "tennis game from deuce",
        P,
        (
            Oracle("N", N, lambda P: _abs(P).F, src),
            Oracle("P_deuce[A wins]", F(9, 13), lambda P: _abs(P).B[0][0], src),
            Oracle("E_deuce[tau]", F(50, 13), lambda P: absorbing.expected_absorption_times(_abs(P))[0], src),
        ),
    )


def bilbo() -> NamedModel:
    P = validate_stochastic(
        [
            [0, F(1, 3), F(1, 3), F(1, 3), 0],
            [F(1, 4), 0, F(1, 4), F(1, 4), F(1, 4)],
            [F(1, 3), F(1, 3), 0, 0, F(1, 3)],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
        ],
        labels=["cave1", "cave2", "cave3", "gollum", "exit"],
    )
    src = "absorbing analysis of the three-cave labyrinth"
    return NamedModel(
        "bilbo",
        "walk in a cave system until meeting Gollum or finding the exit",
        P,
        (
            Oracle("F", [[F(33, 24), F(16, 24), F(15, 24)], [F(12, 24), F(32, 24), F(12, 24)], [F(15, 24), F(16, 24), F(33, 24)]], lambda P: _abs(P).F, src),
            Oracle("E_1[tau]", F(8, 3), lambda P: absorbing.expected_absorption_times(_abs(P))[0], src),
            Oracle("P_1[exit]", F(3, 8), lambda P: _abs(P).B[0][1], src),
        ),
    )


def mont_blanc_matrix(p) -> StochasticMatrix:
    """States: start, intermediate hut, give up, summit."""
    backend = "float" if isinstance(p, float) else "exact"
    p = p if backend == "float" else F(p)
    q = 1 - p
    return validate_stochastic([[0, p, q, 0], [q, 0, 0, p], [0, 0, 1, 0], [0, 0, 0, 1]], backend, labels=["TR", "AG", "NA", "MB"], tol=1e-12)


def mont_blanc(p=F(1, 2)) -> NamedModel:
    pstar = (math.sqrt(5) - 1) / 2
    src = "closed forms p^2/(1-pq) and (1+p)/(1-pq)"

    def summit(p):
        return lambda P: _abs(mont_blanc_matrix(p)).B[0][1]

    oracles = []
    for pv in (F(1, 3), F(1, 2), F(3, 4)):
        qv = 1 - pv
        oracles.append(Oracle(f"P_TR[summit] at p={pv}", pv**2 / (1 - pv * qv), summit(pv), src))
        oracles.append(
            Oracle(
                f"E_TR[tau] at p={pv}",
                (1 + pv) / (1 - pv * qv),
                (lambda pv: lambda P: absorbing.expected_absorption_times(_abs(mont_blanc_matrix(pv)))[0])(pv),
                src,
            )
        )
    oracles.append(Oracle("P_TR[summit] at p*=(sqrt5-1)/2", 0.5, summit(pstar), "p* solves p^2/(1-p(1-p)) = 1/2", 1e-9))
    oracles.append(
        Oracle(
            "E_TR[tau] at p*",
            (1 + pstar) / (1 - pstar * (1 - pstar)),
            lambda P: absorbing.expected_absorption_times(_abs(mont_blanc_matrix(pstar)))[0],
            "closed form at p*, about 2.118",
            1e-9,
        )
    )
    return NamedModel("mont_blanc", "climb with success probability p per stage", mont_blanc_matrix(p), tuple(oracles))


def regular4() -> NamedModel:
    P = validate_stochastic(
        [[0, F(1, 2), F(1, 2), 0], [F(1, 16), F(7, 16), 0, F(1, 2)], [F(1, 16), 0, F(7, 16), F(1, 2)], [0, F(1, 4), F(1, 4), F(1, 2)]]
    )
    return NamedModel(
        "regular4",
        "4-state regular chain",
        P,
        (
            Oracle("pi", [F(1, 33), F(8, 33), F(8, 33), F(16, 33)], _pi, "null space of P^T - I"),
            Oracle("regular witness", 2, lambda P: classify(P).regular_witness, "P^2 is entrywise positive"),
        ),
    )


def path4() -> NamedModel:
    P = validate_stochastic([[0, 1, 0, 0], [F(1, 4), F(1, 2), F(1, 4), 0], [0, F(1, 2), 0, F(1, 2)], [0, 0, 1, 0]])
    return NamedModel(
        "path4",
        "birth-death chain on four states",
        P,
        (
            Oracle("pi", [F(1, 8), F(1, 2), F(1, 4), F(1, 8)], _pi, "null space of P^T - I"),
            Oracle("reversible", True, lambda P: stationary.reversible_vector(P).reversible, "birth-death chains satisfy detailed balance"),
            Oracle("regular", True, lambda P: classify(P).regular, "P^4 is entrywise positive"),
        ),
    )


def nonreversible4() -> NamedModel:
    P = validate_stochastic([[0, F(1, 2), 0, F(1, 2)], [F(1, 2), 0, F(1, 2), 0], [F(1, 2), 0, F(1, 2), 0], [0, F(1, 2), 0, F(1, 2)]])
    return NamedModel(
        "nonreversible4",
        "doubly stochastic chain that is not reversible",
        P,
        (
            Oracle("pi", [F(1, 4)] * 4, _pi, "doubly stochastic matrix"),
            Oracle("violating pair", (0, 2), lambda P: stationary.reversible_vector(P).violating_pair, "pi_0 p_02 = 0 but pi_2 p_20 = 1/8"),
        ),
    )


def weather() -> NamedModel:
    P = validate_stochastic(
        [[F(1, 4), F(3, 4), 0], [F(1, 2), F(1, 3), F(1, 6)], [0, F(1, 2), F(1, 2)]], labels=["sun", "rain", "snow"]
    )
    return NamedModel(
        "weather",
        "three-state weather chain",
        P,
        (
            Oracle("pi", [F(1, 3), F(1, 2), F(1, 6)], _pi, "null space of P^T - I"),
            Oracle("mean days between snow", 6, lambda P: _recurrence(P, 2), "1 / pi(snow)"),
        ),
    )


def umbrella() -> NamedModel:
    P = validate_stochastic(
        [[0, 0, 0, 1], [0, 0, F(2, 3), F(1, 3)], [0, F(2, 3), F(1, 3), 0], [F(2, 3), F(1, 3), 0, 0]]
    )
    return NamedModel(
        "umbrella",
        "umbrellas at the current location, rain probability 1/3",
        P,
        (Oracle("pi", [F(2, 11), F(3, 11), F(3, 11), F(3, 11)], _pi, "null space of P^T - I"),),
    )


def ehrenfest_matrix(N: int, backend: str = "exact") -> StochasticMatrix:
    rows = []
    for i in range(N + 1):
        row = [F(0)] * (N + 1)
        if i > 0:
            row[i - 1] = F(i, N)
        if i < N:
            row[i + 1] = 1 - F(i, N)
        rows.append(row)
    return validate_stochastic(rows, backend)


def ehrenfest(N: int = 4) -> NamedModel:
    pi = [F(math.comb(N, i), 2**N) for i in range(N + 1)]
    times = [F(2**N * math.factorial(i) * math.factorial(N - i), math.factorial(N)) for i in range(N + 1)]
    return NamedModel(
        "ehrenfest",
        f"Ehrenfest urn with N={N} balls, state = balls in the first urn",
        ehrenfest_matrix(N),
        (
            Oracle("pi", pi, _pi, "binomial(N, 1/2)"),
            Oracle(
                "recurrence times",
                times,
                lambda P: list(stationary.mean_recurrence_times(stationary.stationary_distribution(P))),
                "2^N i!(N-i)!/N!",
            ),
            Oracle("regular", False, lambda P: classify(P).regular, "period 2"),
            Oracle("period", 2, lambda P: classify(P).periods[0], "parity alternates"),
        ),
    )


def ring(n: int = 5, p=F(1, 2)) -> StochasticMatrix:
    p = F(p)
    rows = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][(i + 1) % n] += p
        rows[i][(i - 1) % n] += 1 - p
    return validate_stochastic(rows)


def ring_model() -> NamedModel:
    return NamedModel(
        "ring",
        "walk on a 5-cycle, clockwise with probability p",
        ring(5, F(1, 2)),
        (
            Oracle("pi", [F(1, 5)] * 5, _pi, "doubly stochastic"),
            Oracle("reversible at p=1/2", True, lambda P: stationary.reversible_vector(ring(5, F(1, 2))).reversible, "symmetric matrix"),
            Oracle("reversible at p=1/3", False, lambda P: stationary.reversible_vector(ring(5, F(1, 3))).reversible, "net circulation around the cycle"),
        ),
    )


def knight() -> NamedModel:
    return NamedModel(
        "knight",
        "knight moving uniformly on an 8x8 board",
        _board(_knight),
        (Oracle("recurrence time of a corner", 168, lambda P: _recurrence(P, 0), "degree sum 336 over corner degree 2"),),
    )


def king() -> NamedModel:
    return NamedModel(
        "king",
        "king moving uniformly on an 8x8 board",
        _board(_king),
        (Oracle("recurrence time of a corner", 140, lambda P: _recurrence(P, 0), "degree sum 420 over corner degree 3"),),
    )


def queen() -> NamedModel:
    return NamedModel(
        "queen",
        "queen moving uniformly on an 8x8 board",
        _board(_queen),
        (Oracle("recurrence time of a corner", F(208, 3), lambda P: _recurrence(P, 0), "degree sum 1456 over corner degree 21"),),
    )


def bishop() -> NamedModel:
    squares = [(r, c) for r in range(8) for c in range(8) if (r + c) % 2 == 0]
    return NamedModel(
        "bishop",
        "bishop moving uniformly on the 32 squares of its color",
        _board(_bishop, squares),
        (Oracle("recurrence time of a corner", 40, lambda P: _recurrence(P, 0), "degree sum 280 over corner degree 7"),),
    )


FLEA_EDGES = [
    ("00", "10"), ("00", "11"),
    ("10", "20"), ("10", "21"), ("10", "11"),
    ("11", "21"), ("11", "22"),
    ("20", "30"), ("20", "31"), ("20", "21"),
    ("21", "31"), ("21", "32"), ("21", "22"),
    ("22", "32"), ("22", "33"),
    ("30", "40"), ("30", "41"), ("30", "31"),
    ("31", "41"), ("31", "42"), ("31", "32"),
    ("32", "42"), ("32", "43"), ("32", "33"),
    ("33", "43"), ("33", "44"),
    ("40", "41"), ("41", "42"), ("42", "43"), ("43", "44"),
]


def flea() -> NamedModel:
    order = [f"{r}{c}" for r in range(5) for c in range(r + 1)]
    adj = {v: [] for v in order}
    for a, b in FLEA_EDGES:
        adj[a].append(b)
        adj[b].append(a)
    P = graph_walk(adj, order)
    corner = order.index("40")
    return NamedModel(
        "flea",
        "walk on a triangular lattice of 15 nodes (rows of 1..5)",
        P,
        (Oracle("recurrence time of the bottom-left corner", 30, lambda P: _recurrence(P, corner), "degree sum 60 over corner degree 2"),),
    )


# ---------------------------------------------------------------------------
# continuous-time models


def _jpi(L):
    return list(jump.stationary_jump(L).probs)


def jump4() -> NamedModel:
    L = jump.validate_generator([[-2, 1, 1, 0], [2, -5, 1, 2], [2, 0, -3, 1], [0, 0, 1, -1]])
    return NamedModel(
        "jump4",
        "4-state jump process",
        L,
        (
            Oracle("pi", [F(5, 16), F(1, 16), F(4, 16), F(6, 16)], _jpi, "solution of pi L = 0"),
            Oracle("reversible", False, lambda L: jump.detailed_balance_jump(L).reversible, "q(1,2) > 0 but q(2,1) = 0"),
        ),
    )


def businessman() -> NamedModel:
    L = jump.validate_generator([[-4, 2, 2], [3, -4, 1], [5, 0, -5]], labels=["city1", "city2", "city3"])
    return NamedModel(
        "businessman",
        "traveller moving between three cities",
        L,
        (Oracle("pi", [F(1, 2), F(1, 4), F(1, 4)], _jpi, "solution of pi L = 0"),),
    )


def store() -> NamedModel:
    L = jump.validate_generator([[-1, 0, 1, 0], [2, -3, 0, 1], [0, 2, -2, 0], [0, 0, 2, -2]])
    return NamedModel(
        "store",
        "computer store stock process",
        L,
        (Oracle("pi", [F(2, 5), F(1, 5), F(3, 10), F(1, 10)], _jpi, "solution of pi L = 0"),),
    )


def cycle3(lam=1) -> NamedModel:
    L = jump.generator_from_rates(3, {(0, 1): lam, (1, 2): lam, (2, 0): lam})
    return NamedModel(
        "cycle3",
        "one-way rotation on three states",
        L,
        (
            Oracle("pi", [F(1, 3)] * 3, _jpi, "doubly stochastic rates"),
            Oracle("reversible", False, lambda L: jump.detailed_balance_jump(L).reversible, "every edge is one-way"),
        ),
    )


def star(N: int = 3, lam=1, mu=2) -> NamedModel:
    rates = {}
    for k in range(1, N + 1):
        rates[(0, k)] = lam
        rates[(k, 0)] = mu
    L = jump.generator_from_rates(N + 1, rates)
    z = F(mu) + N * F(lam)
    return NamedModel(
        "star",
        f"hub 0 linked to {N} leaves, out at rate lambda and back at rate mu",
        L,
        (
            Oracle("pi", [F(mu) / z] + [F(lam) / z] * N, _jpi, "(mu, lambda, ..., lambda)/(mu + N lambda)"),
            Oracle("reversible", True, lambda L: jump.detailed_balance_jump(L).reversible, "tree-shaped rate graph"),
        ),
    )


def two_state_jump(lam=1, mu=2) -> NamedModel:
    L = jump.validate_generator([[-lam, lam], [mu, -mu]])

    def closed(t):
        return (mu + lam * math.exp(-(lam + mu) * t)) / (lam + mu)

    return NamedModel(
        "two_state_jump",
        "two-state jump process with rates lambda (0 -> 1) and mu (1 -> 0)",
        L,
        (
            Oracle("pi", [F(mu, lam + mu), F(lam, lam + mu)], _jpi, "(mu, lambda)/(lambda + mu)"),
            Oracle("P_1(0,0)", closed(1.0), lambda L: jump.transition_kernel(L, 1.0)[0, 0], "(mu + lambda e^{-(lambda+mu)t})/(lambda+mu)", 1e-10),
        ),
    )


def pure_death_kernel_closed(N: int, mu: float, t: float) -> np.ndarray:
    """Row N of P_t for the pure-death chain on {0..N}."""
    row = np.zeros(N + 1)
    for j in range(1, N + 1):
        k = N - j
        row[j] = (mu * t) ** k * math.exp(-mu * t) / math.factorial(k)
    row[0] = 1.0 - row[1:].sum()
    return row


def pure_death(N: int = 5, mu=1) -> NamedModel:
    L = jump.generator_from_rates(N + 1, {(n, n - 1): mu for n in range(1, N + 1)})
    return NamedModel(
        "pure_death",
        f"pure death chain from N={N} at rate mu",
        L,
        (
            Oracle(
                "P_1(N, .)",
                pure_death_kernel_closed(N, float(mu), 1.0).tolist(),
                lambda L: jump.transition_kernel(L, 1.0).as_float()[N].tolist(),
                "Poisson-count closed form",
                1e-9,
            ),
        ),
    )


def gas_station() -> NamedModel:
    """Single pump, 20 arrivals/h, mean service 2 min; capacity-2 variant as payload."""
    L = jump.birth_death_generator([20, 20], [30, 30])
    src = "geometric and truncated-geometric stationary laws"
    return NamedModel(
        "gas_station",
        "M/M/1 with lambda=20/h, mu=30/h; payload is the capacity-2 variant",
        L,
        (
            Oracle("pi(n), n<=3", [F(1, 3), F(2, 9), F(4, 27), F(8, 81)], lambda L: [queueing.mm1_pi(20, 30, n) for n in range(4)], src),
            Oracle("W (minutes)", 4, lambda L: queueing.mm1(20, 30).W * 60, src),
            Oracle("sojourn (minutes)", 6, lambda L: queueing.mm1(20, 30).sojourn * 60, src),
            Oracle("P(wait)", F(2, 3), lambda L: queueing.mm1(20, 30).p_wait, src),
            Oracle("capacity-2 pi", [F(9, 19), F(6, 19), F(4, 19)], _jpi, "solution of pi L = 0"),
            Oracle("capacity-2 loss", F(4, 19), lambda L: queueing.mm1n(20, 30, 2).loss, src),
        ),
    )


def fortune_teller() -> NamedModel:
    L = jump.birth_death_generator([4], [6])
    return NamedModel(
        "fortune_teller",
        "M/M/1 with lambda=4/h and mean service 10 min",
        L,
        (Oracle("W (minutes)", 20, lambda L: queueing.mm1(4, 6).W * 60, "lambda / (mu (mu - lambda))"),),
    )


def call_center() -> NamedModel:
    return NamedModel(
        "call_center",
        "M/M/3 with lambda=40/h and mean call 3 min",
        jump.birth_death_generator([40, 40, 40], [20, 40, 60]),
        (
            Oracle("mean busy servers", 2, lambda L: queueing.mms(40, 20, 3).busy_servers, "lambda / mu"),
            Oracle("P(wait)", F(4, 9), lambda L: queueing.mms(40, 20, 3).p_wait, "Erlang C formula"),
        ),
    )


REGISTRY: dict[str, Callable[[], NamedModel]] = {
    "mouse": mouse,
    "coin_game": coin_game,
    "tennis": tennis,
    "bilbo": bilbo,
    "mont_blanc": mont_blanc,
    "regular4": regular4,
    "path4": path4,
    "nonreversible4": nonreversible4,
    "weather": weather,
    "umbrella": umbrella,
    "ehrenfest": ehrenfest,
    "ring": ring_model,
    "knight": knight,
    "king": king,
    "queen": queen,
    "bishop": bishop,
    "flea": flea,
    "jump4": jump4,
    "businessman": businessman,
    "store": store,
    "cycle3": cycle3,
    "star": star,
    "two_state_jump": two_state_jump,
    "pure_death": pure_death,
    "gas_station": gas_station,
    "fortune_teller": fortune_teller,
    "call_center": call_center,
}


def names() -> list[str]:
    return sorted(REGISTRY)


def build(name: str) -> NamedModel:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(names())}") from None
    return factory()


def _matches(expected, got, tol) -> bool:
    if isinstance(expected, (list, tuple)):
        got = list(got)
        return len(expected) == len(got) and all(_matches(e, g, tol) for e, g in zip(expected, got))
    if tol is None:
        return expected == got
    return abs(float(expected) - float(got)) <= tol


def verify(name: str) -> VerifyReport:
    t0 = time.perf_counter()
    model = build(name)
    checks = []
    for o in model.oracles:
        try:
            got = o.compute(model.payload)
            ok = _matches(o.expected, got, o.tol)
            checks.append(OracleCheck(o.quantity, o.expected, got, ok, o.source))
        except Exception as exc:  # a failing oracle is reported, not raised
            checks.append(OracleCheck(o.quantity, o.expected, None, False, o.source, f"{type(exc).__name__}: {exc}"))
    return VerifyReport(name, tuple(checks), time.perf_counter() - t0)
