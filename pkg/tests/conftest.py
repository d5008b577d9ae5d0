"""Shared hypothesis strategies and fixtures."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from stochastik.chain import validate_stochastic
from stochastik.jump import validate_generator
from stochastik.rng import RngStream


@st.composite
def stochastic_rows(draw, n, max_weight=6, positive=False):
    """Row of n exact probabilities built from small integer weights."""
    lo = 1 if positive else 0
    w = draw(st.lists(st.integers(lo, max_weight), min_size=n, max_size=n))
    if not sum(w):
        w[draw(st.integers(0, n - 1))] = 1
    total = sum(w)
    return [Fraction(x, total) for x in w]


@st.composite
def stochastic_matrices(draw, min_n=1, max_n=5, positive=False):
    n = draw(st.integers(min_n, max_n))
    rows = [draw(stochastic_rows(n, positive=positive)) for _ in range(n)]
    return validate_stochastic(rows, "exact")


@st.composite
def irreducible_matrices(draw, min_n=2, max_n=5):
    """Random chain made irreducible by mixing in a cyclic shift."""
    P = draw(stochastic_matrices(min_n, max_n))
    n = P.n
    rows = []
    for i, row in enumerate(P.rows()):
        new = [x / 2 for x in row]
        new[(i + 1) % n] += Fraction(1, 2)
        rows.append(new)
    return validate_stochastic(rows, "exact")


@st.composite
def reversible_matrices(draw, min_n=2, max_n=4):
    """Random walk on a weighted complete graph, which is reversible."""
    n = draw(st.integers(min_n, max_n))
    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            w[i][j] = w[j][i] = draw(st.integers(1, 5))
    rows = [[Fraction(w[i][j], sum(w[i])) for j in range(n)] for i in range(n)]
    return validate_stochastic(rows, "exact")


@st.composite
def float_generators(draw, min_n=2, max_n=5):
    n = draw(st.integers(min_n, max_n))
    rates = draw(st.lists(st.floats(0.05, 3.0), min_size=n * n, max_size=n * n))
    q = np.array(rates).reshape(n, n)
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return validate_generator(q, "float")


def random_generator(rng: np.random.Generator, n: int):
    q = rng.uniform(0.05, 3.0, (n, n))
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return validate_generator(q, "float")


@pytest.fixture
def stream():
    return RngStream(20240601)


# One line per acceptance criterion, filled in by test_acceptance.py and
# printed at the end of the run whatever the capture mode.
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
