import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochastik import random_walk as rw

TABLE = {2: F(1, 2), 4: F(1, 8), 6: F(1, 16), 8: F(5, 128), 10: F(7, 256), 12: F(21, 1024), 14: F(33, 2048)}


def test_position_law_examples():
    assert rw.position_law_1d(2)[0] == F(1, 2)
    assert rw.position_law_1d(0)[0] == 1
    assert rw.position_law_1d(4)[0] == F(3, 8)
    assert rw.position_law_1d(4)[1] == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 60))
def test_position_law_sums_to_one(n):
    law = rw.position_law_1d(n)
    assert law.total() == 1
    assert all(k % 2 == n % 2 for k in law.law)


def test_return_time_table():
    for n, p in TABLE.items():
        assert rw.return_time_law(n) == p
    assert rw.return_time_law(3) == 0
    assert rw.return_time_table(14).law == TABLE


def test_first_passage_examples():
    assert rw.first_passage_law(1, 1) == F(1, 2)
    assert rw.first_passage_law(2, 2) == F(1, 4)
    assert rw.first_passage_law(1, 3) == F(1, 8)
    assert rw.first_passage_law(-1, 3) == F(1, 8)
    assert rw.first_passage_law(2, 3) == 0


def _first_passage_brute(i, n):
    hits = 0
    for steps in itertools.product((1, -1), repeat=n):
        pos = list(itertools.accumulate(steps))
        if pos[-1] == i and i not in pos[:-1]:
            hits += 1
    return F(hits, 2**n)


@pytest.mark.parametrize("i,n", [(1, 5), (2, 6), (-3, 7), (1, 9)])
def test_first_passage_brute_force(i, n):
    assert rw.first_passage_law(i, n) == _first_passage_brute(i, n)


def test_origin_return_examples():
    assert rw.origin_return_probability(1, 2) == F(1, 4)
    assert rw.origin_return_probability(2, 1) == F(3, 8)
    assert rw.origin_return_probability(1, 3) == F(1, 6)
    assert rw.origin_return_probability(0, 3) == 1


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_closed_form_matches_convolution(m, d):
    assert rw.origin_return_probability(m, d) == rw.origin_return_probability_dp(m, d)


def test_d3_small_m_by_enumeration():
    moves = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    back = sum(1 for path in itertools.product(moves, repeat=4) if tuple(map(sum, zip(*path))) == (0, 0, 0))
    assert rw.origin_return_probability(2, 3) == F(back, 6**4)


@pytest.mark.parametrize("d,M,expected,verdict", [(1, 2000, -0.5, "recurrent"), (2, 2000, -1.0, "recurrent"), (3, 300, -1.5, "transient")])
def test_recurrence_diagnostic(d, M, expected, verdict):
    rep = rw.recurrence_diagnostic(d, M)
    assert abs(rep.exponent - expected) < 0.05
    assert rep.verdict == verdict
    assert len(rep.partial_sums) == M


@pytest.mark.parametrize("n", [2, 4, 8, 12, 16])
def test_reflection_principle(n):
    a, b = rw.reflection_counts(n)
    assert a == b


def test_return_law_mass_approaches_one():
    total = sum(float(rw.return_time_law(n)) for n in range(2, 10_001, 2))
    assert abs(total - 1) < 1e-2


def test_simulated_return_times(stream):
    walks = 1_000_000
    tau = rw.simulate_return_times(walks, 14, stream)
    for n, p in TABLE.items():
        freq = np.mean(tau == n)
        se = math.sqrt(float(p) * (1 - float(p)) / walks)
        assert abs(freq - float(p)) < 3 * se, n


def test_simulate_walk_shape(stream):
    path = rw.simulate_walk(3, 100, stream)
    assert path.shape == (101, 3)
    assert np.all(np.abs(np.diff(path, axis=0)).sum(axis=1) == 1)
