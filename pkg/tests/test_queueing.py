import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochastik import queueing as qm
from stochastik.distributions import pmf_poisson
from stochastik.errors import CapTooSmall, DivergentNormalizer, DomainError, InsufficientData, StabilityError, UsageError
from stochastik.rng import RngStream


def test_mm1_gas_station():
    m = qm.mm1(20, 30)
    assert [qm.mm1_pi(20, 30, n) for n in range(4)] == [F(1, 3), F(2, 9), F(4, 27), F(8, 81)]
    assert m.W * 60 == 4 and m.sojourn * 60 == 6 and m.p_wait == F(2, 3)
    assert m.utilization == F(2, 3) and m.L == 2


def test_mm1_light_traffic():
    m = qm.mm1(F(1, 10**9), 1)
    assert m.L < 1e-8 and m.W < 1e-8
    assert qm.mm1(4, 6).W == F(1, 3)


def test_mm1_unstable():
    with pytest.raises(StabilityError):
        qm.mm1(3, 2)


def test_mm1_wait_tail():
    lam, mu = 1.0, 2.0
    assert qm.mm1_wait_tail(lam, mu, 0.0) == pytest.approx(0.5)
    assert qm.mm1_wait_tail(lam, mu, 1.3) == pytest.approx(0.5 * math.exp(-1.3))


def test_mm1n_examples():
    m = qm.mm1n(20, 30, 2)
    assert list(m.pi) == [F(9, 19), F(6, 19), F(4, 19)]
    assert m.loss == F(4, 19)
    assert m.throughput == 20 * F(15, 19)
    assert m.L == m.throughput * m.sojourn and m.Lq == m.throughput * m.W
    assert m.backlog_at_arrival * 60 == F(28, 19)
    assert list(qm.mm1n(5, 5, 2).pi) == [F(1, 3)] * 3


def test_mm1n_converges_to_mm1():
    base = qm.mm1(1.0, 2.0, "float")
    prev = math.inf
    for N in (5, 20, 50, 200):
        m = qm.mm1n(1.0, 2.0, N, "float")
        tv = sum(abs(m.pi[n] - 0.5 * 0.5**n) for n in range(N + 1)) + 0.5**(N + 1)
        assert tv <= prev
        prev = tv
    assert prev < 1e-12
    assert abs(m.L - base.L) < 1e-12


def test_mms_call_center():
    m = qm.mms(40, 20, 3)
    assert m.busy_servers == 2
    assert m.p_wait == F(4, 9)


def test_mms_single_server_is_mm1():
    a, b = qm.mms(F(3), F(5), 1), qm.mm1(F(3), F(5))
    assert (a.L, a.Lq, a.W, a.sojourn, a.p_wait) == (b.L, b.Lq, b.W, b.sojourn, b.p_wait)
    assert a.pi[:20] == b.pi[:20]


def test_two_slow_servers_against_one_fast():
    lam, mu = F(1), F(1)
    two, one = qm.mms(lam, mu, 2), qm.mm1(lam, 2 * mu)
    rho = lam / (2 * mu)
    # P(at least one server busy) against P(the single server is busy)
    assert 1 - two.pi[0] == 2 * rho / (1 + rho)
    assert 1 - one.pi[0] == rho
    assert one.sojourn < two.sojourn


def test_mms_unstable():
    with pytest.raises(StabilityError):
        qm.mms(4, 1, 4)


def test_mm_infinity():
    m = qm.mm_infinity(2.0, 2.0)
    assert m.pi[0] == pytest.approx(math.exp(-1))
    assert m.L == 1 and m.W == 0
    for a in (0.5, 3.0, 10.0):
        # the reported law is cut at tail mass 1e-12; the law itself is
        # negligible beyond 60 customers
        m = qm.mm_infinity(a, 1.0)
        assert 1 - 1e-12 <= math.fsum(m.pi)
        assert 1 - math.fsum(pmf_poisson(a, k) for k in range(61)) < 1e-15


@pytest.mark.parametrize("model", [lambda: qm.mm1(1, 3), lambda: qm.mm1n(2, 3, 7), lambda: qm.mms(5, 2, 4), lambda: qm.mm_infinity(4.0, 1.0)])
def test_metrics_consistency(model):
    m = model()
    total = sum(m.pi)
    assert 1 - 1e-12 <= total <= 1 + 1e-15
    mean = sum(n * p for n, p in enumerate(m.pi))
    assert abs(float(m.L - mean)) < 1e-10
    assert abs(float(m.L - m.throughput * m.sojourn)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(1, 5))
def test_mms_little(a, b, s):
    lam, mu = F(a), F(b)
    if lam >= s * mu:
        with pytest.raises(StabilityError):
            qm.mms(lam, mu, s)
        return
    m = qm.mms(lam, mu, s)
    assert m.busy_servers == lam / mu
    assert m.L == m.Lq + lam / mu
    assert m.Lq == lam * m.W


def test_mer1_examples():
    pi = qm.mer1_stationary(1, 3, 2, 200)
    assert abs(pi.sum() - 1) < 1e-12
    alt = qm.mer1_stationary(1, 3, 2, 260)
    assert np.max(np.abs(pi - alt[:201])) < 1e-9
    geo = qm.mer1_stationary(1, 2, 1, 120)
    assert np.max(np.abs(geo[:20] - [0.5 * 0.5**n for n in range(20)])) < 1e-12
    with pytest.raises(DivergentNormalizer):
        qm.mer1_generator(2, 2, 2, 50)
    with pytest.raises(CapTooSmall):
        qm.mer1_generator(1, 3, 2, 1)


def test_mer1_matches_pollaczek_khinchine():
    lam, mu, r = 1.0, 4.0, 2
    law = qm.mer1_queue_length_law(qm.mer1_stationary(lam, mu, r, 300), r)
    L = float(np.arange(law.size) @ law)
    es, es2 = r / mu, r * (r + 1) / mu**2
    rho = lam * es
    assert abs(L - (rho + lam**2 * es2 / (2 * (1 - rho)))) < 1e-9


def test_law_parsing():
    assert qm.Law.parse("gamma:4,2").mean == 0.5
    with pytest.raises(UsageError):
        qm.Law.parse("weibull:1")
    with pytest.raises(UsageError):
        qm.Law.parse("exp:x")
    with pytest.raises(DomainError):
        qm.Law.parse("det:0")


def test_mm1_simulation_metrics(stream):
    r = qm.simulate_gg1("exp:1", "exp:2", 1e6, stream)
    assert abs(r.L - 1) < 0.02 and abs(r.W - 0.5) < 0.01
    assert r.little_residual < 0.02 and r.little_residual_queue < 0.02
    assert abs(r.busy_fraction - 0.5) < 0.005
    assert qm.pasta_distance(r) < 0.02


def test_dd1_schedule(stream):
    r = qm.simulate_gg1("det:2", "det:1", 1000.0, stream)
    assert np.all(r.service_start == r.arrivals)
    assert r.W == 0 and abs(r.busy_fraction - 0.5) < 1e-9


@pytest.mark.parametrize("service,mean", [("exp:2", 1.0), ("det:0.5", 1.0)])
def test_busy_period_mean(service, mean, stream):
    r = qm.simulate_gg1("exp:1", service, 1e6, stream)
    assert abs(r.busy_periods.mean() - mean) / mean < 0.03


def test_burke(stream):
    mm1 = qm.simulate_queue("exp:1", "exp:2", 2e5, stream)
    assert qm.burke_departure_test(mm1, 1.0).passed
    mm2 = qm.simulate_queue("exp:1.5", "exp:1", 2e5, stream, servers=2)
    assert qm.burke_departure_test(mm2, 1.5).passed
    md1 = qm.simulate_queue("exp:1", "det:0.5", 2e5, stream)
    assert not qm.burke_departure_test(md1, 1.0).passed
    short = qm.simulate_queue("exp:1", "exp:2", 1000.0, stream)
    with pytest.raises(InsufficientData):
        qm.burke_departure_test(short, 1.0)


def test_multi_server_simulation(stream):
    r = qm.simulate_queue("exp:40", "exp:20", 5e4, stream, servers=3)
    m = qm.mms(40.0, 20.0, 3, "float")
    assert abs(r.busy_fraction * 3 - 2) < 0.03
    assert abs(r.Lq - m.Lq) / m.Lq < 0.05


def test_simulation_is_deterministic():
    a = qm.simulate_queue("exp:1", "gamma:4,2", 1e4, RngStream(3))
    b = qm.simulate_queue("exp:1", "gamma:4,2", 1e4, RngStream(3))
    assert np.array_equal(a.departures, b.departures) and a.L == b.L
