import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from stochastik import distributions as dist
from stochastik.errors import NonPositiveRate
from stochastik.rng import RngStream

BINOMIAL_ROW = [0.13520, 0.27067, 0.27081, 0.18053, 0.09022, 0.03605]
POISSON_ROW = [0.13534, 0.27067, 0.27067, 0.18045, 0.09022, 0.03609]


def _chi2_pvalue(samples, pmf, kmax=20):
    """Chi-square goodness of fit with the tail above kmax pooled."""
    n = samples.size
    observed = np.bincount(np.minimum(samples, kmax + 1), minlength=kmax + 2)
    probs = np.array([pmf(k) for k in range(kmax + 1)])
    expected = n * np.append(probs, 1 - probs.sum())
    keep = expected > 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    return stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue


def test_exponential_transform():
    assert dist.exponential_from_uniform(0.5, 1.0) == pytest.approx(math.log(2))
    with pytest.raises(NonPositiveRate):
        dist.sample_exponential(0.0, RngStream(1))


def test_exponential_moments_and_memory(stream):
    x = dist.sample_exponential(2.0, stream, 1_000_000)
    assert abs(x.mean() - 0.5) < 0.002
    assert abs(x.var() - 0.25) < 0.01
    y = dist.sample_exponential(1.0, stream, 1_000_000)
    assert abs(np.mean(y[y > 1] > 3) - np.mean(y > 2)) < 0.01


def test_box_muller_degenerate_inputs():
    assert dist.box_muller(0.0, 0.3) == (0.0, 0.0)
    y1, y2 = dist.box_muller(1 - math.exp(-2), 0.0)
    assert y1 == pytest.approx(2.0) and y2 == pytest.approx(0.0)


def test_normal_pair_moments(stream):
    y1, y2 = dist.sample_normal_pair(stream, 1_000_000)
    for y in (y1, y2):
        assert abs(y.mean()) < 0.005 and abs(y.var() - 1) < 0.01
    assert abs(np.mean(y1 * y2)) < 0.005


def test_pmf_table_values():
    for k in range(6):
        assert abs(float(dist.pmf_binomial(2000, F(1, 1000), k)) - BINOMIAL_ROW[k]) < 1e-5
        assert abs(dist.pmf_poisson(2.0, k) - POISSON_ROW[k]) < 1e-5


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 40), st.fractions(0, 1))
def test_binomial_pmf_exact(n, q):
    assert dist.pmf_binomial(n, q, 0) == (1 - q) ** n
    assert sum(dist.pmf_binomial(n, q, k) for k in range(n + 1)) == 1


def test_l1_examples():
    r = dist.l1_binomial_poisson(2000, 0.001)
    assert r.bound == pytest.approx(0.004) and r.distance < 0.004
    assert dist.l1_binomial_poisson(50, 0.0).distance == 0
    r = dist.l1_binomial_poisson(10, 0.3)
    brute = sum(abs(float(dist.pmf_binomial(10, F(3, 10), k)) - dist.pmf_poisson(3.0, k)) for k in range(61))
    assert r.distance <= 1.8
    assert r.distance == pytest.approx(brute, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 300), st.floats(0.0, 1.0))
def test_l1_never_exceeds_bound(n, q):
    r = dist.l1_binomial_poisson(n, q)
    assert r.distance <= r.bound + 1e-12


def test_gamma_pdf():
    assert dist.gamma_pdf(3.0, 1, 0.7) == pytest.approx(3.0 * math.exp(-2.1))
    total, _ = integrate.quad(lambda x: dist.gamma_pdf(2.0, 3, x), 0, np.inf)
    assert abs(total - 1) < 1e-8


def test_gamma_as_sum_of_exponentials(stream):
    s = dist.sample_exponential(2.0, stream, (1_000_000, 3)).sum(axis=1)
    assert abs(s.mean() - 1.5) < 0.005


@pytest.mark.parametrize("lam", [0.7, 4.0, 45.0])
def test_sample_poisson_per_bin(lam, stream):
    n = 200_000
    x = dist.sample_poisson(lam, stream, n)
    lo = max(0, int(lam - 10))
    for k in range(lo, lo + 21):
        p = dist.pmf_poisson(lam, k)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(np.mean(x == k) - p) <= 3 * se, k


def test_poisson_superposition_chi2(stream):
    x = dist.sample_poisson(1.2, stream, 1_000_000) + dist.sample_poisson(0.7, stream, 1_000_000)
    assert _chi2_pvalue(x, lambda k: dist.pmf_poisson(1.9, k)) > 1e-3


def test_determinism():
    a = dist.sample_exponential(1.0, RngStream(9), 10)
    b = dist.sample_exponential(1.0, RngStream(9), 10)
    c = dist.sample_exponential(1.0, RngStream(9, 1), 10)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
