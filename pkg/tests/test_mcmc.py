import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochastik import mcmc
from stochastik.errors import BadDistanceMatrix, BadSite, DomainError, EmptyProposalSet, UniformConfig
from stochastik.rng import RngStream
from stochastik.stationary import second_eigenvalue_modulus, stationary_distribution
from stochastik.chain import validate_stochastic


def test_acceptance_rules():
    assert mcmc.acceptance_probability(5.0, 0.0) == 1.0
    assert mcmc.acceptance_probability(8.0, 0.25) == pytest.approx(math.exp(-2), abs=1e-15)
    assert mcmc.acceptance_probability(-3.0, 2.0) == 1.0
    assert mcmc.acceptance_probability(1.0, 1.0, "heatbath") == pytest.approx(1 / (1 + math.e))


def test_empty_proposal_set():
    class Lonely(mcmc.EnergyModel):
        def energy(self, s):
            return 0.0

        def moves(self, s):
            return []

    with pytest.raises(EmptyProposalSet):
        mcmc.metropolis_step(0, Lonely(), 1.0, rng=RngStream(1))


def test_two_state_occupation(stream):
    model = mcmc.FiniteEnergyModel([0.0, 1.0])
    path = mcmc.run_metropolis(model, 0, 1.0, 1_000_000, stream, observable=lambda s: s)
    expected = math.exp(-1) / (1 + math.exp(-1))
    assert abs(path.mean() - expected) < 0.005


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6), st.floats(0, 3), st.sampled_from(mcmc.RULES))
def test_detailed_balance_ratio(energies, beta, rule):
    model = mcmc.FiniteEnergyModel(energies)
    P = mcmc.metropolis_kernel(model, beta, rule)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    n = len(energies)
    for i in range(n):
        for j in range(n):
            if i != j:
                dh = energies[j] - energies[i]
                assert P[i, j] == pytest.approx(P[j, i] * math.exp(-beta * dh), rel=1e-12, abs=1e-300)


def test_ising_delta_h_examples():
    cfg = mcmc.IsingConfig.uniform((4, 4), 1)
    assert mcmc.ising_delta_h(cfg, (1, 1)) == 8
    assert mcmc.ising_delta_h(mcmc.IsingConfig.uniform((2, 2), 1), (0, 0)) == 4
    with pytest.raises(BadSite):
        mcmc.ising_delta_h(cfg, (4, 0))


def test_ising_delta_h_matches_energy_difference(stream):
    gen = stream.generator
    for _ in range(1000):
        shape = tuple(gen.integers(1, 6, size=gen.integers(1, 4)))
        h = float(gen.integers(-2, 3))
        cfg = mcmc.IsingConfig.random(shape, gen, h=h, periodic=bool(gen.integers(0, 2)))
        k = int(gen.integers(0, cfg.size))
        flipped = cfg.copy()
        flipped.flat()[k] *= -1
        assert mcmc.ising_delta_h(cfg, k) == flipped.energy() - cfg.energy()


def test_energy_model_invariants():
    model = mcmc.IsingModel((2, 3), h=0.5)
    for state in itertools.product((-1, 1), repeat=6):
        for m in model.moves(state):
            assert model.apply(model.apply(state, m), m) == state  # symmetric proposals
            assert model.delta_energy(state, m) == pytest.approx(model.energy(model.apply(state, m)) - model.energy(state), abs=1e-9)


def test_magnetization_range(stream):
    cfg = mcmc.IsingConfig.random((5, 5), stream)
    assert -1 <= cfg.magnetization() <= 1


def test_schedule():
    s = mcmc.AnnealSchedule(0.1, 1.001, 100)
    b = s.beta(np.arange(100))
    assert np.all(np.diff(b) > 0) and b[0] == 0.1
    with pytest.raises(DomainError):
        mcmc.AnnealSchedule(0.1, 1.0, 10)


def test_glauber_infinite_temperature_abs_magnetization(stream):
    res = mcmc.glauber_chain(mcmc.IsingConfig.uniform((4, 4), 1, beta=0.0), 1_000_000, stream)
    exact = sum(math.comb(16, b) * abs(2 * b - 16) for b in range(17)) / 2**16 / 16
    assert abs(np.mean(np.abs(res.magnetization[1000:])) - exact) < 0.01


def test_glauber_field_flip(stream):
    cfg = mcmc.IsingConfig.uniform((32, 32), -1, h=1.0, beta=0.6)
    res = mcmc.glauber_chain(cfg, 1_000_000, stream, record_every=1000)
    assert res.magnetization[-1] > 0.9


def test_glauber_frozen_at_low_temperature(stream):
    stays = 0
    for i in range(200):
        cfg = mcmc.IsingConfig.uniform((4, 4), 1, beta=50.0)
        stays += mcmc.glauber_chain(cfg, 1, stream.substream(i)).final_total_spin == 16
    assert stays / 200 >= 0.99


def test_glauber_incremental_total(stream):
    cfg = mcmc.IsingConfig.random((6, 6), stream, h=0.3, beta=0.4)
    for _ in range(10):
        res = mcmc.glauber_chain(cfg, 10_000, stream)
        assert res.final_total_spin == res.final.total_spin()
        assert res.magnetization[-1] == res.final.magnetization()
        cfg = res.final


def test_glauber_small_lattice_gibbs(stream):
    beta, h = 0.5, 0.3
    res = mcmc.glauber_chain(mcmc.IsingConfig.uniform((2, 2), 1, h=h, beta=beta), 2_000_000, stream)
    occ = res.occupation / res.occupation.sum()
    assert np.abs(occ - mcmc.gibbs_measure((2, 2), h, beta)).sum() < 0.02


def test_kawasaki_examples(stream):
    cfg = mcmc.IsingConfig((2,), np.array([1, -1]), beta=0.0)
    out = mcmc.kawasaki_step(cfg, stream)
    assert list(out.flat()) == [-1, 1]
    with pytest.raises(UniformConfig):
        mcmc.kawasaki_step(mcmc.IsingConfig.uniform((3, 3), 1), stream)


def test_kawasaki_conserves_total_spin(stream):
    cfg = mcmc.IsingConfig.random((6, 6), stream, h=0.7, beta=0.8)
    final, totals = mcmc.kawasaki_chain(cfg, 100_000, stream)
    assert np.all(totals == cfg.total_spin())


def test_kawasaki_delta_matches_energy(stream):
    gen = stream.generator
    for _ in range(300):
        cfg = mcmc.IsingConfig.random((3, 4), gen, h=float(gen.normal()))
        s = cfg.flat()
        plus, minus = np.flatnonzero(s > 0), np.flatnonzero(s < 0)
        if not plus.size or not minus.size:
            continue
        i, j = int(gen.choice(plus)), int(gen.choice(minus))
        swapped = cfg.copy()
        swapped.flat()[[i, j]] = swapped.flat()[[j, i]]
        assert mcmc.kawasaki_delta_h(cfg, i, j) == pytest.approx(swapped.energy() - cfg.energy(), abs=1e-9)


def test_mean_estimator_constant(stream):
    est = mcmc.mcmc_mean_estimator(mcmc.FiniteEnergyModel([0, 1, 2]), lambda s: 3.5, 100, 0, stream, 1.0, 0)
    assert est.estimate == 3.5


def test_sample_size_planner():
    beta = 1.0
    model = mcmc.FiniteEnergyModel([0.0, 1.0])
    P = validate_stochastic(mcmc.metropolis_kernel(model, beta), "float")
    lam0 = second_eigenvalue_modulus(P, stationary_distribution(P))
    p1 = math.exp(-1) / (1 + math.exp(-1))
    assert lam0 == pytest.approx(abs(1 - 1 - math.exp(-1)), abs=1e-9)
    var_y = p1 * (1 - p1)
    expected = var_y / (0.01**2 * 0.05) * (1 + lam0) / (1 - lam0)
    assert mcmc.sample_size_bound(var_y, 0.01, 0.05, lam0) == pytest.approx(expected, rel=1e-12)


def test_ehrenfest_mean_estimate(stream):
    est = mcmc.mcmc_mean_estimator(mcmc.HypercubeModel(4), sum, 1_000_000, 0, stream, 1.0, (0, 0, 0, 0))
    assert abs(est.estimate - 2) < 0.02


def test_distance_validation():
    with pytest.raises(BadDistanceMatrix):
        mcmc.validate_distances([[0, 1], [2, 0]])
    with pytest.raises(BadDistanceMatrix):
        mcmc.validate_distances([[1, 1], [1, 0]])


def test_three_cities(stream):
    d = mcmc.distances_from_coords([[0, 0], [3, 0], [0, 4]])
    res = mcmc.simulated_annealing_tsp(d, mcmc.AnnealSchedule(0.1, 1.001, 1000), stream)
    assert res.length == pytest.approx(12.0)


@pytest.mark.parametrize("moves", ["transposition", "2opt"])
def test_unit_square(moves, stream):
    d = mcmc.distances_from_coords([[0, 0], [1, 1], [1, 0], [0, 1]])
    hits = 0
    for i in range(100):
        res = mcmc.simulated_annealing_tsp(d, mcmc.AnnealSchedule(0.1, 1.001, 100_000), stream.substream(i), moves=moves)
        hits += abs(res.length - 4.0) < 1e-9
        assert res.tour[0] == 0 and sorted(res.tour) == [0, 1, 2, 3]
    assert hits >= 95


def test_anneal_kernel_tracks_length(stream):
    gen = stream.generator
    d = mcmc.distances_from_coords(gen.random((9, 2)))
    tour = np.arange(9, dtype=np.int64)
    sched = mcmc.AnnealSchedule(0.5, 1.0005, 5000)
    for two_opt in (False, True):
        u = gen.random((3, sched.steps))
        best_tour, best, cur = mcmc._anneal_kernel(d, tour, sched.beta0, sched.K, u[0], u[1], u[2], two_opt)
        assert cur == pytest.approx(mcmc.tour_length(d, tour), abs=1e-9)
        assert best == pytest.approx(mcmc.tour_length(d, best_tour), abs=1e-9)
        assert best <= cur + 1e-12


def test_brute_force_tsp():
    d = mcmc.distances_from_coords([[0, 0], [2, 0], [2, 1], [0, 1], [1, 3]])
    tour, length = mcmc.brute_force_tsp(d)
    best = min(mcmc.tour_length(d, (0,) + p) for p in itertools.permutations(range(1, 5)))
    assert length == pytest.approx(best)
