import itertools
import math
from collections import Counter

import numpy as np
import pytest

from gbs_sim import oracle
from gbs_sim.ensembles import haar_unitary
from gbs_sim.kernels import InvalidState
from gbs_sim.samplers import (
    MixtureSpec,
    SamplerConfig,
    TailMassError,
    approx_sampler,
    pnr_sampler,
    resolve_threads,
    sample_approx_nonneg,
    sample_displaced,
    sample_many,
    sample_mixture,
    sample_pnr,
    sample_rng,
    sample_threshold,
    threshold_sampler,
)
from gbs_sim.state import (
    from_adjacency,
    from_squeezing_and_unitary,
    prob_pnr,
    prob_threshold,
    vacuum,
)


def haar_state(m, seed, t=0.5):
    return from_squeezing_and_unitary(math.atanh(t), haar_unitary(m, np.random.default_rng(seed)))


def empirical(records):
    counts = Counter(r.pattern for r in records)
    n = len(records)
    return {p: c / n for p, c in counts.items()}


def test_config_validation():
    for bad in ({"n_max": 0}, {"halt_total": 0}, {"tail_policy": "drop"}, {"barvinok_M": 0}):
        with pytest.raises(ValueError):
            SamplerConfig(**bad)


def test_vacuum_samples():
    rng = np.random.default_rng(0)
    for fn in (sample_pnr, sample_threshold, sample_displaced, sample_approx_nonneg):
        rec = fn(vacuum(3), rng=rng)
        assert rec.pattern == (0, 0, 0)
        assert rec.eta == pytest.approx(1.0)
        assert rec.epsilon == abs(1 - rec.eta)


def test_record_invariants():
    state = haar_state(3, 1)
    for i in range(20):
        rec = sample_pnr(state, rng=sample_rng(0, i))
        assert rec.epsilon == abs(1 - rec.eta)
        assert list(rec.photons_after_mode) == sorted(rec.photons_after_mode)
        assert rec.photons_after_mode[-1] == rec.N
        assert len(rec.conditionals) == 3


def test_telescoping_product():
    state = haar_state(3, 2, t=0.6)
    for i in range(50):
        rec = sample_pnr(state, rng=sample_rng(1, i))
        product = math.prod(rec.conditionals)
        assert product == pytest.approx(prob_pnr(state, rec.pattern), rel=1e-8)


def test_pnr_distribution_small():
    state = haar_state(2, 3)
    records = sample_many(pnr_sampler(state, SamplerConfig(cache_conditionals=True)), 20_000, seed=5)
    emp = empirical(records)
    exact = {p: prob_pnr(state, p) for p in itertools.product(range(9), repeat=2) if sum(p) <= 6}
    assert oracle.total_variation({k: v for k, v in emp.items() if sum(k) <= 6}, exact) < 0.02


def test_halting():
    state = haar_state(4, 4, t=0.9)
    cfg = SamplerConfig(halt_total=2, n_max=20)
    halted = [sample_pnr(state, cfg, sample_rng(2, i)) for i in range(200)]
    assert any(r.halted for r in halted)
    for r in halted:
        if r.halted:
            assert r.N > 2
            # the run stops before the last mode
            assert r.photons_after_mode[-1] == r.N


def test_tail_policies():
    state = haar_state(1, 5, t=0.9)
    with pytest.raises(TailMassError):
        sample_pnr(state, SamplerConfig(n_max=2, tail_policy="error"), np.random.default_rng(0))
    recs = [sample_pnr(state, SamplerConfig(n_max=2, tail_policy="reject"), sample_rng(0, i)) for i in range(200)]
    assert any(r.halted for r in recs)
    rec = sample_pnr(state, SamplerConfig(n_max=2), np.random.default_rng(0))
    assert rec.epsilon > 1e-3


def test_threshold_single_mode_click_rate():
    state = from_squeezing_and_unitary(math.atanh(0.5), np.eye(1))
    recs = sample_many(threshold_sampler(state, SamplerConfig(cache_conditionals=True)), 20_000, seed=3)
    rate = np.mean([r.pattern[0] for r in recs])
    p = 1 - math.sqrt(0.75)
    assert abs(rate - p) < 3 * math.sqrt(p * (1 - p) / len(recs))


def test_threshold_graph_distribution():
    adj = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    state = from_adjacency(adj, 0.4)
    recs = sample_many(threshold_sampler(state, SamplerConfig(cache_conditionals=True)), 20_000, seed=4)
    exact = {p: prob_threshold(state, p) for p in itertools.product((0, 1), repeat=3)}
    assert oracle.total_variation(empirical(recs), exact) < 0.02


def test_displaced_zero_mean_is_bit_identical():
    state = haar_state(3, 6)
    for i in range(10):
        a = sample_pnr(state, rng=sample_rng(9, i))
        b = sample_displaced(state, rng=sample_rng(9, i))
        assert (a.pattern, a.eta, a.conditionals) == (b.pattern, b.eta, b.conditionals)


def test_pnr_rejects_displaced_and_invalid():
    with pytest.raises(ValueError):
        sample_pnr(vacuum(1).with_mean([0.5]))


def test_mixture_single_component_matches_sampler():
    state = haar_state(2, 7)
    mix = MixtureSpec([(1.0, state)])
    for i in range(10):
        a = sample_mixture(mix, rng=sample_rng(3, i))
        rng = sample_rng(3, i)
        rng.random()  # component draw
        b = sample_pnr(state, rng=rng)
        assert a.pattern == b.pattern


def test_mixture_validation():
    s = vacuum(1)
    with pytest.raises(ValueError):
        MixtureSpec([(0.5, s), (0.4, s)])
    with pytest.raises(ValueError):
        MixtureSpec([(1.5, s), (-0.5, s)])
    with pytest.raises(ValueError):
        MixtureSpec([(0.5, s), (0.5, vacuum(2))])
    assert MixtureSpec([(1.5, s), (-0.5, s)], signed=True).ell == 2


def test_signed_mixture_rejects_negative_marginals():
    a = from_squeezing_and_unitary(0.2, np.eye(1))
    b = from_squeezing_and_unitary(0.8, np.eye(1))
    mix = MixtureSpec([(2.0, a), (-1.0, b)], signed=True)
    # p(0) = 2 p_a(0) - p_b(0) is positive but p(2) goes negative
    with pytest.raises(ValueError):
        for i in range(200):
            sample_mixture(mix, rng=sample_rng(0, i))


def test_approx_gate_and_conditionals():
    with pytest.raises(InvalidState):
        approx_sampler(haar_state(2, 8))
    adj = np.ones((6, 6)) - np.eye(6)
    state = from_adjacency(adj, 0.12)
    cfg = SamplerConfig(barvinok_M=20_000, n_max=4)
    rec = sample_approx_nonneg(state, cfg, np.random.default_rng(1))
    assert len(rec.pattern) == 6
    assert 0 <= rec.epsilon < 0.2


def test_threads_and_env(monkeypatch):
    monkeypatch.setenv("GBS_SIM_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    state = haar_state(3, 9)
    sampler = pnr_sampler(state)
    one = sample_many(sampler, 30, seed=11, threads=1)
    many = sample_many(sampler, 30, seed=11, threads=3)
    assert [(r.pattern, r.eta) for r in one] == [(r.pattern, r.eta) for r in many]
