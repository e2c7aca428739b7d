import itertools
import math

import numpy as np
import pytest

from gbs_sim import oracle
from gbs_sim.ensembles import haar_unitary
from gbs_sim.samplers import MixtureSpec
from gbs_sim.state import from_squeezing_and_unitary, prob_pnr, prob_threshold, vacuum


def test_vacuum_table():
    table, mass = oracle.fock_distribution(vacuum(2), 3)
    assert table[(0, 0)] == pytest.approx(1.0)
    assert mass == pytest.approx(1.0)


def test_squeezed_vacuum_table():
    state = from_squeezing_and_unitary(math.atanh(0.5), np.eye(1))
    table, mass = oracle.fock_distribution(state, 16)
    assert table[(0,)] == pytest.approx(0.8660, abs=1e-4)
    assert table[(2,)] == pytest.approx(0.1083, abs=1e-4)
    assert mass > 0.9999


def test_closed_forms():
    assert oracle.squeezed_vacuum_probability(3, 0.5) == 0.0
    assert sum(oracle.squeezed_vacuum_probability(n, 0.5) for n in range(200)) == pytest.approx(1.0)
    assert sum(oracle.poisson_probability(n, 0.64) for n in range(40)) == pytest.approx(1.0)


def test_fock_recursion_matches_closed_form():
    psi = oracle.fock_amplitudes(np.array([[0.5]]), cutoff=20)
    for n in range(21):
        assert abs(psi[n]) ** 2 == pytest.approx(oracle.squeezed_vacuum_probability(n, 0.5), abs=1e-14)


def test_fock_recursion_matches_hafnian_formula():
    # the recursion never touches a hafnian, so this is an independent check of prob_pnr
    U = haar_unitary(3, np.random.default_rng(0))
    B = U @ np.diag([0.5, 0.3, 0.1]) @ U.T
    ref = oracle.fock_table(oracle.fock_amplitudes(B, cutoff=6))
    state = from_squeezing_and_unitary(np.arctanh([0.5, 0.3, 0.1]), U)
    for pattern, p in ref.items():
        if sum(pattern) <= 8:
            assert prob_pnr(state, pattern) == pytest.approx(p, abs=1e-12)


def test_fock_amplitudes_errors():
    with pytest.raises(ValueError):
        oracle.fock_amplitudes(np.array([[0.1]]), c=np.array([0.2]))
    with pytest.raises(ValueError):
        oracle.fock_amplitudes(np.array([[0.1]]), normalize="bogus")


def test_threshold_marginalization():
    state = from_squeezing_and_unitary(math.atanh(0.4), haar_unitary(2, np.random.default_rng(1)))
    table, _ = oracle.fock_distribution(state, 16)
    clicks = oracle.threshold_marginals(table)
    for pattern in itertools.product((0, 1), repeat=2):
        assert clicks[pattern] == pytest.approx(prob_threshold(state, pattern), abs=1e-6)


def test_limits_and_wrappers():
    with pytest.raises(ValueError):
        oracle.fock_distribution(vacuum(4), 2)
    A = np.ones((4, 4))
    assert oracle.enumerate_haf(A) == 3
    assert oracle.enumerate_loop_haf(A) == 10


def test_signed_mixture_enumeration():
    a = from_squeezing_and_unitary(0.3, np.eye(1))
    mix = MixtureSpec([(2.0, a), (-1.0, a)], signed=True)
    table = oracle.enumerate_signed_mixture(mix, 6)
    for n in range(7):
        assert table[(n,)] == pytest.approx(prob_pnr(a, [n]))


def test_total_variation():
    assert oracle.total_variation({(0,): 1.0}, {(1,): 1.0}) == 1.0
    assert oracle.total_variation({(0,): 0.5, (1,): 0.5}, {(0,): 0.5, (1,): 0.5}) == 0.0


def test_table_csv_round_trip(tmp_path):
    table = {(0, 1): 0.25, (2, 0): 1 / 3}
    path = tmp_path / "table.csv"
    oracle.write_table_csv(table, path)
    assert oracle.read_table_csv(path) == table
