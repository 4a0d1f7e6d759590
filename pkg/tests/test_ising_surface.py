import pytest

from src.ising.lattice import BETA_C, BETA_MAX, Boundary, IsingParams, LatticeSpec, SuffStats
from src.ising.partition import brute_force_log_z
from src.ising.surface import ising_loglik_surface, ising_mle


LATTICE = LatticeSpec(3, 3)
STATS = SuffStats(v0=1, v1=4)


def test_loglik_formula():
    surface = ising_loglik_surface(STATS, LATTICE, "brute")
    expected = 0.2 * 4 - brute_force_log_z(LATTICE, IsingParams(0.0, 0.2))
    assert surface.loglik([0.2]) == pytest.approx(expected, rel=1e-14)


def test_domains():
    assert ising_loglik_surface(STATS, LATTICE, "transfer").domain.upper == (BETA_C,)
    periodic = LatticeSpec(4, 4, Boundary.PERIODIC)
    assert ising_loglik_surface(STATS, periodic, "kaufman").domain.upper == (BETA_MAX,)
    assert ising_loglik_surface(STATS, LATTICE, "brute", alpha=None).dim == 2


def test_mle_matches_expected_statistic():
    result = ising_mle(STATS, LATTICE, "brute")
    assert result.converged
    beta = float(result.theta[0])
    h = 1e-5
    mean_v1 = (
        brute_force_log_z(LATTICE, IsingParams(0.0, beta + h)) - brute_force_log_z(LATTICE, IsingParams(0.0, beta - h))
    ) / (2 * h)
    assert mean_v1 == pytest.approx(4.0, abs=1e-4)


def test_transfer_and_brute_agree():
    brute = ising_mle(STATS, LATTICE, "brute")
    transfer = ising_mle(STATS, LATTICE, "transfer")
    assert transfer.theta[0] == pytest.approx(brute.theta[0], abs=1e-6)


def test_two_parameter_fit():
    result = ising_mle(STATS, LATTICE, "transfer", alpha=None)
    assert result.converged
    assert result.theta[0] > 0.0
    assert 0.0 < result.theta[1] < BETA_C


def test_rda_surface_differs_from_exact():
    exact = ising_mle(STATS, LATTICE, "transfer")
    approx = ising_mle(STATS, LATTICE, "rda(2)")
    assert approx.converged
    assert approx.theta[0] != pytest.approx(exact.theta[0], abs=1e-6)
