import math

import numpy as np
import pytest

from src.inference.errors import DomainError, SizeCapError
from src.ising.lattice import Boundary, IsingParams, LatticeSpec, suff_stats
from src.ising.partition import (
    ZKind,
    ZMethod,
    brute_force_log_z,
    clear_caches,
    rda_log_z,
    sample_configuration,
    stat_histogram,
    transfer_log_z,
)


SHAPES = [(1, 4), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (4, 5)]


class TestBruteForce:
    def test_independent_spins(self):
        lattice = LatticeSpec(3, 3)
        assert brute_force_log_z(lattice, IsingParams(0.0, 0.0)) == pytest.approx(9 * math.log(2.0), rel=1e-14)
        expected = 9 * math.log(2.0 * math.cosh(0.7))
        assert brute_force_log_z(lattice, IsingParams(0.7, 0.0)) == pytest.approx(expected, rel=1e-13)

    def test_histogram_counts_every_configuration(self):
        _, _, log_counts = stat_histogram(LatticeSpec(3, 3, Boundary.PERIODIC))
        assert np.exp(log_counts).sum() == pytest.approx(2**9)

    def test_size_cap(self):
        with pytest.raises(SizeCapError) as exc:
            brute_force_log_z(LatticeSpec(5, 5), IsingParams(0.0, 0.1))
        assert exc.value.cap == 24


class TestTransfer:
    @pytest.mark.parametrize("shape", SHAPES)
    @pytest.mark.parametrize("boundary", list(Boundary))
    @pytest.mark.parametrize(("alpha", "beta"), [(0.0, 0.2), (0.1, 0.43), (-0.3, 0.05)])
    def test_matches_brute_force(self, shape, boundary, alpha, beta):
        lattice = LatticeSpec(*shape, boundary)
        params = IsingParams(alpha, beta)
        assert transfer_log_z(lattice, params) == pytest.approx(brute_force_log_z(lattice, params), rel=1e-10)

    @pytest.mark.parametrize("boundary", list(Boundary))
    @pytest.mark.parametrize("alpha", [0.05, 0.2, 0.7])
    def test_field_sign_symmetry(self, boundary, alpha):
        lattice = LatticeSpec(5, 6, boundary)
        plus = transfer_log_z(lattice, IsingParams(alpha, 0.3))
        minus = transfer_log_z(lattice, IsingParams(-alpha, 0.3))
        assert plus == pytest.approx(minus, rel=1e-12)
        small = LatticeSpec(3, 4, boundary)
        assert brute_force_log_z(small, IsingParams(alpha, 0.3)) == pytest.approx(
            brute_force_log_z(small, IsingParams(-alpha, 0.3)), rel=1e-12
        )

    def test_transposed_lattice(self):
        params = IsingParams(0.1, 0.3)
        for boundary in Boundary:
            a = transfer_log_z(LatticeSpec(3, 5, boundary), params)
            b = transfer_log_z(LatticeSpec(5, 3, boundary), params)
            assert a == pytest.approx(b, rel=1e-12)

    def test_free_chain(self):
        beta = 0.35
        expected = math.log(2.0) + 5 * math.log(2.0 * math.cosh(beta))
        assert transfer_log_z(LatticeSpec(1, 6), IsingParams(0.0, beta)) == pytest.approx(expected, rel=1e-13)

    def test_ring_with_self_loops(self):
        beta = 0.35
        ring = (2.0 * math.cosh(beta)) ** 5 + (2.0 * math.sinh(beta)) ** 5
        expected = 5 * beta + math.log(ring)
        assert transfer_log_z(LatticeSpec(1, 5, Boundary.PERIODIC), IsingParams(0.0, beta)) == pytest.approx(
            expected, rel=1e-13
        )

    def test_large_lattice_is_finite(self):
        clear_caches()
        value = transfer_log_z(LatticeSpec(12, 40), IsingParams(0.1, 0.43))
        assert math.isfinite(value)
        assert value > 480 * math.log(2.0)

    def test_width_cap(self):
        with pytest.raises(SizeCapError):
            transfer_log_z(LatticeSpec(17, 17), IsingParams(0.0, 0.1))


class TestRDA:
    def test_full_width_is_exact(self):
        lattice = LatticeSpec(5, 5)
        params = IsingParams(0.1, 0.3)
        assert rda_log_z(5, lattice, params) == pytest.approx(transfer_log_z(lattice, params), rel=1e-12)

    def test_strip_combination(self):
        lattice = LatticeSpec(6, 4)
        params = IsingParams(0.0, 0.25)
        expected = 4 * transfer_log_z(LatticeSpec(3, 4), params) - 3 * transfer_log_z(LatticeSpec(2, 4), params)
        assert rda_log_z(3, lattice, params) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("size", [4, 6])
    def test_error_decreases_with_width(self, size):
        lattice = LatticeSpec(size, size)
        params = IsingParams(0.1, 0.3)
        exact = transfer_log_z(lattice, params)
        errors = [abs(exact - rda_log_z(k, lattice, params)) for k in range(2, size)]
        assert all(a > b for a, b in zip(errors, errors[1:], strict=False))

    def test_six_by_six_width_five_within_half_percent(self):
        lattice = LatticeSpec(6, 6)
        params = IsingParams(0.1, 0.3)
        assert rda_log_z(5, lattice, params) == pytest.approx(transfer_log_z(lattice, params), rel=5e-3)

    def test_width_range(self):
        with pytest.raises(ValueError):
            rda_log_z(1, LatticeSpec(4, 4), IsingParams(0.0, 0.2))
        with pytest.raises(ValueError):
            rda_log_z(5, LatticeSpec(4, 4), IsingParams(0.0, 0.2))

    def test_width_cap(self):
        with pytest.raises(SizeCapError):
            rda_log_z(17, LatticeSpec(20, 20), IsingParams(0.0, 0.2))


class TestZMethod:
    @pytest.mark.parametrize(
        ("text", "kind", "k"),
        [
            ("brute", ZKind.BRUTE, None),
            ("Transfer", ZKind.TRANSFER, None),
            ("rda(5)", ZKind.RDA, 5),
            (" proxy( 12 ) ", ZKind.PROXY, 12),
        ],
    )
    def test_parse(self, text, kind, k):
        method = ZMethod.parse(text)
        assert (method.kind, method.k) == (kind, k)
        assert ZMethod.parse(str(method)) == method

    @pytest.mark.parametrize("text", ["rda", "brute(3)", "simpson", "rda(1)", "rda(x)"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            ZMethod.parse(text)

    def test_dispatch(self):
        lattice = LatticeSpec(4, 4, Boundary.PERIODIC)
        params = IsingParams(0.0, 0.3)
        exact = brute_force_log_z(lattice, params)
        for text in ("brute", "transfer", "kaufman", "rda(4)"):
            assert ZMethod.parse(text).log_z(lattice, params) == pytest.approx(exact, rel=1e-8)

    def test_closed_form_needs_periodic_zero_field(self):
        with pytest.raises(DomainError):
            ZMethod.parse("kaufman").log_z(LatticeSpec(4, 4), IsingParams(0.0, 0.3))
        with pytest.raises(DomainError):
            ZMethod.parse("kaufman").log_z(LatticeSpec(4, 4, Boundary.PERIODIC), IsingParams(0.1, 0.3))


class TestSampling:
    def test_deterministic(self):
        lattice = LatticeSpec(3, 3)
        params = IsingParams(0.1, 0.3)
        assert sample_configuration(lattice, params, seed=4) == sample_configuration(lattice, params, seed=4)

    def test_strong_field_aligns_spins(self):
        config = sample_configuration(LatticeSpec(3, 3), IsingParams(6.0, 0.0), seed=1)
        assert config.spins == [1] * 9

    def test_mean_magnetization(self):
        lattice = LatticeSpec(2, 2)
        params = IsingParams(0.3, 0.2)
        h = 1e-5
        up = brute_force_log_z(lattice, IsingParams(0.3 + h, 0.2))
        down = brute_force_log_z(lattice, IsingParams(0.3 - h, 0.2))
        expected = (up - down) / (2 * h)
        draws = [suff_stats(sample_configuration(lattice, params, seed=s), lattice).v0 for s in range(3000)]
        assert np.mean(draws) == pytest.approx(expected, abs=0.15)

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            sample_configuration(LatticeSpec(5, 5), IsingParams(0.0, 0.1), seed=0)
