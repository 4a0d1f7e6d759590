import math

import numpy as np
import pytest

from src.inference.errors import DomainError
from src.ising.approximation import (
    STABLE_TOL,
    InvalidProxyError,
    StabilityCell,
    contour_stability,
    delta_contour,
    delta_k,
    epsilon_gradient,
    epsilon_k,
    richardson_derivative,
)
from src.ising.lattice import Boundary, IsingParams, LatticeSpec
from src.ising.partition import rda_log_z, transfer_log_z
from src.ising.spectral import a_beta


def test_richardson_derivative():
    assert richardson_derivative(math.sin, 1.0, 1e-3) == pytest.approx(math.cos(1.0), abs=1e-10)


class TestEpsilon:
    def test_full_width_is_zero(self):
        assert epsilon_k(16, 16, 0.3) == 0.0

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_closed_form_matches_transfer(self, k):
        via_transfer = epsilon_k(8, k, 0.2, "transfer", boundary=Boundary.PERIODIC)
        assert epsilon_k(8, k, 0.2) == pytest.approx(via_transfer, abs=1e-8)

    def test_transfer_path_definition(self):
        lattice = LatticeSpec(6, 6)
        params = IsingParams(0.1, 0.3)
        expected = transfer_log_z(lattice, params) - rda_log_z(3, lattice, params)
        assert epsilon_k(6, 3, 0.3, "transfer", alpha=0.1) == pytest.approx(expected, rel=1e-12)

    def test_proxy_path_definition(self):
        lattice = LatticeSpec(8, 8)
        params = IsingParams(0.1, 0.3)
        expected = rda_log_z(6, lattice, params) - rda_log_z(3, lattice, params)
        assert epsilon_k(8, 3, 0.3, "proxy(6)", alpha=0.1) == pytest.approx(expected, rel=1e-12)

    def test_closed_form_restrictions(self):
        with pytest.raises(DomainError):
            epsilon_k(8, 3, 0.3, "kaufman", alpha=0.1)
        with pytest.raises(DomainError):
            epsilon_k(8, 3, 0.3, "kaufman", boundary="free")

    @pytest.mark.parametrize("method", ["proxy(3)", "proxy(9)", "rda(17)"])
    def test_invalid_proxy(self, method):
        with pytest.raises(InvalidProxyError):
            epsilon_k(8, 3, 0.3, method, alpha=0.1)

    def test_strip_width_range(self):
        with pytest.raises(ValueError):
            epsilon_k(8, 1, 0.3)


class TestDelta:
    def test_pinned_field_is_beta_derivative(self):
        grad = epsilon_gradient(12, 4, 0.3)
        assert grad.shape == (1,)
        assert delta_k(12, 4, 0.3) == pytest.approx(abs(grad[0]))

    def test_free_field_uses_both_components(self):
        grad = epsilon_gradient(6, 3, 0.3, "transfer", alpha=0.1)
        assert grad.shape == (2,)
        assert delta_k(6, 3, 0.3, "transfer", alpha=0.1) == pytest.approx(np.abs(grad).sum())

    def test_matches_five_point_stencil(self):
        h = 1e-3
        beta = 0.3
        f = [epsilon_k(12, 4, beta + j * h) for j in (-2, -1, 1, 2)]
        stencil = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * h)
        assert delta_k(12, 4, beta) == pytest.approx(abs(stencil), rel=1e-6)

    def test_decays_at_branch_point_rate(self):
        ks = np.arange(4, 13)
        deltas = [delta_k(64, int(k), 0.3) for k in ks]
        slope, _ = np.polyfit(ks, np.log(deltas), 1)
        assert abs(-slope - a_beta(0.3)) / a_beta(0.3) < 0.25


class TestContour:
    def test_rows_ordered_and_decreasing_in_k(self):
        rows = delta_contour([8, 6], [4, 2, 3], 0.1, 0.3, 5)
        assert [(r.m, r.k) for r in rows] == [(6, 2), (6, 3), (6, 4), (8, 2), (8, 3), (8, 4)]
        for m in (6, 8):
            values = [r.log_scaled_delta for r in rows if r.m == m]
            assert values == sorted(values, reverse=True)

    def test_threads_do_not_change_values(self):
        serial = delta_contour([6], [2, 3], 0.1, 0.3, 5)
        parallel = delta_contour([6], [2, 3], 0.1, 0.3, 5, threads=3)
        assert serial == parallel

    def test_proxy_must_exceed_every_k(self):
        with pytest.raises(InvalidProxyError):
            delta_contour([6], [2, 5], 0.1, 0.3, 5)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            delta_contour([], [2], 0.1, 0.3, 5)

    def test_stability_against_smaller_proxy(self):
        cells = contour_stability([8], [2, 3, 4], 0.1, 0.3, 6)
        assert [c.k for c in cells] == [2, 3, 4]
        assert all(c.proxy_k == 6 and c.beta == 0.3 for c in cells)
        assert cells[-1].abs_diff > cells[0].abs_diff
        assert cells[0].rel_diff == pytest.approx(cells[0].abs_diff / abs(cells[0].log_scaled_delta))
        assert cells[0].truncation_bound == pytest.approx(math.exp(-3 * a_beta(0.3)))

    def test_stable_rule(self):
        far = StabilityCell(60, 3, 12, 0.3, -5.0, -5.008)
        assert far.stable
        assert not StabilityCell(60, 3, 12, 0.3, -5.0, -5.02).stable
        near = StabilityCell(60, 9, 12, 0.3, -1.0, -1.2)
        assert near.truncation_bound == pytest.approx(math.exp(-2 * a_beta(0.3)))
        assert near.stable
        assert not StabilityCell(60, 9, 12, 0.3, -1.0, -1.5).stable

    @pytest.mark.slow
    @pytest.mark.timeout(900)
    def test_wide_proxy_is_stable_on_desk_grid(self):
        cells = contour_stability([20, 60, 120], list(range(2, 10)), 0.1, 0.3, 12, threads=4)
        assert len(cells) == 24
        assert all(c.stable for c in cells), [(c.m, c.k, c.abs_diff) for c in cells if not c.stable]
        assert all(c.abs_diff < STABLE_TOL for c in cells if c.k <= 4)
