import math

import numpy as np
import pytest

from src.inference.errors import IntervalError
from src.inference.optimize import (
    ConfidenceInterval,
    chi2_quantile,
    interior_project,
    lr_confidence_interval,
    maximize,
)
from src.inference.surface import Box, DerivativeMode, surface_from_function
from src.twolevel.likelihood import Method, dataset_surface
from src.twolevel.simulate import simulate_two_level


def poisson_surface(total=37.0, n=10.0):
    return surface_from_function(lambda lam: total * math.log(lam) - n * lam, 0.0, math.inf, name="poisson")


class TestMaximize:
    def test_quadratic_1d(self, quadratic_1d):
        result = maximize(quadratic_1d, [-20.0])
        assert result.converged
        assert result.theta[0] == pytest.approx(1.5, abs=1e-6)

    def test_quadratic_2d(self, quadratic_2d):
        result = maximize(quadratic_2d, [5.0, 5.0])
        assert result.converged
        np.testing.assert_allclose(result.theta, [0.3, -0.7], atol=1e-6)

    def test_poisson_rate(self):
        result = maximize(poisson_surface(), [0.1])
        assert result.converged
        assert result.theta[0] == pytest.approx(3.7, rel=1e-7)
        assert result.bundle.obs_info[0, 0] == pytest.approx(10.0 / 3.7, rel=1e-4)

    def test_maximum_on_boundary_is_clipped(self, make_gaussian):
        surface = make_gaussian([-1.0], [[1.0]], domain=Box.interval(0.0, 10.0))
        result = maximize(surface, [5.0])
        assert surface.domain.contains(result.theta)
        assert result.theta[0] < 1e-3

    def test_non_concave_start_recovers(self):
        # log-likelihood with a convex region on the left of its maximum
        surface = surface_from_function(lambda t: -((t * t - 1.0) ** 2) - 0.1 * (t - 1.0) ** 2, 0.0, 3.0)
        result = maximize(surface, [0.2])
        assert result.theta[0] == pytest.approx(1.0, abs=1e-5)

    def test_iteration_cap_reports_not_converged(self, quadratic_1d):
        result = maximize(quadratic_1d, [-20.0], max_iter=0)
        assert not result.converged


def test_interior_project_leaves_room_for_stencil():
    surface = poisson_surface()
    point = interior_project(surface, [-5.0])
    assert point[0] > 2.0 * surface.info_h_rel


@pytest.mark.parametrize(
    ("dof", "level", "expected"),
    [
        (1, 0.9, 2.705543454095404),
        (1, 0.95, 3.841458820694124),
        (2, 0.95, 5.991464547107979),
        (2, 0.9, -2.0 * math.log(0.1)),
    ],
)
def test_chi2_quantile(dof, level, expected):
    assert chi2_quantile(dof, level) == pytest.approx(expected, rel=1e-12)


def test_chi2_quantile_bad_level():
    with pytest.raises(ValueError):
        chi2_quantile(1, 1.0)


class TestLRInterval:
    def test_quadratic_interval_is_symmetric(self, quadratic_1d):
        ci = lr_confidence_interval(quadratic_1d, [1.5], 0.9)
        half = math.sqrt(chi2_quantile(1, 0.9) / 4.0)
        assert ci.lo == pytest.approx(1.5 - half, abs=1e-9)
        assert ci.hi == pytest.approx(1.5 + half, abs=1e-9)
        assert not ci.truncated
        assert ci.covers(1.5)
        assert not ci.covers(1.5 + 1.01 * half)

    def test_poisson_interval_is_skewed(self):
        surface = poisson_surface()
        ci = lr_confidence_interval(surface, [3.7], 0.9)
        q = chi2_quantile(1, 0.9)
        for end in (ci.lo, ci.hi):
            assert 2.0 * (surface.loglik([3.7]) - surface.loglik([end])) == pytest.approx(q, abs=1e-8)
        assert 3.7 - ci.lo < ci.hi - 3.7

    def test_truncated_at_domain_edge(self, make_gaussian):
        surface = make_gaussian([0.05], [[1.0]], domain=Box.interval(0.0, 10.0))
        ci = lr_confidence_interval(surface, [0.05], 0.9)
        assert ci.lo_truncated
        assert not ci.hi_truncated
        assert ci.lo == pytest.approx(0.0, abs=1e-9)

    def test_not_the_maximizer(self, quadratic_1d):
        with pytest.raises(IntervalError):
            lr_confidence_interval(quadratic_1d, [0.5], 0.9)

    def test_two_dimensional_rejected(self, quadratic_2d):
        with pytest.raises(ValueError):
            lr_confidence_interval(quadratic_2d, [0.3, -0.7], 0.9)


def test_confidence_interval_covers_endpoints():
    ci = ConfidenceInterval(1.0, 2.0, 0.9)
    assert ci.covers(1.0)
    assert ci.covers(2.0)
    assert not ci.truncated


def two_level_surface(n, m, seed):
    dataset = simulate_two_level(n, m, 0.5, seed)
    return dataset_surface(dataset, Method.QUADRATURE, derivative_mode=DerivativeMode.ANALYTIC)


class TestAgainstGridScan:
    def test_maximizer_matches_grid_argmax(self):
        surface = two_level_surface(50, 20, 1)
        grid = np.linspace(0.05, 2.0, 2000)
        values = surface.loglik_grid(grid)
        best = int(np.argmax(values))
        assert 0 < best < grid.size - 1
        result = maximize(surface, [0.5])
        assert result.converged
        assert result.theta[0] == pytest.approx(grid[best], abs=grid[1] - grid[0])
        assert result.bundle.loglik >= values[best] - 1e-9

    def test_interval_matches_grid_inversion(self):
        surface = two_level_surface(1000, 5, 3)
        fit = maximize(surface, [0.5])
        interval = lr_confidence_interval(surface, fit.theta, 0.9)
        grid = np.linspace(0.2, 0.9, 10_001)
        inside = grid[2.0 * (fit.bundle.loglik - surface.loglik_grid(grid)) <= chi2_quantile(1, 0.9)]
        step = grid[1] - grid[0]
        assert grid[0] < inside[0] and inside[-1] < grid[-1]
        assert interval.lo == pytest.approx(inside[0], abs=step)
        assert interval.hi == pytest.approx(inside[-1], abs=step)
