"""
Oracle-equivalence checks runnable from the command line.

Each check compares a fast routine against an independent slow one
(enumeration, adaptive Simpson, a larger quadrature rule) at desk scale.
"""

from __future__ import annotations

import itertools
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from src.inference.errors import NumericalError
from src.ising.kaufman import kaufman_log_z
from src.ising.lattice import BETA_C, Boundary, IsingParams, LatticeSpec
from src.ising.partition import brute_force_log_z, rda_log_z, transfer_log_z
from src.ising.spectral import b_beta, trapezium_decay_check
from src.logging_setup import get_logger
from src.twolevel.likelihood import g_value, laplace_mode, loglik_quadrature
from src.twolevel.models import QuadratureRule
from src.utils import adaptive_simpson


log = get_logger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float
    detail: str = ""


@dataclass
class SelftestReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        return [
            f"{'ok  ' if r.passed else 'FAIL'} {r.name:<28} worst={r.worst:.3e} tol={r.tolerance:.1e} "
            f"({r.seconds:.1f}s){' ' + r.detail if r.detail else ''}"
            for r in self.results
        ]


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def check_transfer_vs_brute() -> tuple[float, str]:
    worst, where = 0.0, ""
    for r, c, boundary, alpha, beta in itertools.product(
        range(1, 5), range(1, 5), Boundary, (0.0, 0.1), (0.0, 0.2, 0.43)
    ):
        lattice = LatticeSpec(r, c, boundary)
        params = IsingParams(alpha, beta)
        err = _relative(transfer_log_z(lattice, params), brute_force_log_z(lattice, params))
        if err > worst:
            worst, where = err, f"{lattice} alpha={alpha} beta={beta}"
    return worst, where


def check_kaufman() -> tuple[float, str]:
    worst, where = 0.0, ""
    for beta in (0.1, 0.2, 0.3, 0.43):
        params = IsingParams(0.0, beta)
        for n in (2, 3, 4, 8):
            lattice = LatticeSpec(n, n, Boundary.PERIODIC)
            oracle = brute_force_log_z(lattice, params) if n <= 4 else transfer_log_z(lattice, params)
            err = _relative(kaufman_log_z(n, n, beta), oracle)
            if err > worst:
                worst, where = err, f"{lattice} beta={beta}"
    return worst, where


def check_rda() -> tuple[float, str]:
    """rda(k = rows) must be exact; the error must shrink strictly as k grows."""
    worst, detail = 0.0, ""
    params = IsingParams(0.1, 0.3)
    for size in (4, 6):
        lattice = LatticeSpec(size, size, Boundary.FREE)
        exact = transfer_log_z(lattice, params)
        worst = max(worst, abs(rda_log_z(size, lattice, params) - exact))
        errors = [abs(exact - rda_log_z(k, lattice, params)) for k in range(2, size + 1)]
        if not all(b < a for a, b in itertools.pairwise(errors)):
            detail = f"error not decreasing in k on {lattice}: {errors}"
            worst = math.inf
    return worst, detail


QUADRATURE_GRID = [(theta, m, y) for theta in (0.1, 0.5, 1.0, 2.0) for m in (5, 20, 50) for y in (0, m // 2, m)]


def _simpson_loglik(y: int, m: int, theta: float) -> float:
    fit = laplace_mode(y, m, theta)
    sigma = fit.g2_at_mode**-0.5

    def integrand(b: float) -> float:
        return math.exp(-(float(g_value(b, y, m, theta)) - fit.g_at_mode))

    area = adaptive_simpson(integrand, fit.b_hat - 20.0 * sigma, fit.b_hat + 20.0 * sigma, tol=1e-13)
    return math.log(area) - fit.g_at_mode


def _check_against_simpson(points: int) -> tuple[float, str]:
    worst, where = 0.0, ""
    rule = QuadratureRule.gauss_hermite(points)
    for theta, m, y in QUADRATURE_GRID:
        err = abs(float(loglik_quadrature(y, m, theta, rule)) - _simpson_loglik(y, m, theta))
        if err > worst:
            worst, where = err, f"theta={theta} m={m} y={y}"
    return worst, where


def check_quadrature() -> tuple[float, str]:
    """Default 20-point adaptive rule against adaptive Simpson."""
    return _check_against_simpson(20)


def check_quadrature_40() -> tuple[float, str]:
    return _check_against_simpson(40)


def check_rule_size() -> tuple[float, str]:
    worst, where = 0.0, ""
    rule20 = QuadratureRule.gauss_hermite(20)
    rule40 = QuadratureRule.gauss_hermite(40)
    for theta, m, y in QUADRATURE_GRID:
        err = abs(float(loglik_quadrature(y, m, theta, rule20)) - float(loglik_quadrature(y, m, theta, rule40)))
        if err > worst:
            worst, where = err, f"theta={theta} m={m} y={y}"
    return worst, where


def check_spectral() -> tuple[float, str]:
    worst, where = 0.0, ""
    for beta in (0.2, 0.3):
        fit = trapezium_decay_check(beta, list(range(8, 21)))
        if fit.relative_to_a > worst:
            worst, where = fit.relative_to_a, f"beta={beta} rate={fit.rate:.4f} a_beta={fit.a_beta:.4f}"
    near_critical = b_beta(BETA_C - 1e-9)
    if near_critical >= 1e-3:
        return math.inf, f"b_beta just below beta_c is {near_critical:.3e}"
    return worst, where


CHECKS: dict[str, tuple[Callable[[], tuple[float, str]], float]] = {
    "transfer_vs_brute_force": (check_transfer_vs_brute, 1e-10),
    "kaufman_closed_form": (check_kaufman, 1e-8),
    "rda_identity_monotone": (check_rda, 1e-12),
    "adaptive_quadrature": (check_quadrature, 2e-6),
    "adaptive_quadrature_40": (check_quadrature_40, 1e-8),
    "quadrature_20_vs_40": (check_rule_size, 2e-6),
    "trapezium_decay": (check_spectral, 0.10),
}


def run_selftest(names: list[str] | None = None) -> SelftestReport:
    report = SelftestReport()
    for name, (check, tolerance) in CHECKS.items():
        if names and name not in names:
            continue
        start = time.perf_counter()
        try:
            worst, detail = check()
        except (NumericalError, ValueError) as e:
            worst, detail = math.inf, f"{type(e).__name__}: {e}"
        result = CheckResult(
            name=name,
            passed=bool(np.isfinite(worst) and worst <= tolerance),
            worst=worst,
            tolerance=tolerance,
            seconds=time.perf_counter() - start,
            detail=detail,
        )
        log.info("selftest.check", name=name, passed=result.passed, worst=worst, tolerance=tolerance)
        report.results.append(result)
    return report
