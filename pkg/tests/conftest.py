import numpy as np
import pytest

from src.config import reset_config
from src.inference.surface import Box, LikelihoodSurface
from src.logging_setup import configure_logging


# =============================================================================
# Process-wide setup
# =============================================================================


@pytest.fixture(scope="session", autouse=True)
def _test_logging(tmp_path_factory):
    """Send the rotating log file to a temp dir instead of ./logs."""
    log_dir = tmp_path_factory.mktemp("logs")
    configure_logging(log_level="WARNING", log_format="console", log_file=log_dir / "test.log", force=True)


@pytest.fixture(autouse=True)
def _fresh_config(monkeypatch):
    """Each test starts from config/config.yaml with no env overrides."""
    monkeypatch.delenv("APRXLIK_CONFIG", raising=False)
    monkeypatch.delenv("APRXLIK_THREADS", raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    """Write a YAML config and point APRXLIK_CONFIG at it."""

    def _write(text: str):
        path = tmp_path / "config.yaml"
        path.write_text(text)
        monkeypatch.setenv("APRXLIK_CONFIG", str(path))
        reset_config()
        return path

    return _write


# =============================================================================
# Reusable surfaces
# =============================================================================


def gaussian_surface(center, precision, *, domain=None, name="gaussian"):
    """l(theta) = -(theta - c)' P (theta - c) / 2, the exact quadratic case."""
    c = np.atleast_1d(np.asarray(center, dtype=np.float64))
    p = np.atleast_2d(np.asarray(precision, dtype=np.float64))

    def loglik(theta):
        d = theta - c
        return -0.5 * float(d @ p @ d)

    return LikelihoodSurface(loglik_fn=loglik, domain=domain or Box.unbounded(c.size), name=name)


@pytest.fixture
def quadratic_1d():
    return gaussian_surface([1.5], [[4.0]])


@pytest.fixture
def quadratic_2d():
    return gaussian_surface([0.3, -0.7], [[2.0, 0.5], [0.5, 1.0]])


@pytest.fixture
def make_gaussian():
    return gaussian_surface
