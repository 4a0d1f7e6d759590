import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml


# Use stdlib logging here since config loads before structlog is configured
_logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config" / "config.yaml"


class ConfigurationError(Exception):
    """Exception raised when configuration loading or parsing fails."""


_config: dict[str, Any] | None = None


def _config_path() -> Path:
    override = os.getenv("APRXLIK_CONFIG")
    return Path(override) if override else DEFAULT_CONFIG_PATH


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a YAML (or JSON) mapping from ``path``."""
    config_path = Path(path)
    try:
        with config_path.open() as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        _logger.exception("Config file not found: %s", config_path)
        raise ConfigurationError(f"Configuration file missing: {config_path}") from e
    except yaml.YAMLError as e:
        _logger.exception("Failed to parse config file %s", config_path)
        raise ConfigurationError(f"Invalid YAML in configuration file {config_path}: {e}") from e
    except OSError as e:
        _logger.exception("Unexpected error loading config")
        raise ConfigurationError(f"Failed to load configuration from {config_path}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration file {config_path} must contain a mapping")
    return data


def load_config() -> dict[str, Any]:
    """Load library defaults from config/config.yaml (or $APRXLIK_CONFIG)."""
    global _config  # noqa: PLW0603 - caching pattern requires global
    if _config is None:
        _config = read_config_file(_config_path())
    return _config


def reset_config() -> None:
    """Drop the cached configuration (tests, or after changing APRXLIK_CONFIG)."""
    global _config  # noqa: PLW0603
    _config = None


@dataclass(frozen=True)
class NumericsConfig:
    """Step sizes and iteration caps shared by the inference core."""

    score_h_rel: float = 1e-6
    info_h_rel: float = 1e-4
    max_iter: int = 200
    tol: float = 1e-9
    lr_clamp: float = 1e-8
    region_step: float = 0.01

    @classmethod
    def from_config(cls) -> "NumericsConfig":
        """Load configuration from config.yaml."""
        section = load_config().get("numerics", {}) or {}
        return cls(
            score_h_rel=float(section.get("score_h_rel", 1e-6)),
            info_h_rel=float(section.get("info_h_rel", 1e-4)),
            max_iter=int(section.get("max_iter", 200)),
            tol=float(section.get("tol", 1e-9)),
            lr_clamp=float(section.get("lr_clamp", 1e-8)),
            region_step=float(section.get("region_step", 0.01)),
        )


@dataclass(frozen=True)
class IsingCaps:
    """Size caps for the exact normalizing-constant routines."""

    brute_force_sites: int = 24
    transfer_width: int = 16
    rda_k: int = 16
    anchor_block_entries: int = 1 << 20

    @classmethod
    def from_config(cls) -> "IsingCaps":
        section = load_config().get("ising", {}) or {}
        return cls(
            brute_force_sites=int(section.get("brute_force_sites", 24)),
            transfer_width=int(section.get("transfer_width", 16)),
            rda_k=int(section.get("rda_k", 16)),
            anchor_block_entries=int(section.get("anchor_block_entries", 1 << 20)),
        )
