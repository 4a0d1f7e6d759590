from unittest.mock import mock_open, patch

import pytest

import src.config
from src.config import ConfigurationError, IsingCaps, NumericsConfig, load_config, read_config_file


class TestConfig:
    def setup_method(self):
        # Reset global config before each test
        src.config._config = None

    def test_load_config_success(self):
        mock_yaml_content = """
numerics:
  score_h_rel: 1.0e-5
  max_iter: 50
ising:
  rda_k: 12
"""
        m = mock_open(read_data=mock_yaml_content)
        with patch("pathlib.Path.open", m):
            config = load_config()
            assert config["numerics"]["score_h_rel"] == 1e-5
            assert config["numerics"]["max_iter"] == 50
            assert config["ising"]["rda_k"] == 12

    def test_load_config_is_cached(self):
        m = mock_open(read_data="numerics: {max_iter: 7}\n")
        with patch("pathlib.Path.open", m):
            first = load_config()
            second = load_config()
        assert first is second
        assert m.call_count == 1

    def test_load_config_file_not_found(self):
        with (
            patch("pathlib.Path.open", side_effect=FileNotFoundError("Config file not found")),
            pytest.raises(ConfigurationError, match="Configuration file missing"),
        ):
            load_config()

    def test_load_config_invalid_yaml(self):
        invalid_yaml = "invalid: yaml: content: ["
        m = mock_open(read_data=invalid_yaml)
        with (
            patch("pathlib.Path.open", m),
            pytest.raises(ConfigurationError, match="Invalid YAML"),
        ):
            load_config()

    def test_load_config_empty_file(self):
        m = mock_open(read_data="")
        with patch("pathlib.Path.open", m):
            assert load_config() == {}

    def test_non_mapping_rejected(self):
        m = mock_open(read_data="- 1\n- 2\n")
        with patch("pathlib.Path.open", m), pytest.raises(ConfigurationError, match="must contain a mapping"):
            load_config()


class TestConfigPath:
    def test_env_override(self, config_file):
        path = config_file("numerics:\n  tol: 1.0e-7\n")
        assert load_config()["numerics"]["tol"] == 1e-7
        assert read_config_file(path) == {"numerics": {"tol": 1e-7}}

    def test_missing_file_names_the_path(self, tmp_path):
        missing = tmp_path / "nope.yaml"
        with pytest.raises(ConfigurationError, match="nope.yaml"):
            read_config_file(missing)

    def test_json_is_accepted(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text('{"seed": 3, "n_list": [1000]}')
        assert read_config_file(path) == {"seed": 3, "n_list": [1000]}


class TestTypedViews:
    def test_shipped_defaults(self):
        numerics = NumericsConfig.from_config()
        assert numerics.score_h_rel == 1e-6
        assert numerics.info_h_rel == 1e-4
        assert numerics.tol == 1e-9
        caps = IsingCaps.from_config()
        assert caps.brute_force_sites == 24
        assert caps.rda_k == 16

    def test_missing_sections_fall_back(self, config_file):
        config_file("harness: {}\n")
        assert NumericsConfig.from_config() == NumericsConfig()
        assert IsingCaps.from_config() == IsingCaps()

    def test_overrides(self, config_file):
        config_file("ising:\n  transfer_width: 8\n")
        assert IsingCaps.from_config().transfer_width == 8
