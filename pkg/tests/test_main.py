import json

import pytest

from src.harness.ising_outputs import BBETA_FILE
from src.inference.errors import NumericalError
from src.ising.lattice import Boundary, IsingParams, LatticeSpec
from src.ising.partition import brute_force_log_z
from src.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main


class TestLogz:
    def test_prints_value(self, capsys):
        code = main(["logz", "--rows", "3", "--cols", "3", "--beta", "0.3", "--alpha", "0.1"])
        assert code == EXIT_OK
        expected = brute_force_log_z(LatticeSpec(3, 3), IsingParams(0.1, 0.3))
        assert float(capsys.readouterr().out) == pytest.approx(expected, rel=1e-12)

    def test_closed_form(self, capsys):
        args = ["logz", "--rows", "4", "--cols", "4", "--beta", "0.3", "--boundary", "periodic", "--method", "kaufman"]
        assert main(args) == EXIT_OK
        expected = brute_force_log_z(LatticeSpec(4, 4, Boundary.PERIODIC), IsingParams(0.0, 0.3))
        assert float(capsys.readouterr().out) == pytest.approx(expected, rel=1e-8)

    def test_unknown_method(self, capsys):
        assert main(["logz", "--rows", "3", "--cols", "3", "--beta", "0.3", "--method", "simpson"]) == EXIT_USAGE
        assert "simpson" in capsys.readouterr().err

    def test_closed_form_on_free_lattice_is_numerical(self):
        args = ["logz", "--rows", "4", "--cols", "4", "--beta", "0.3", "--method", "kaufman"]
        assert main(args) == EXIT_NUMERICAL

    def test_size_cap_is_numerical(self):
        assert main(["logz", "--rows", "5", "--cols", "5", "--beta", "0.3", "--method", "brute"]) == EXIT_NUMERICAL


class TestUsage:
    def test_unknown_flag(self, capsys):
        assert main(["logz", "--rows", "3", "--cols", "3", "--beta", "0.3", "--colour", "red"]) == EXIT_USAGE
        assert "--colour" in capsys.readouterr().err

    def test_missing_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_missing_config_names_path(self, tmp_path, capsys):
        missing = tmp_path / "absent.json"
        assert main(["ising-bbeta", "--config", str(missing), "--out-dir", str(tmp_path)]) == EXIT_USAGE
        assert str(missing) in capsys.readouterr().err

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"threads": 0}))
        assert main(["ising-bbeta", "--config", str(path)]) == EXIT_USAGE


class TestExperiments:
    def test_ising_bbeta(self, tmp_path, capsys):
        path = tmp_path / "bbeta.json"
        path.write_text(json.dumps({"beta_grid": [0.1, 0.2, 0.05]}))
        out = tmp_path / "out"
        assert main(["ising-bbeta", "--config", str(path), "--out-dir", str(out), "--threads", "1"]) == EXIT_OK
        assert (out / BBETA_FILE).exists()
        assert str(out) in capsys.readouterr().out

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        def fail(config, out_dir):
            raise NumericalError("diverged")

        monkeypatch.setattr("src.main.run_ising_outputs", fail)
        assert main(["ising-trapezium", "--out-dir", str(tmp_path)]) == EXIT_NUMERICAL


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "kaufman_closed_form"]) == EXIT_OK
    assert "kaufman_closed_form" in capsys.readouterr().out
