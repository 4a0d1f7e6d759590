import pytest

from src.harness.selftest import CHECKS, run_selftest


def test_selected_check():
    report = run_selftest(["kaufman_closed_form"])
    assert [r.name for r in report.results] == ["kaufman_closed_form"]
    assert report.passed
    assert report.lines()[0].startswith("ok   kaufman_closed_form")


def test_failure_is_reported(monkeypatch):
    def broken():
        raise ValueError("oracle disagrees")

    monkeypatch.setitem(CHECKS, "rda_identity_monotone", (broken, 1e-12))
    report = run_selftest(["rda_identity_monotone"])
    assert not report.passed
    assert report.results[0].detail == "ValueError: oracle disagrees"
    assert report.lines()[0].startswith("FAIL")


@pytest.mark.slow
def test_all_checks_pass():
    report = run_selftest()
    assert len(report.results) == len(CHECKS)
    assert report.passed, "\n".join(report.lines())
