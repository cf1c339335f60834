# test_verification.py
# The verification harness at reduced scale

import json

import pytest

from hitdisk.modules.verification.suite import (
    CheckResult, VerificationReport, VerificationSettings, VerificationSuite, run_suite,
)
from hitdisk.utils.errors import VerificationFailure


def small_settings(**overrides):
    values = dict(
        rho_values=(0.0, 0.5, 0.9),
        n_random_starts=2,
        n_round_trip=300,
        n_harmonic_points=10,
        skip_montecarlo=True,
    )
    values.update(overrides)
    return VerificationSettings(**values)


@pytest.fixture(scope="module")
def clean_report():
    return run_suite(small_settings())


def test_all_checks_pass(clean_report):
    assert clean_report.status == "passed", clean_report.to_json()
    assert clean_report.failed_checks() == []
    clean_report.raise_for_status()


def test_every_category_reports(clean_report):
    categories = {c.category for c in clean_report.checks}
    assert categories == {"normalization", "kernel equivalence", "superposition", "circular reduction",
                          "round trips", "harmonicity", "parity", "negative control", "jacobian"}


def test_harmonicity_covers_the_kernel_itself(clean_report):
    harmonic = {c.name: c for c in clean_report.checks if c.category == "harmonicity"}
    assert set(harmonic) == {"discrete Laplacian", "kernel discrete Laplacian"}
    assert harmonic["kernel discrete Laplacian"].passed
    assert harmonic["kernel discrete Laplacian"].value < 1e-4


def test_report_json_shape(clean_report):
    data = json.loads(clean_report.to_json())
    assert set(data) == {"timestamp", "status", "checks"}
    check = data["checks"]["elliptic vs annulus kernel"]
    assert check["status"] == "passed"
    assert check["value"] <= check["threshold"]


def test_corrupted_elliptic_kernel_is_caught():
    suite = VerificationSuite(small_settings(corrupt_elliptic_kernel=True))
    results = suite.check_kernel_equivalence()
    assert [r.passed for r in results] == [False]
    assert results[0].value > 1e-2


def test_failures_raise_with_names():
    report = VerificationReport("now", [
        CheckResult("good", "demo", True, 0.0, 1.0),
        CheckResult("bad", "demo", False, 2.0, 1.0, "too large"),
    ])
    assert report.status == "failed"
    with pytest.raises(VerificationFailure) as excinfo:
        report.raise_for_status()
    assert excinfo.value.failed_checks == ["bad"]
    assert excinfo.value.exit_code == 1
    assert "bad" in str(excinfo.value)


def test_category_errors_become_failed_checks(monkeypatch):
    suite = VerificationSuite(small_settings())

    def broken():
        raise RuntimeError("boom")

    for name in ("check_normalization", "check_kernel_equivalence", "check_superposition",
                 "check_circular_reduction", "check_round_trips", "check_harmonicity",
                 "check_parity", "check_negative_control"):
        monkeypatch.setattr(suite, name, lambda: [])
    monkeypatch.setattr(suite, "check_jacobian", broken)
    report = suite.run()
    assert report.failed_checks() == ["jacobian"]
    assert report.checks[0].message == "boom"


@pytest.mark.slow
def test_montecarlo_category():
    suite = VerificationSuite(small_settings(skip_montecarlo=False))
    results = suite.check_montecarlo()
    assert len(results) == 2
    assert all(r.passed for r in results), [r.message for r in results]
