import json

import pytest

from app.core.config import settings
from app.core.errors import FormatError, UnknownSuiteError
from app.models.schemas import OutputFormat, SuiteName
from app.services.suites import Case, Outcome, _execute, _mismatch, run_suite


def summary(run):
    return [(r.suite, r.cases_total, r.cases_failed, r.details) for r in run.reports]


@pytest.fixture
def small_samples(monkeypatch):
    monkeypatch.setattr(settings, "RESIDUE_SAMPLES", 4)
    monkeypatch.setattr(settings, "CONVOLUTION_SAMPLES", 4)
    monkeypatch.setattr(settings, "ROUNDTRIP_OPERATIONS", 2)
    monkeypatch.setattr(settings, "SESQUILINEARITY_CASES", 3)
    monkeypatch.setattr(settings, "SPANNING_INPUT_CAP", 8)


def test_lie_dim_suite():
    """Test the Lie dimension suite through n = 4"""
    run = run_suite("lie-dim", 4)
    assert run.exit_code == 0
    dimension = run.reports[0]
    assert dimension.suite == "lie-dim/dimension"
    assert dimension.details == {"dims": [1, 1, 2, 6]}
    assert all(r.passed for r in run.reports)


def test_line_basis_suite():
    """Test graph decomposition checks for n <= 3"""
    run = run_suite(SuiteName.LINE_BASIS, 3)
    assert run.exit_code == 0
    by_name = {r.suite: r for r in run.reports}
    assert by_name["line-basis/dimension"].details == {"dimensions": [1, 2, 6]}
    assert by_name["line-basis/delta"].cases_total == 1 + 2 + 6


def test_fourier_delta_suite():
    run = run_suite("fourier-delta", 3)
    assert run.exit_code == 0
    assert run.reports[0].cases_total == 9


@pytest.mark.parametrize("name", ["residue-lemmas", "convolution", "roundtrip", "n2-closed-form"])
def test_sampled_suites_pass(small_samples, name):
    """Test the sampled suites on small sample sizes"""
    run = run_suite(name, 2, seed=3)
    assert run.exit_code == 0, run.output


def test_unknown_suite():
    """Test suite names and sizes are checked before running"""
    with pytest.raises(UnknownSuiteError):
        run_suite("bogus", 3)
    with pytest.raises(KeyError):
        run_suite("bogus", 3)
    with pytest.raises(ValueError):
        run_suite("lie-dim", 0)


def test_output_formats():
    """Test that both formats carry the seed"""
    text = run_suite("lie-dim", 3, seed=7, fmt=OutputFormat.TEXT).output
    assert text.startswith("seed: 7")
    assert text.splitlines()[-1].startswith("PASS")
    data = json.loads(run_suite("lie-dim", 3, seed=7).output)
    assert data["seed"] == 7
    assert data["passed"] is True
    assert data["reports"][0]["details"] == {"dims": [1, 1, 2]}


def test_default_seed_is_reported():
    data = json.loads(run_suite("lie-dim", 2).output)
    assert data["seed"] == settings.DEFAULT_SEED


def test_runs_are_deterministic(small_samples):
    """Test that the same seed gives the same reports"""
    first, second = run_suite("convolution", 2, seed=5), run_suite("convolution", 2, seed=5)
    assert summary(first) == summary(second)
    assert [r.first_counterexample for r in first.reports] == [r.first_counterexample for r in second.reports]


def test_worker_pool_matches_serial(monkeypatch):
    """Test that reports do not depend on the number of workers"""
    serial = run_suite("lie-dim", 4)
    monkeypatch.setattr(settings, "WORKERS", 2)
    pooled = run_suite("lie-dim", 4)
    assert summary(pooled) == summary(serial)


def passing_check():
    return Outcome(value=1)


def failing_check(label):
    return _mismatch(label, 0, 1)


def raising_check():
    raise FormatError("broken input")


def test_execute_collects_failures_in_key_order():
    """Test grouping, counting and the first counterexample"""
    cases = [
        Case("ok", (0,), passing_check),
        Case("bad", (2,), failing_check, ("second",)),
        Case("bad", (1,), failing_check, ("first",)),
        Case("bad", (3,), passing_check),
    ]
    reports = _execute("demo", 2, cases)
    assert [r.suite for r in reports] == ["demo/ok", "demo/bad"]
    ok, bad = reports
    assert ok.passed and ok.details == {"values": [1]}
    assert (bad.cases_total, bad.cases_failed) == (3, 2)
    assert bad.first_counterexample.input == "first"


def test_execute_reports_errors_as_failures():
    """Test that library errors inside a check become counterexamples"""
    [report] = _execute("demo", 1, [Case("errors", (0,), raising_check)])
    assert report.cases_failed == 1
    assert report.first_counterexample.got == "FormatError: broken input"
