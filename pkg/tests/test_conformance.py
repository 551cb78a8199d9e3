import pytest

from grwhittaker.conformance import CHECKS, CheckResult, ConformanceReport, build_report


def test_every_criterion_has_one_check():
    assert list(CHECKS) == [f"acceptance-{i}" for i in range(1, 12)]


def test_duplicate_check_rejected():
    rep = ConformanceReport()
    rep.add(CheckResult("acceptance-1", "x", "match"))
    with pytest.raises(ValueError):
        rep.add(CheckResult("acceptance-1", "x", "match"))


def test_sign_deviation_is_not_failure():
    rep = ConformanceReport([CheckResult("acceptance-1", "x", "sign-deviation")])
    assert rep.ok
    rep.add(CheckResult("acceptance-2", "x", "fail"))
    assert not rep.ok


def test_json_keys():
    d = CheckResult("acceptance-3", "path relations", "match", {"n": 1}).to_json()
    assert d == {"check-id": "acceptance-3", "paper-location": "path relations", "status": "match", "detail": {"n": 1}}


def test_injection_skips_the_check():
    rep = build_report(only=["acceptance-7"], inject=["acceptance-7"])
    assert rep.checks[0].detail == {"injected": True} and not rep.ok
