"""Acceptance suite: one test per criterion, tolerances pinned.

Each test runs the matching conformance check and then asserts on the
numbers it reports, so a regression shows the offending quantity.
"""

from __future__ import annotations

import pytest

from grwhittaker import conformance as cf

WHITTAKER_SECONDS = 60.0
ADJOINT_TOL = 1e-10
BESSEL_REL_TOL = 1e-8
BESSEL_SECONDS = 5.0
BESSEL_GRID_TOL = 1e-7
GAMMA_TOL = 1e-8
POLICY_AGREEMENT_TOL = 1e-6
QUADRATURE_SECONDS = 600.0


def _assert_not_failed(r: cf.CheckResult) -> None:
    assert r.status in ("match", "sign-deviation"), r.detail


def test_criterion_01_whittaker_characters():
    r = cf.check_whittaker(max_n=5)
    assert r.detail["failures"] == []
    assert r.detail["seconds"] < WHITTAKER_SECONDS
    _assert_not_failed(r)


def test_criterion_02_chevalley_relations():
    r = cf.check_chevalley(max_n=4)
    assert r.detail["failures"] == {}
    _assert_not_failed(r)


def test_criterion_03_path_and_box_relations():
    r = cf.check_paths(max_n=6)
    assert r.detail["failures"] == []
    assert all(n > 0 for n in r.detail["relations_checked"].values())
    _assert_not_failed(r)


def test_criterion_04_phase_equals_graph():
    r = cf.check_phase_graph(max_n=6)
    assert r.detail["failures"] == []
    _assert_not_failed(r)


def test_criterion_05_adjoint_action_numerics():
    r = cf.check_adjoint(max_n=6, samples=100, tol=ADJOINT_TOL)
    assert r.detail["max_error"] <= ADJOINT_TOL
    _assert_not_failed(r)


def test_criterion_06_lax_and_hamiltonians():
    r = cf.check_lax_hamiltonians(max_n=5)
    d = r.detail
    assert d["h1_failures"] == []
    assert d["zero_pattern_failures"] == []
    assert d["h2_constant_failures"] == []
    assert d["commutator_failures"] == []
    bad = [f"{e['entry']} at (m,n)=({e['m']},{e['n']})" for e in d["lax_entry_failures"]]
    assert bad == [], "Lax entries differing beyond sign: " + ", ".join(bad)
    _assert_not_failed(r)


def test_criterion_07_casimir_centrality():
    r = cf.check_centrality(max_n=3)
    assert r.detail["failures"] == []
    _assert_not_failed(r)


def test_criterion_08_bessel_value_and_grid():
    r = cf.check_bessel()
    d = r.detail
    assert d["value"] == pytest.approx(0.22778774549906, rel=BESSEL_REL_TOL)
    assert d["relative_error"] <= BESSEL_REL_TOL
    assert d["seconds"] < BESSEL_SECONDS
    assert d["parametric_max_error"] <= BESSEL_GRID_TOL
    _assert_not_failed(r)


def test_criterion_09_gamma_normalization():
    r = cf.check_gamma()
    assert len(r.detail["residuals"]) == 12
    assert r.detail["max_residual"] <= GAMMA_TOL
    _assert_not_failed(r)


def test_criterion_10_charpoly_structure():
    r = cf.check_charpoly(max_n=6)
    d = r.detail
    assert d["two_term_failures"] == []
    assert d["factorization_2_4"] is True
    assert set(d["substitutions"]) == {"1,2", "1,3", "2,4", "2,5"}
    assert all(c["found"] for c in d["substitutions"].values())
    _assert_not_failed(r)


@pytest.mark.slow
def test_criterion_11_quadrature_policies_agree():
    r = cf.check_quadrature()
    for key, v in r.detail["values"].items():
        assert v["difference"] <= POLICY_AGREEMENT_TOL, key
    assert r.detail["seconds"] < QUADRATURE_SECONDS
    _assert_not_failed(r)
