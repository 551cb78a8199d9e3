import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from grwhittaker.gzpaths import phase_from_graph
from grwhittaker.integral import (
    GAMMA_GRID,
    BudgetExceeded,
    ContourSpec,
    Integrand,
    QuadratureSettings,
    bessel_closed_form,
    bessel_oracle,
    build_phase,
    decay_check,
    evaluate_whittaker,
    gamma_identity_check,
    gamma_integral,
    gamma_reference,
    integrate,
    measure_matches_graph,
    measure_variables,
)

K0_VALUE = 2 * special.kv(0, 2.0)


def test_bessel_value_1_2():
    r = evaluate_whittaker(1, 2, [0.0, 0.0], 1.0, 0.0, tol=1e-10)
    assert r.value.real == pytest.approx(K0_VALUE, rel=1e-10)
    assert abs(r.value.imag) < 1e-14


@pytest.mark.parametrize("policy", ["trapezoid", "gauss"])
def test_both_policies_reach_bessel_value(policy):
    r = evaluate_whittaker(1, 2, [0.0, 0.0], 1.0, 0.0, tol=1e-10, policy=policy)
    assert r.value.real == pytest.approx(K0_VALUE, rel=1e-9)
    assert r.policy == policy


@pytest.mark.parametrize("order", [0.0, 0.5, 1.5, 2j, 0.7j])
def test_bessel_oracle_against_mpmath(order):
    assert bessel_oracle(order, 1.3) == pytest.approx(complex(mpmath.besselk(order, 1.3)), rel=1e-11)


@pytest.mark.parametrize("nu,x,hbar", [(0.3, 0.4, 1.0), (1.0, -0.5, 0.5), (0.0, 1.0, 2.0)])
def test_parametric_identity(nu, x, hbar):
    lam2 = 0.25
    val = evaluate_whittaker(1, 2, [nu + lam2, lam2], hbar, x, tol=1e-10).value
    ref = bessel_closed_form(nu, lam2, x, hbar, kfun=lambda o, z: complex(mpmath.besselk(o, z)))
    assert abs(val - ref) <= 1e-8 * abs(ref)


@settings(max_examples=15)
@given(st.floats(-1, 1), st.floats(-1.5, 1.5), st.floats(-1, 1))
def test_uniform_lambda_shift_multiplies_by_phase(nu, c, x):
    base = evaluate_whittaker(1, 2, [nu, 0.0], 1.0, x, tol=1e-10).value
    shifted = evaluate_whittaker(1, 2, [nu + c, c], 1.0, x, tol=1e-10).value
    assert abs(shifted - cmath.exp(1j * c * x) * base) <= 1e-9


def test_prefactor_flag():
    a = evaluate_whittaker(1, 2, [0.0, 0.0], 1.0, 0.8)
    b = evaluate_whittaker(1, 2, [0.0, 0.0], 1.0, 0.8, apply_prefactor=True)
    assert b.value == pytest.approx(a.value * math.exp(-0.4), rel=1e-14)


@pytest.mark.parametrize("nu,hbar", GAMMA_GRID)
def test_gamma_grid(nu, hbar):
    assert gamma_identity_check(nu, hbar) <= 1e-10


def test_gamma_spot_values():
    assert gamma_reference(-1.0, 1.0) == pytest.approx(1.0)
    assert gamma_reference(-2.0, 1.0) == pytest.approx(1.0)
    assert gamma_reference(-1.0, 2.0) == pytest.approx(2.0)
    assert gamma_reference(-0.5, 1.0) == pytest.approx(complex(mpmath.gamma(0.5)))
    assert gamma_integral(-1.0, 2.0).value == pytest.approx(2.0, rel=1e-10)


def test_gamma_integral_rejects_divergent():
    with pytest.raises(ValueError):
        gamma_integral(0.5, 1.0)


@pytest.mark.parametrize("m,N", [(m, N) for N in range(2, 7) for m in range(1, N)])
def test_phase_structure(m, N):
    ph = build_phase(m, N, [0.0] * N, 1.0)
    assert ph.exp_sum() == phase_from_graph(m, N)
    assert measure_matches_graph(m, N)
    assert len(measure_variables(m, N)) == m * (N - m)
    assert decay_check(ph)


def test_phase_rejects_bad_lambda():
    with pytest.raises(ValueError):
        build_phase(1, 3, [0.0, 0.0], 1.0)


def test_dimension_limit():
    with pytest.raises(ValueError):
        evaluate_whittaker(2, 5, [0.0] * 5)


def test_budget_exceeded_carries_estimate():
    with pytest.raises(BudgetExceeded) as info:
        evaluate_whittaker(1, 3, [0.0] * 3, max_evaluations=2000)
    assert info.value.result.evaluations <= 2000
    assert info.value.result.value != 0


def test_raw_integrand_gives_bessel_value():
    # F = -e^{y} - e^{-y} integrates to 2 K_0(2)
    f = Integrand(np.array([0j]), 0j, np.array([1.0, 1.0]), np.array([[1.0], [-1.0]]), np.array([0.0, 0.0]))
    r = integrate(f, QuadratureSettings(tol=1e-12))
    assert r.value.real == pytest.approx(K0_VALUE, rel=1e-12)


def test_explicit_contour():
    f = build_phase(1, 2, [0.0, 0.0], 1.0).integrand()
    r = integrate(f, QuadratureSettings(tol=1e-10), ContourSpec((-40.0,), (40.0,)))
    assert r.value.real == pytest.approx(K0_VALUE, rel=1e-10)


def test_thread_count_does_not_change_result(monkeypatch):
    monkeypatch.setenv("GRWHITTAKER_THREADS", "1")
    a = evaluate_whittaker(1, 3, [0.1, 0.0, -0.2], tol=1e-6).value
    monkeypatch.setenv("GRWHITTAKER_THREADS", "4")
    b = evaluate_whittaker(1, 3, [0.1, 0.0, -0.2], tol=1e-6).value
    assert a == b


def test_unknown_policy():
    f = build_phase(1, 2, [0.0, 0.0], 1.0).integrand()
    with pytest.raises(ValueError):
        integrate(f, QuadratureSettings(policy="simpson"))
