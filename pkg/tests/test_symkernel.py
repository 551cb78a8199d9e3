from fractions import Fraction

import pytest
from hypothesis import given

from grwhittaker.symkernel import (
    DiffOperator,
    ExpFunction,
    ExpPoly,
    GaussQ,
    ParamScalar,
    conjugate_by_exp,
    diff_apply,
    diff_commutator,
    diff_compose,
    gz,
    mu,
    rho,
    torus,
)

from strategies import diffops, exppolys, scalars

x, y = gz(1, 1), gz(2, 1)


def test_sigma_squares_to_one():
    s = ParamScalar.sigma()
    assert s * s == ParamScalar.const(1)


def test_h_powers_combine():
    assert ParamScalar.h(2) * ParamScalar.h(-3) == ParamScalar.h(-1)


def test_gaussian_rationals_multiply():
    i = GaussQ(0, 1)
    assert ParamScalar.const(i) * ParamScalar.const(i) == ParamScalar.const(-1)


def test_exponentials_merge_and_cancel():
    a = ExpPoly.exp({x: 1, y: -1})
    b = ExpPoly.exp({y: 1})
    assert a * b == ExpPoly.exp({x: 1})
    assert ExpPoly.exp({x: 1}) * ExpPoly.exp({x: -1}) == ExpPoly.const(1)


def test_zero_is_canonical():
    p = ExpPoly.exp({x: 1}) - ExpPoly.exp({x: 1})
    assert p.is_zero() and p == ExpPoly.const(0)


def test_weyl_relation():
    D, X = DiffOperator.d(x), DiffOperator.mult(ExpPoly.var(x))
    assert diff_commutator(D, X) == DiffOperator.mult(1)


def test_exponential_shift_relation():
    D, E = DiffOperator.d(x), DiffOperator.mult(ExpPoly.exp({x: 1, y: 2}))
    assert diff_commutator(D, E) == E


def test_conjugation_by_exponential_shifts_derivative():
    assert conjugate_by_exp(DiffOperator.d(x), x, 2) == DiffOperator.d(x) + DiffOperator.mult(2)


def test_derivative_of_exp_function_keeps_phase():
    f = ExpFunction.make(1, {x: ParamScalar.nu(1)}, ExpPoly.exp({x: 1}))
    g = f.diff(x)
    assert g.same_phase(f)
    assert g.prefactor == ExpPoly.const(ParamScalar.nu(1)) + ExpPoly.exp({x: 1})


def test_rho_and_mu_values():
    assert rho(1, 3) == Fraction(-1)
    assert mu(1, 3) == ParamScalar.const(1) + ParamScalar.nu(1)


def test_evaluate_matches_float_arithmetic():
    import math

    p = ExpPoly.exp({x: 1, y: -1}, 3) * ExpPoly.var(x)
    assert p.evaluate({x: 0.5, y: 0.25}) == pytest.approx(3 * 0.5 * math.exp(0.25))


@given(exppolys(), exppolys(), exppolys())
def test_exppoly_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(exppolys(), exppolys())
def test_leibniz_rule(a, b):
    for v in (x, y, torus(1)):
        assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@given(scalars(), scalars())
def test_scalar_field_ops(a, b):
    assert a * b == b * a
    assert (a + b) - b == a


@given(diffops(), diffops(), exppolys())
def test_composition_acts_as_successive_application(A, B, f):
    assert diff_apply(diff_compose(A, B), f) == diff_apply(A, diff_apply(B, f))


@given(diffops(max_terms=1), diffops(max_terms=1), diffops(max_terms=1))
def test_jacobi_identity(A, B, C):
    total = (
        diff_commutator(A, diff_commutator(B, C))
        + diff_commutator(B, diff_commutator(C, A))
        + diff_commutator(C, diff_commutator(A, B))
    )
    assert total.is_zero()


@given(diffops(max_terms=1), exppolys(max_terms=2))
def test_conjugation_is_an_automorphism_of_application(D, f):
    # e^{-cv} D e^{cv} applied to f equals e^{-cv} D(e^{cv} f)
    e_plus, e_minus = ExpPoly.exp({x: 1}), ExpPoly.exp({x: -1})
    assert diff_apply(conjugate_by_exp(D, x, 1), f) == e_minus * diff_apply(D, e_plus * f)
