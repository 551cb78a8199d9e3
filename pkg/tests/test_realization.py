import pytest
from hypothesis import given, strategies as st

from grwhittaker.realization import (
    build_generators,
    build_whittaker_vector,
    cartan_annihilation,
    chevalley_generator,
    classify,
    listed_generators,
    normalization_factors,
    scalar_action,
    verify_chevalley_relations,
    verify_construction_agreement,
    verify_whittaker,
)
from grwhittaker.symkernel import DiffOperator, ExpFunction, ExpPoly, ParamScalar, diff_commutator, gz, mu

h, s = ParamScalar.h(), ParamScalar.sigma()
mN_pairs = st.integers(2, 4).flatmap(lambda N: st.tuples(st.integers(1, N - 1), st.just(N)))


def test_lowering_generator_on_left_vector_n2():
    # e^{-x}(mu_1 - mu_2 + d/dx) applied to exp(-(mu_1 - mu_2) x - h e^x)
    x = gz(1, 1)
    dmu = mu(1, 2) - mu(2, 2)
    op = DiffOperator.mult(ExpPoly.exp({x: -1}, dmu)) + DiffOperator.d(x, 1, ExpPoly.exp({x: -1}))
    f = ExpFunction.make(1, {x: -dmu}, ExpPoly.exp({x: 1}, -h))
    assert scalar_action(op, f) == -h
    assert op == chevalley_generator(2, 2, 1)


def test_gl2_commutator():
    E = build_generators(2).ops
    assert diff_commutator(E[(1, 2)], E[(2, 1)]) == E[(1, 1)] - E[(2, 2)]


@pytest.mark.parametrize("N", [2, 3, 4])
def test_chevalley_and_serre_relations(N):
    rep = verify_chevalley_relations(N)
    assert len(rep) > 0 and rep.ok


@pytest.mark.parametrize("N", [3, 4])
def test_path_form_agrees_with_commutators(N):
    assert verify_construction_agreement(N).ok
    assert verify_construction_agreement(N, rule="step").ok


def test_whittaker_table_1_2():
    tab = verify_whittaker(1, 2)
    got = {(e.side, e.generator): (e.realized, e.status) for e in tab.entries}
    assert got == {("L", (2, 1)): (-h, "sign-deviation"), ("R", (1, 2)): (-h, "sign-deviation")}


def test_classify():
    assert classify(h, h) == "match"
    assert classify(-h, h) == "sign-deviation"
    assert classify(-h, s * h) == "sign-deviation"
    assert classify(-h, s * h, sign_value=-1) == "match"
    assert classify(ParamScalar.const(0), h) == "fail"


def test_listed_generators_count():
    # m=2, N=4: E_31, E_22..E_42, E_54 does not exist
    assert listed_generators("L", 2, 4) == [(3, 1), (2, 2), (3, 2), (4, 2), (4, 3)]


def test_normalization_factor_count():
    assert len(normalization_factors("L", 2, 4)) == 1
    assert len(normalization_factors("R", 1, 4)) == 3


@given(mN_pairs)
def test_whittaker_vectors_are_eigenvectors(mN):
    tab = verify_whittaker(*mN)
    assert tab.ok
    assert all(e.realized is not None for e in tab.entries)


@given(mN_pairs)
def test_cartan_elements_annihilate(mN):
    assert all(v is not None and v.is_zero() for v in cartan_annihilation(*mN).values())


def test_scalar_action_detects_non_eigenvector():
    x = gz(1, 1)
    f = build_whittaker_vector("L", 1, 2).value
    assert scalar_action(DiffOperator.mult(ExpPoly.var(x)), f) is None
    with pytest.raises(ValueError):
        scalar_action(DiffOperator.d(x), ExpFunction.make(ExpPoly.var(x)))
