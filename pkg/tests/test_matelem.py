from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from grwhittaker.matelem import (
    UElement,
    adjoint_generic,
    adjoint_numeric_error,
    adjoint_printed,
    casimir,
    char_poly,
    compare_charpoly_qh,
    compare_hamiltonian,
    compare_lax,
    decomposition,
    hamiltonian,
    lax_operator,
    lax_symbols,
    printed_adjoint_cases,
    printed_hamiltonian,
    reduction_consistency,
    specialized_lax,
    verify_centrality,
    whitney_sequence,
)
from grwhittaker.serialize import parse_diffop
from grwhittaker.symkernel import DiffOperator, ExpPoly, ParamScalar, diff_commutator, torus

mN_small = st.integers(2, 4).flatmap(lambda N: st.tuples(st.integers(1, N - 1), st.just(N)))
mN_five = st.integers(2, 5).flatmap(lambda N: st.tuples(st.integers(1, N - 1), st.just(N)))
HB = ParamScalar.h(-1)


def _bracket_units(a, b):
    """[E_a, E_b] as {unit: coefficient}."""
    out = {}
    if a[1] == b[0]:
        out[(a[0], b[1])] = out.get((a[0], b[1]), 0) + 1
    if b[1] == a[0]:
        out[(b[0], a[1])] = out.get((b[0], a[1]), 0) - 1
    return {k: v for k, v in out.items() if v}


@given(mN_five)
def test_decomposition_covers_every_unit(mN):
    m, N = mN
    d = decomposition(m, N)
    assert len(d.n_minus) == len(d.n_plus) == N * (N - 1) // 2
    assert not set(d.n_minus) & set(d.n_plus)
    cartan = [d.h_matrix(k) for k in range(1, N + 1)]
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            # every unit is a combination of letters, and the letters rebuild it
            rebuilt = {}
            for letter, c in d.letter_of_unit((i, j)).items():
                units = cartan[letter[1] - 1] if letter[0] == "h" else {letter[1:]: 1}
                for u, v in units.items():
                    rebuilt[u] = rebuilt.get(u, 0) + c * v
            assert {u: v for u, v in rebuilt.items() if v} == {(i, j): 1}


@given(mN_five)
def test_nilpotent_parts_are_subalgebras(mN):
    m, N = mN
    d = decomposition(m, N)
    for part in (set(d.n_minus), set(d.n_plus)):
        for a in part:
            for b in part:
                assert set(_bracket_units(a, b)) <= part


def test_decomposition_rejects_bad_pair():
    with pytest.raises(ValueError):
        decomposition(2, 2)


@given(mN_five, st.lists(st.floats(-1, 1), min_size=5, max_size=5))
def test_generic_adjoint_matches_dense_conjugation(mN, xs):
    m, N = mN
    x = np.array(xs[:N])
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            assert adjoint_numeric_error(i, j, m, N, x) <= 1e-12


@pytest.mark.parametrize("m,N", [(1, 2), (2, 4), (3, 5)])
def test_printed_adjoint_cases_match_generic(m, N):
    for i, j in printed_adjoint_cases(m, N):
        assert adjoint_printed(i, j, m, N) == adjoint_generic(i, j, m, N)


def test_casimir_structure():
    assert casimir(1, 3).degree == 1
    C2 = casimir(2, 3)
    assert C2.degree == 2
    with pytest.raises(ValueError):
        casimir(3, 3)


def test_uelement_arithmetic():
    a, b = UElement.unit(1, 2), UElement.unit(2, 1)
    assert (a * b - a * b) == UElement()
    assert (a + b).terms == {((1, 2),): ExpPoly.const(1), ((2, 1),): ExpPoly.const(1)}


@given(mN_small)
def test_reduction_respects_commutators(mN):
    assert reduction_consistency(*mN) == []


@pytest.mark.parametrize("N", [2, 3])
def test_casimirs_are_central(N):
    for k in (1, 2):
        assert all(verify_centrality(N, k).values())


@given(mN_five)
def test_first_hamiltonian_is_sum_of_end_derivatives(mN):
    m, N = mN
    expected = DiffOperator.d(torus(1), 1, ExpPoly.const(HB)) + DiffOperator.d(torus(N), 1, ExpPoly.const(HB))
    assert hamiltonian(1, m, N, gauge="none") == expected
    assert hamiltonian(1, m, N, gauge="balanced") == expected
    assert hamiltonian(1, m, N, gauge="balanced") == printed_hamiltonian(1, m, N)


def test_prefactor_gauge_offsets_first_hamiltonian():
    H = hamiltonian(1, 2, 4, gauge="prefactor")
    assert H - hamiltonian(1, 2, 4, gauge="none") == DiffOperator.mult(ExpPoly.const(HB * 2))


@given(mN_five)
def test_hamiltonians_commute(mN):
    m, N = mN
    for gauge in ("none", "balanced"):
        assert diff_commutator(hamiltonian(1, m, N, gauge), hamiltonian(2, m, N, gauge)).is_zero()


@given(mN_five)
def test_second_hamiltonian_constant_in_balanced_gauge(mN):
    m, N = mN
    c = compare_hamiltonian(2, m, N, gauge="balanced")
    assert c.constant_matches
    assert c.realized_constant == ParamScalar.const(Fraction(-(N - 1) * (N - 2) * (N - 3), 24)) * ParamScalar.h(-2)


def test_lax_1_2():
    L = lax_operator(1, 2)
    assert L[(2, 1)] == DiffOperator.mult(1)
    assert L[(2, 2)] == DiffOperator.d(torus(2), 1, ExpPoly.const(HB))


@pytest.mark.parametrize("m,N", [(m, N) for N in range(2, 6) for m in range(1, min(N, 3))])
def test_lax_entries_match_up_to_sign_for_m_at_most_two(m, N):
    bad = [e.entry for e in compare_lax(m, N) if e.status == "fail" or not e.zero_pattern_ok]
    assert bad == []


def test_lax_first_row_at_3_4_carries_lower_neighbour():
    # hand reduction of <E_13 g>: the constant term is x_2, not x_4
    L13 = lax_operator(3, 4)[(1, 3)]
    expected = parse_diffop("[{1}*x[2]^1] + [{h^-1}*x[3]^1]*D(x[1])^1 + [{h^-1}*x[3]^2]*D(x[3])^1")
    assert L13 == expected


def test_charpoly_two_terms_at_zero_momenta():
    for N in range(2, 6):
        p, q, lam, s = lax_symbols(N)
        for m in range(1, N):
            d = sp.expand(char_poly(specialized_lax(m, N), lam).subs({v: 0 for v in p}))
            assert d == lam**N - s * q


def test_charpoly_factorization_2_4():
    p, q, lam, s = lax_symbols(4)
    target = (lam**2 + p[0] * lam + p[1]) * (lam**2 + p[3] * lam - p[2]) - s * q
    assert sp.expand(char_poly(specialized_lax(2, 4), lam) - target) == 0


def test_whitney_sequence_recursion():
    Y = whitney_sequence(2, 5)
    s1, s2 = sp.symbols("sigma1 sigma2")
    for k in range(2, 5):
        assert sp.expand(Y[k] - (s1 * Y[k - 1] - s2 * Y[k - 2])) == 0


@pytest.mark.parametrize("m,N,sign", [(1, 2, -1), (1, 3, 1), (2, 4, 1)])
def test_qh_substitution_found(m, N, sign):
    c = compare_charpoly_qh(m, N)
    assert c.found and c.sign == sign
