"""Matrix elements <X g> over the modified Gauss decomposition.

gl_N = n_- + h + n_+ with (for 1 <= m < N)

    h   : H_1 = E_11+..+E_mm, H_i = E_{i1} (2<=i<=m), H_j = E_{jN} (m<j<N),
          H_N = E_{m+1,m+1}+..+E_NN
    n_- : E_{a1} (a > m), E_{ki} (2<=i<=m, k>=i), E_{ab} (m < b < a)
    n_+ : E_{ij} (i<j<=m), E_{iN} (i<=m), E_{kj} (m < j < N, k<=j)

and g(x) = exp(sum x_i H_i).  A matrix element <psi_L, X g Z psi_R> is
reduced to a differential operator acting on <g> by moving n_+ letters
through g to psi_R, n_- letters to psi_L (sign flip from the pairing) and
turning h letters into derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .gzpaths import check_mN
from .realization import build_generators, build_whittaker_vector, scalar_action
from .symkernel import (
    DONE,
    DZERO,
    EONE,
    EZERO,
    ONE,
    ZERO,
    DiffOperator,
    ExpPoly,
    ParamScalar,
    conjugate_by_exp,
    diff_commutator,
    diff_compose,
    rho_casimir,
    torus,
)

Unit = Tuple[int, int]
Letter = Tuple  # ("-", i, j) | ("+", i, j) | ("h", k)


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    m: int
    N: int
    n_minus: Tuple[Unit, ...]
    n_plus: Tuple[Unit, ...]

    def letter_of_unit(self, ij: Unit) -> Dict[Letter, Fraction]:
        return _unit_to_letters(self.m, self.N, ij)

    def h_matrix(self, k: int) -> Dict[Unit, Fraction]:
        return _letter_matrix(self.m, self.N, ("h", k))


def decomposition(m: int, N: int) -> Decomposition:
    check_mN(m, N)
    return _decomposition(m, N)


@lru_cache(maxsize=None)
def _decomposition(m: int, N: int) -> Decomposition:
    neg = [(a, 1) for a in range(m + 1, N + 1)]
    neg += [(k, i) for i in range(2, m + 1) for k in range(i, N + 1)]
    neg += [(a, b) for b in range(m + 1, N + 1) for a in range(b + 1, N + 1)]
    pos = [(i, j) for j in range(2, m + 1) for i in range(1, j)]
    pos += [(i, N) for i in range(1, m + 1)]
    pos += [(k, j) for j in range(m + 1, N) for k in range(1, j + 1)]
    return Decomposition(m, N, tuple(sorted(neg)), tuple(sorted(pos)))


def _h_units(m: int, N: int, k: int) -> Dict[Unit, Fraction]:
    one = Fraction(1)
    if k == 1:
        return {(i, i): one for i in range(1, m + 1)}
    if k == N:
        return {(i, i): one for i in range(m + 1, N + 1)}
    if 2 <= k <= m:
        return {(k, 1): one}
    return {(k, N): one}


def _letter_matrix(m: int, N: int, L: Letter) -> Dict[Unit, Fraction]:
    if L[0] == "h":
        return _h_units(m, N, L[1])
    return {(L[1], L[2]): Fraction(1)}


@lru_cache(maxsize=None)
def _unit_letters_cached(m: int, N: int, ij: Unit) -> Tuple[Tuple[Letter, Fraction], ...]:
    d = _decomposition(m, N)
    i, j = ij
    if ij in d.n_minus:
        return ((("-", i, j), Fraction(1)),)
    if ij in d.n_plus:
        return ((("+", i, j), Fraction(1)),)
    if i == j == 1:
        return ((("h", 1), Fraction(1)),) + tuple((("-", k, k), Fraction(-1)) for k in range(2, m + 1))
    if i == j == N:
        return ((("h", N), Fraction(1)),) + tuple((("+", a, a), Fraction(-1)) for a in range(m + 1, N))
    if j == 1 and 2 <= i <= m:
        return ((("h", i), Fraction(1)),)
    if j == N and m + 1 <= i <= N - 1:
        return ((("h", i), Fraction(1)),)
    raise AssertionError(f"unit {ij} not covered by the decomposition")


def _unit_to_letters(m: int, N: int, ij: Unit) -> Dict[Letter, Fraction]:
    return dict(_unit_letters_cached(m, N, ij))


def _matmul(a: Mapping[Unit, object], b: Mapping[Unit, object]) -> Dict[Unit, object]:
    out: Dict[Unit, object] = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            if j == k:
                v = out.get((i, l), 0) + x * y
                out[(i, l)] = v
    return {k: v for k, v in out.items() if not _is_zero(v)}


def _is_zero(v) -> bool:
    if isinstance(v, (ExpPoly, ParamScalar)):
        return v.is_zero()
    return v == 0


@lru_cache(maxsize=None)
def _letter_bracket(m: int, N: int, A: Letter, B: Letter) -> Tuple[Tuple[Letter, Fraction], ...]:
    a, b = _letter_matrix(m, N, A), _letter_matrix(m, N, B)
    ab, ba = _matmul(a, b), _matmul(b, a)
    units: Dict[Unit, Fraction] = dict(ab)
    for k, v in ba.items():
        units[k] = units.get(k, 0) - v
    out: Dict[Letter, Fraction] = {}
    for u, c in units.items():
        if c == 0:
            continue
        for L, w in _unit_to_letters(m, N, u).items():
            out[L] = out.get(L, 0) + c * w
    return tuple(sorted((L, c) for L, c in out.items() if c != 0))


# ---------------------------------------------------------------------------
# adjoint action
# ---------------------------------------------------------------------------


def _x(k: int) -> ExpPoly:
    return ExpPoly.var(torus(k))


def _nil(m: int, N: int) -> Dict[Unit, ExpPoly]:
    out = {(k, 1): _x(k) for k in range(2, m + 1)}
    out.update({(a, N): _x(a) for a in range(m + 1, N)})
    return out


def _block_exp(m: int, N: int, i: int, j: int, sign: int) -> ExpPoly:
    """exp(sign * (s_i - s_j)) with s_i = x_1 (i <= m) or x_N (i > m)."""
    si = 1 if i <= m else N
    sj = 1 if j <= m else N
    if si == sj:
        return EONE
    return ExpPoly.exp({torus(si): sign, torus(sj): -sign})


def _conjugate(m: int, N: int, ij: Unit, inverse: bool) -> Dict[Unit, ExpPoly]:
    """g^{-1} E g (inverse=True) or g E g^{-1} in closed form.

    g = exp(S) (1 + Nil) with Nil^2 = 0 and S constant on the two blocks."""
    i, j = ij
    nil = _nil(m, N)
    E = {ij: EONE}
    sgn = -1 if inverse else 1
    neg = {k: -v for k, v in nil.items()}
    left, right = (neg, nil) if inverse else (nil, neg)
    terms: Dict[Unit, ExpPoly] = dict(E)
    for part in (_matmul(left, E), _matmul(E, right), _matmul(_matmul(left, E), right)):
        for k, v in part.items():
            terms[k] = terms.get(k, EZERO) + v
    f = _block_exp(m, N, i, j, sgn)
    return {k: v * f for k, v in terms.items() if not v.is_zero()}


def adjoint_generic(i: int, j: int, m: int, N: int) -> Dict[Unit, ExpPoly]:
    """g^{-1} E_ij g for any (i, j)."""
    check_mN(m, N)
    return _conjugate(m, N, (i, j), True)


def adjoint_printed(i: int, j: int, m: int, N: int) -> Optional[Dict[Unit, ExpPoly]]:
    """The tabulated closed forms of g^{-1} E_ij g; None for uncovered pairs."""
    x = _x
    out: Dict[Unit, ExpPoly] = {}

    def add(u, c):
        out[u] = out.get(u, EZERO) + c

    a_rng = range(m + 1, N)
    if (i, j) == (1, 1):
        add((1, 1), EONE)
        for k in range(2, m + 1):
            add((k, 1), -x(k))
    elif i == 1 and 2 <= j <= m:
        k = j
        add((1, k), EONE)
        add((1, 1), x(k))
        for n in range(2, m + 1):
            add((n, k), -x(n))
            add((n, 1), -x(n) * x(k))
    elif 2 <= i <= m and 2 <= j <= m:
        add((i, j), EONE)
        add((i, 1), x(j))
    elif i == 1 and j in a_rng:
        a = j
        f = ExpPoly.exp({torus(N): 1, torus(1): -1})
        add((1, a), f)
        add((1, N), f * x(a))
        for k in range(2, m + 1):
            add((k, a), -f * x(k))
            add((k, N), -f * x(k) * x(a))
    elif 2 <= i <= m and j in a_rng:
        f = ExpPoly.exp({torus(N): 1, torus(1): -1})
        add((i, j), f)
        add((i, N), f * x(j))
    elif i in a_rng and i <= j <= N - 1:
        add((i, j), EONE)
        add((i, N), x(j))
    else:
        return None
    return {k: v for k, v in out.items() if not v.is_zero()}


def printed_adjoint_cases(m: int, N: int) -> List[Unit]:
    return [(i, j) for i in range(1, N + 1) for j in range(1, N + 1) if adjoint_printed(i, j, m, N) is not None]


def adjoint_action(i: int, j: int, m: int, N: int) -> Dict[Unit, ExpPoly]:
    """Tabulated form when available, closed-form conjugation otherwise."""
    check_mN(m, N)
    p = adjoint_printed(i, j, m, N)
    return p if p is not None else adjoint_generic(i, j, m, N)


# numerics -----------------------------------------------------------------


def h_generator_matrix(m: int, N: int, k: int) -> np.ndarray:
    M = np.zeros((N, N))
    for (a, b), c in _h_units(m, N, k).items():
        M[a - 1, b - 1] = float(c)
    return M


def group_matrix(m: int, N: int, x: Sequence[float]) -> np.ndarray:
    from scipy.linalg import expm

    X = sum(xk * h_generator_matrix(m, N, k) for k, xk in enumerate(x, 1))
    return expm(X)


def unit_dict_matrix(d: Mapping[Unit, ExpPoly], N: int, x: Sequence[float]) -> np.ndarray:
    point = {torus(k): float(v) for k, v in enumerate(x, 1)}
    M = np.zeros((N, N))
    for (a, b), c in d.items():
        M[a - 1, b - 1] = c.evaluate(point).real
    return M


def adjoint_numeric_error(i: int, j: int, m: int, N: int, x: Sequence[float], table=None) -> float:
    """max |g^{-1} E_ij g - formula| for a numeric point x."""
    g = group_matrix(m, N, x)
    E = np.zeros((N, N))
    E[i - 1, j - 1] = 1.0
    dense = np.linalg.solve(g, E @ g)
    d = table if table is not None else adjoint_action(i, j, m, N)
    return float(np.max(np.abs(dense - unit_dict_matrix(d, N, x))))


# ---------------------------------------------------------------------------
# universal enveloping algebra elements
# ---------------------------------------------------------------------------


class UElement:
    """Finite sum of words in the E_ij with ExpPoly coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Tuple[Unit, ...], object] | None = None):
        t: Dict[Tuple[Unit, ...], ExpPoly] = {}
        for w, c in (terms or {}).items():
            c = ExpPoly.coerce(c)
            v = t.get(tuple(w), EZERO) + c
            if v.is_zero():
                t.pop(tuple(w), None)
            else:
                t[tuple(w)] = v
        self.terms = t

    @staticmethod
    def unit(i: int, j: int) -> "UElement":
        return UElement({((i, j),): 1})

    @staticmethod
    def scalar(c) -> "UElement":
        return UElement({(): c})

    def __add__(self, o: "UElement") -> "UElement":
        t = dict(self.terms)
        for w, c in o.terms.items():
            t[w] = t.get(w, EZERO) + c
        return UElement(t)

    def __neg__(self) -> "UElement":
        return UElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, o: "UElement") -> "UElement":
        return self + (-o)

    def __mul__(self, o) -> "UElement":
        if isinstance(o, UElement):
            t: Dict[Tuple[Unit, ...], ExpPoly] = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in o.terms.items():
                    t[w1 + w2] = t.get(w1 + w2, EZERO) + c1 * c2
            return UElement(t)
        return UElement({w: c * ExpPoly.coerce(o) for w, c in self.terms.items()})

    def __rmul__(self, o) -> "UElement":
        return UElement({w: ExpPoly.coerce(o) * c for w, c in self.terms.items()})

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __eq__(self, o) -> bool:
        return isinstance(o, UElement) and self.terms == o.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            word = "*".join(f"E[{i},{j}]" for i, j in w) or "1"
            parts.append(f"[{self.terms[w]}]*{word}")
        return " + ".join(parts)

    @staticmethod
    def from_units(d: Mapping[Unit, ExpPoly]) -> "UElement":
        return UElement({(u,): c for u, c in d.items()})


def casimir(k: int, N: int) -> UElement:
    """C_1 = sum E_ii; C_2 = sum_{i<j}(E_ii E_jj - E_ji E_ij + r_i r_j) - sum r_i E_ii
    with r_i = (N+1-2i)/2."""
    if k == 1:
        out = UElement()
        for i in range(1, N + 1):
            out = out + UElement.unit(i, i)
        return out
    if k == 2:
        t: Dict[Tuple[Unit, ...], object] = {}
        const = Fraction(0)
        for i in range(1, N + 1):
            for j in range(i + 1, N + 1):
                t[((i, i), (j, j))] = 1
                t[((j, i), (i, j))] = -1
                const += rho_casimir(i, N) * rho_casimir(j, N)
            t[((i, i),)] = -rho_casimir(i, N)
        t[()] = const
        return UElement(t)
    raise ValueError("only C_1 and C_2 are available")


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Characters:
    """chi_L on n_- units and chi_R on n_+ units (values acting on psi)."""

    left: Dict[Unit, ParamScalar]
    right: Dict[Unit, ParamScalar]
    mode: str

    def __hash__(self):
        return hash((self.mode, tuple(sorted(self.left.items())), tuple(sorted(self.right.items()))))


@lru_cache(maxsize=None)
def _realized_characters(m: int, N: int) -> Characters:
    d = _decomposition(m, N)
    E = build_generators(N).ops
    psiL = build_whittaker_vector("L", m, N).value
    psiR = build_whittaker_vector("R", m, N).value
    left, right = {}, {}
    for u in d.n_minus:
        c = scalar_action(E[u], psiL)
        if c is None:
            raise ArithmeticError(f"E{u} does not act on psi_L by a scalar")
        left[u] = c
    for u in d.n_plus:
        c = scalar_action(E[u], psiR)
        if c is None:
            raise ArithmeticError(f"E{u} does not act on psi_R by a scalar")
        right[u] = c
    return Characters(left, right, "realized")


def printed_characters(m: int, N: int) -> Characters:
    """Values prescribed by the defining equations, extended by zero."""
    d = _decomposition(m, N)
    h, s = ParamScalar.h(), ParamScalar.sigma()
    left = {u: ZERO for u in d.n_minus}
    left[(m + 1, 1)] = h
    for j in range(m + 1, N):
        left[(j + 1, j)] = h
    right = {u: ZERO for u in d.n_plus}
    for i in range(2, m + 1):
        right[(i - 1, i)] = -h
    right[(m, N)] = s * h
    return Characters(left, right, "printed")


def characters(m: int, N: int, mode: str = "realized") -> Characters:
    check_mN(m, N)
    if mode == "realized":
        return _realized_characters(m, N)
    if mode == "printed":
        return printed_characters(m, N)
    raise ValueError(f"unknown character mode {mode!r}")


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

_RANK_Y = {"-": 0, "h": 1, "+": 2}


class _Reducer:
    def __init__(self, m: int, N: int, chars: Characters):
        self.m, self.N, self.chars = m, N, chars
        self.memo: Dict[Tuple[tuple, tuple], DiffOperator] = {}
        self.ad_inv: Dict[Letter, List[Tuple[Letter, ExpPoly]]] = {}
        self.ad: Dict[Letter, List[Tuple[Letter, ExpPoly]]] = {}

    def _ad_letters(self, L: Letter, inverse: bool) -> List[Tuple[Letter, ExpPoly]]:
        cache = self.ad_inv if inverse else self.ad
        if L not in cache:
            units = _conjugate(self.m, self.N, (L[1], L[2]), inverse)
            acc: Dict[Letter, ExpPoly] = {}
            for u, c in units.items():
                for M, w in _unit_to_letters(self.m, self.N, u).items():
                    acc[M] = acc.get(M, EZERO) + c * w
            cache[L] = sorted((M, c) for M, c in acc.items() if not c.is_zero())
        return cache[L]

    def _bracket(self, A: Letter, B: Letter):
        return _letter_bracket(self.m, self.N, A, B)

    def reduce(self, Y: tuple, Z: tuple, depth: int = 0) -> DiffOperator:
        key = (Y, Z)
        if key in self.memo:
            return self.memo[key]
        if depth > 200:
            raise RecursionError("reduction did not terminate")
        res = self._reduce(Y, Z, depth + 1)
        self.memo[key] = res
        return res

    def _reduce(self, Y: tuple, Z: tuple, depth: int) -> DiffOperator:
        if Y:
            if Y[0][0] == "-":
                chi = self.chars.left.get((Y[0][1], Y[0][2]), ZERO)
                if chi.is_zero():
                    return DZERO
                return self.reduce(Y[1:], Z, depth).scale(ExpPoly.const(-chi))
            p = next((i for i, L in enumerate(Y) if L[0] == "-"), None)
            if p is not None:
                U, V = Y[p - 1], Y[p]
                out = self.reduce(Y[: p - 1] + (V, U) + Y[p + 1 :], Z, depth)
                for L, c in self._bracket(U, V):
                    out = out + self.reduce(Y[: p - 1] + (L,) + Y[p + 1 :], Z, depth) * c
                return out
            V, Y0 = Y[-1], Y[:-1]
            if V[0] == "h":
                return diff_compose(DiffOperator.d(torus(V[1])), self.reduce(Y0, Z, depth))
            out = DZERO
            for L, c in self._ad_letters(V, inverse=True):
                out = out + self.reduce(Y0, (L,) + Z, depth).scale(c)
            return out
        if not Z:
            return DONE
        if Z[-1][0] == "+":
            chi = self.chars.right.get((Z[-1][1], Z[-1][2]), ZERO)
            if chi.is_zero():
                return DZERO
            return self.reduce((), Z[:-1], depth).scale(ExpPoly.const(chi))
        p = max((i for i, L in enumerate(Z) if L[0] == "+"), default=None)
        if p is not None:
            V, U = Z[p], Z[p + 1]
            out = self.reduce((), Z[:p] + (U, V) + Z[p + 2 :], depth)
            for L, c in self._bracket(V, U):
                out = out + self.reduce((), Z[:p] + (L,) + Z[p + 2 :], depth) * c
            return out
        p = next((i for i in range(len(Z) - 1) if Z[i][0] == "-" and Z[i + 1][0] == "h"), None)
        if p is not None:
            V, U = Z[p], Z[p + 1]
            out = self.reduce((), Z[:p] + (U, V) + Z[p + 2 :], depth)
            for L, c in self._bracket(V, U):
                out = out + self.reduce((), Z[:p] + (L,) + Z[p + 2 :], depth) * c
            return out
        if Z[0][0] == "h":
            return diff_compose(DiffOperator.d(torus(Z[0][1])), self.reduce((), Z[1:], depth))
        out = DZERO
        for L, c in self._ad_letters(Z[0], inverse=False):
            out = out + self.reduce((L,), Z[1:], depth).scale(c)
        return out

    def reduce_word(self, word: Sequence[Unit]) -> DiffOperator:
        """<E_{u1} ... E_{uk} g> expanded through the letter basis."""
        expansions = [list(_unit_to_letters(self.m, self.N, u).items()) for u in word]
        out = DZERO

        def rec(i, letters, coeff):
            nonlocal out
            if i == len(expansions):
                out = out + self.reduce(tuple(letters), ()) * coeff
                return
            for L, c in expansions[i]:
                rec(i + 1, letters + [L], coeff * c)

        rec(0, [], Fraction(1))
        return out


@lru_cache(maxsize=None)
def _reducer(m: int, N: int, mode: str) -> _Reducer:
    return _Reducer(m, N, characters(m, N, mode))


def reduce_matrix_element(X: UElement, m: int, N: int, mode: str = "realized") -> DiffOperator:
    """D with <X g> = D <g>, in the torus coordinates ("t", k)."""
    check_mN(m, N)
    if X.degree > 2:
        raise NotImplementedError("only elements of degree <= 2 are supported")
    R = _reducer(m, N, mode)
    out = DZERO
    for w, c in X.terms.items():
        out = out + R.reduce_word(w).scale(c)
    return out


# ---------------------------------------------------------------------------
# Lax operator and Hamiltonians
# ---------------------------------------------------------------------------

HBAR = ParamScalar.h(-1)


def _scale_params(D: DiffOperator, c: ParamScalar) -> DiffOperator:
    return D.scale(ExpPoly.const(c))


@dataclass
class LaxOperatorMatrix:
    m: int
    N: int
    entries: Dict[Unit, DiffOperator]

    def __getitem__(self, ij: Unit) -> DiffOperator:
        return self.entries[ij]

    def zero_pattern(self) -> Dict[Unit, bool]:
        return {k: v.is_zero() for k, v in self.entries.items()}


def lax_operator(m: int, N: int, mode: str = "realized") -> LaxOperatorMatrix:
    """L_ij = hbar * <E_ij g> / <g> as operators."""
    check_mN(m, N)
    ent = {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            ent[(i, j)] = _scale_params(reduce_matrix_element(UElement.unit(i, j), m, N, mode), HBAR)
    return LaxOperatorMatrix(m, N, ent)


def prefactor_shift(m: int, N: int) -> Fraction:
    return Fraction(m * (N - m), 2)


GAUGES = ("none", "prefactor", "balanced")


def gauge_exponents(m: int, N: int, gauge: str) -> Tuple[Fraction, Fraction]:
    """(a, b) such that the gauge function is exp(a x_1 + b x_N).

    "prefactor" is the Whittaker-function prefactor exp(-x_1 m(N-m)/2);
    "balanced" is exp((N-1)(x_1 - x_N)/2), the torus gauge that removes the
    constant-coefficient first-order terms of H_2 and leaves H_1 unshifted.
    """
    if gauge == "none":
        return Fraction(0), Fraction(0)
    if gauge == "prefactor":
        return -prefactor_shift(m, N), Fraction(0)
    if gauge == "balanced":
        k = Fraction(N - 1, 2)
        return k, -k
    raise ValueError(f"unknown gauge {gauge!r}; expected one of {GAUGES}")


def apply_gauge(D: DiffOperator, m: int, N: int, gauge: str) -> DiffOperator:
    """phi o D o phi^{-1}: the operator acting on phi * <g>."""
    a, b = gauge_exponents(m, N, gauge)
    if a:
        D = conjugate_by_exp(D, torus(1), -a)
    if b:
        D = conjugate_by_exp(D, torus(N), -b)
    return D


def hamiltonian(k: int, m: int, N: int, gauge: str = "prefactor", mode: str = "realized") -> DiffOperator:
    """hbar^k <C_k g> / <g>, transported to Psi = phi <g> for the chosen
    gauge function phi."""
    check_mN(m, N)
    D = reduce_matrix_element(casimir(k, N), m, N, mode)
    D = _scale_params(D, ParamScalar.h(-k))
    return apply_gauge(D, m, N, gauge)


def casimir_trace(m: int, N: int, mode: str = "realized") -> Dict[str, DiffOperator]:
    """Intermediate pieces of <C_2 g>: C_I = sum_{i<j} E_ii E_jj,
    C_II = sum_{i<j} E_ji E_ij, C_III = sum_i r_i E_ii."""
    CI, CII, CIII = UElement(), UElement(), UElement()
    for i in range(1, N + 1):
        CIII = CIII + UElement.unit(i, i) * ExpPoly.const(rho_casimir(i, N))
        for j in range(i + 1, N + 1):
            CI = CI + UElement({((i, i), (j, j)): 1})
            CII = CII + UElement({((j, i), (i, j)): 1})
    out = {name: reduce_matrix_element(X, m, N, mode) for name, X in (("C_I", CI), ("C_II", CII), ("C_III", CIII))}
    for k in range(2, m + 1):
        out[f"E[{k},1]E[1,{k}]"] = reduce_matrix_element(UElement({((k, 1), (1, k)): 1}), m, N, mode)
    out[f"E[{m + 1},1]E[1,{m + 1}]"] = reduce_matrix_element(UElement({((m + 1, 1), (1, m + 1)): 1}), m, N, mode)
    for i in range(m + 1, N):
        out[f"E[{i + 1},{i}]E[{i},{i + 1}]"] = reduce_matrix_element(UElement({((i + 1, i), (i, i + 1)): 1}), m, N, mode)
    return out


# ---------------------------------------------------------------------------
# printed tables
# ---------------------------------------------------------------------------


def _d(k: int, coeff=1) -> DiffOperator:
    return DiffOperator.d(torus(k), 1, coeff)


def _hd(k: int, coeff=1) -> DiffOperator:
    return DiffOperator.d(torus(k), 1, ExpPoly.coerce(coeff) * HBAR)


def _kron(a, b) -> int:
    return 1 if a == b else 0


def printed_lax_operator(m: int, N: int, literal: bool = False) -> Dict[Unit, DiffOperator]:
    """The tabulated quantum Lax operator; entries it does not list are absent.

    The table writes some derivative terms without their hbar.  Unless
    ``literal`` is set, every first-order term of L_{1k} and the x_a d_a
    terms of L_NN get the hbar carried by all other derivative entries.
    """
    x = _x
    dd = _d if literal else _hd
    s = ExpPoly.const(ParamScalar.sigma())
    q = ExpPoly.exp({torus(N): 1, torus(1): -1})
    L: Dict[Unit, DiffOperator] = {}
    for k in range(1, m + 1):
        L[(k, 1)] = _hd(k)
    L[(m + 1, 1)] = DiffOperator.mult(-1)
    for k in range(m + 2, N + 1):
        L[(k, 1)] = DZERO
    for j in range(2, m + 1):
        for k in range(j, N + 1):
            L[(k, j)] = DZERO
    for a in range(m + 1, N):
        L[(a + 1, a)] = DiffOperator.mult(-1)
        for k in range(a + 2, N + 1):
            L[(k, a)] = DZERO
    for k in range(2, m + 1):
        op = DiffOperator.mult(-_kron(k, 2) + (1 - _kron(k, m)) * x(k + 1) if k < N else -_kron(k, 2))
        op = op + dd(1, x(k))
        for n in range(2, m + 1):
            op = op + dd(n, x(k) * x(n))
        L[(1, k)] = op
    for k in range(2, m):
        for i in range(k + 1, m + 1):
            L[(k, i)] = DiffOperator.mult(_kron(i, k + 1)) + _hd(k, x(i))
    for a in range(m + 1, N):
        L[(1, a)] = DiffOperator.mult(-s * x(a) * x(m) * q)
        for k in range(2, m):
            L[(k, a)] = DZERO
        L[(m, a)] = DiffOperator.mult(s * x(a) * q)
    L[(m, N)] = DiffOperator.mult(-s * q)
    for a in range(m + 1, N):
        L[(a, a)] = _hd(a, x(a))
        L[(a, N)] = _hd(a)
    op = _hd(N)
    for a in range(m + 1, N):
        op = op - dd(a, x(a))
    L[(N, N)] = op
    return L


def printed_matrix_elements(m: int, N: int) -> Dict[Unit, DiffOperator]:
    """The tabulated reductions <E_ij g> / <g>."""
    x = _x
    h = ExpPoly.const(ParamScalar.h())
    s = ExpPoly.const(ParamScalar.sigma())
    q = ExpPoly.exp({torus(N): 1, torus(1): -1})
    out: Dict[Unit, DiffOperator] = {(1, 1): _d(1)}
    for k in range(2, m + 1):
        op = DiffOperator.mult(h * (-_kron(k, 2)) + (h * x(k + 1) * (1 - _kron(k, m)) if k < N else EZERO))
        op = op + _d(1, x(k))
        for n in range(2, m + 1):
            op = op + _d(n, x(k) * x(n))
        out[(1, k)] = op
    for k in range(2, m + 1):
        for i in range(k + 1, m + 1):
            out[(k, i)] = DiffOperator.mult(h * (-_kron(i, k + 1))) + _d(k, x(i))
    for a in range(m + 1, N):
        out[(1, a)] = DiffOperator.mult(-s * x(a) * x(m) * q)
        out[(m, a)] = DiffOperator.mult(s * x(a) * q)
    out[(1, N)] = DiffOperator.mult(-s * x(m) * q)
    out[(m, N)] = DiffOperator.mult(s * q)
    for a in range(m + 1, N):
        for i in range(a, N):
            out[(a, i)] = _d(a, x(i))
    op = _d(N)
    for a in range(m + 1, N):
        op = op - _d(a, x(a))
    out[(N, N)] = op
    return out


def _pow_x(k: int, e: int) -> ExpPoly:
    return _x(k) ** e


def printed_hamiltonian(k: int, m: int, N: int) -> DiffOperator:
    """The tabulated H_1 or H_2, transcribed term by term."""
    hb = ExpPoly.const(HBAR)
    if k == 1:
        return _d(1, hb) + _d(N, hb)
    if k != 2:
        raise ValueError("only H_1 and H_2 are tabulated")
    hb2 = hb * hb
    D = DiffOperator
    inner = diff_compose(_d(1), _d(N))
    for i in range(1, m + 1):
        for j in range(i, m + 1):
            left = _d(i, (-_x(i)) ** (1 - _kron(i, 1)))
            inner = inner + diff_compose(left, _d(j, _x(j)))
    for i in range(m + 1, N + 1):
        for j in range(i, N + 1):
            inner = inner + diff_compose(_d(i, _x(i)), _d(j, _pow_x(j, 1 - _kron(j, N))))
    for kk in range(1, m + 1):
        inner = inner - _d(kk, _x(kk) * (kk - 1))
    for kk in range(m + 1, N + 1):
        inner = inner - _d(kk, _x(kk) * (N + 1 - kk))
    out = inner.scale(hb2)
    mid = DZERO
    for i in range(1, m):
        mid = mid + _d(i + 1, (-_x(i)) ** (1 - _kron(i, 1)))
    for j in range(m + 1, N):
        mid = mid + _d(j, _pow_x(j + 1, 1 - _kron(j, N - 1)))
    out = out - mid.scale(hb)
    sign = (-1) ** _kron(m, N - 1)
    pot = ExpPoly.const(ParamScalar.sigma() * sign) * _pow_x(m, 1 - _kron(m, 1)) * _pow_x(m + 1, 1 - _kron(m, N - 1))
    pot = pot * ExpPoly.exp({torus(N): 1, torus(1): -1})
    out = out + D.mult(pot)
    out = out - D.mult(hb2 * Fraction((N - 1) * (N - 2) * (N - 3), 24))
    return out


def operator_terms(D: DiffOperator) -> Dict[tuple, ParamScalar]:
    """Flatten an operator into {(derivative key, exp key, pow key): scalar}."""
    out = {}
    for key, c in D.terms():
        for mono in c.monomials():
            out[(key, mono.exps, mono.pows)] = mono.coeff
    return out


def term_status(realized: ParamScalar, printed: ParamScalar, sign_value: Optional[int]) -> str:
    if sign_value is not None:
        realized = realized.subs(s=sign_value)
        printed = printed.subs(s=sign_value)
    if realized == printed:
        return "match"
    if not realized.is_zero() and not printed.is_zero():
        s = ParamScalar.sigma()
        for c in (-printed, s * printed, -s * printed):
            c = c if sign_value is None else c.subs(s=sign_value)
            if realized == c:
                return "sign-deviation"
    return "fail"


def compare_operators(realized: DiffOperator, printed: DiffOperator, sign_value: Optional[int] = None) -> Tuple[str, List[dict]]:
    """Entry status and the list of differing terms.

    Terms are compared monomial by monomial; a term that differs only by a
    sign (or by the sign symbol) is a sign deviation.
    """
    from .serialize import diffop_to_text

    r, p = operator_terms(realized), operator_terms(printed)
    worst = "match"
    diffs = []
    rank = {"match": 0, "sign-deviation": 1, "fail": 2}
    for key in sorted(set(r) | set(p), key=repr):
        a, b = r.get(key, ZERO), p.get(key, ZERO)
        st = term_status(a, b, sign_value)
        if sign_value is not None:
            a, b = a.subs(s=sign_value), b.subs(s=sign_value)
        if st != "match":
            dk, ek, pk = key
            mono = DiffOperator({dk: ExpPoly({(ek, pk): ONE})})
            diffs.append({"term": diffop_to_text(mono), "realized": str(a), "printed": str(b), "status": st})
            if rank[st] > rank[worst]:
                worst = st
    return worst, diffs


@dataclass
class LaxEntryComparison:
    entry: Unit
    realized: DiffOperator
    printed: Optional[DiffOperator]
    status: str  # match | sign-deviation | fail | unlisted
    zero_pattern_ok: bool
    differences: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "entry": f"L[{self.entry[0]},{self.entry[1]}]",
            "realized": str(self.realized),
            "printed": None if self.printed is None else str(self.printed),
            "status": self.status,
            "zero_pattern_ok": self.zero_pattern_ok,
            "differences": self.differences,
        }


def _subs_sign(D: DiffOperator, sign_value: int) -> DiffOperator:
    return D.map_coeffs(lambda e: e.map_coeffs(lambda c: c.subs(s=sign_value)))


def compare_lax(m: int, N: int, mode: str = "realized", sign_value: Optional[int] = None, literal: bool = False) -> List[LaxEntryComparison]:
    L = lax_operator(m, N, mode)
    P = printed_lax_operator(m, N, literal)
    out = []
    for ij in sorted(L.entries):
        real = L[ij]
        if ij not in P:
            out.append(LaxEntryComparison(ij, real, None, "unlisted", True))
            continue
        st, diffs = compare_operators(real, P[ij], sign_value)
        zp = real.is_zero() == P[ij].is_zero()
        printed = P[ij] if sign_value is None else _subs_sign(P[ij], sign_value)
        out.append(LaxEntryComparison(ij, real, printed, st, zp, diffs))
    return out


@dataclass
class HamiltonianComparison:
    k: int
    m: int
    N: int
    realized: DiffOperator
    printed: DiffOperator
    status: str
    differences: List[dict]
    realized_constant: ParamScalar
    printed_constant: ParamScalar

    @property
    def constant_matches(self) -> bool:
        return self.realized_constant == self.printed_constant

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "n": self.N,
            "realized": str(self.realized),
            "printed": str(self.printed),
            "status": self.status,
            "differences": self.differences,
            "realized_constant": str(self.realized_constant),
            "printed_constant": str(self.printed_constant),
        }


def compare_hamiltonian(k: int, m: int, N: int, gauge: str = "balanced", mode: str = "realized", sign_value: Optional[int] = None) -> HamiltonianComparison:
    H = hamiltonian(k, m, N, gauge=gauge, mode=mode)
    P = printed_hamiltonian(k, m, N)
    st, diffs = compare_operators(H, P, sign_value)
    return HamiltonianComparison(k, m, N, H, P, st, diffs, H.coefficient(()).scalar(), P.coefficient(()).scalar())


# ---------------------------------------------------------------------------
# centrality of the realized Casimirs
# ---------------------------------------------------------------------------


def realized_casimir(k: int, N: int) -> DiffOperator:
    """C_k built from the Gelfand-Zetlin operators by composition."""
    E = build_generators(N).ops
    X = casimir(k, N)
    out = DZERO
    for word, c in X.terms.items():
        op = DONE
        for u in word:
            op = diff_compose(op, E[u])
        out = out + op.scale(c)
    return out


def verify_centrality(N: int, k: int = 2) -> Dict[Unit, bool]:
    """[C_k, E] == 0 for E_ii and the Chevalley generators E_{i,i+1}, E_{i+1,i}."""
    E = build_generators(N).ops
    C = realized_casimir(k, N)
    units = [(i, i) for i in range(1, N + 1)]
    units += [(i, i + 1) for i in range(1, N)] + [(i + 1, i) for i in range(1, N)]
    return {u: diff_commutator(C, E[u]).is_zero() for u in units}


def reduction_consistency(m: int, N: int, mode: str = "realized") -> List[Tuple[Unit, Unit]]:
    """Pairs (a, b) for which <(E_a E_b - E_b E_a) g> != <[E_a, E_b] g>."""
    bad = []
    units = [(i, j) for i in range(1, N + 1) for j in range(1, N + 1)]
    for a in units:
        for b in units:
            if b <= a:
                continue
            lhs = reduce_matrix_element(UElement({(a, b): 1, (b, a): -1}), m, N, mode)
            br = UElement()
            if a[1] == b[0]:
                br = br + UElement.unit(a[0], b[1])
            if b[1] == a[0]:
                br = br - UElement.unit(b[0], a[1])
            if not (lhs - reduce_matrix_element(br, m, N, mode)).is_zero():
                bad.append((a, b))
    return bad


# ---------------------------------------------------------------------------
# specialized Lax matrix and quantum cohomology
# ---------------------------------------------------------------------------


def _sympy():
    import sympy

    return sympy


def lax_symbols(N: int):
    sp = _sympy()
    p = sp.symbols(f"p1:{N + 1}")
    return p, sp.Symbol("q"), sp.Symbol("lam"), sp.Symbol("s")


def specialized_lax(m: int, N: int, sign=None):
    """The specialized Lax matrix (x_2 = .. = x_{N-1} = 0, q = e^{-x_1}).

    ``sign`` is the value of the sign symbol; None keeps it symbolic.
    Unlisted entries are zero except L_NN = p_N.
    """
    check_mN(m, N)
    sp = _sympy()
    p, q, _, s = lax_symbols(N)
    sv = s if sign is None else sp.Integer(sign)
    L = sp.zeros(N, N)
    for k in range(1, m + 1):
        L[k - 1, 0] = p[k - 1]
    L[m, 0] = -1
    for a in range(m + 1, N):
        L[a, a - 1] = -1
    for i in range(1, m):
        L[i - 1, i] = -1
    for a in range(m + 1, N):
        L[a - 1, N - 1] = -p[a - 1]
    L[m - 1, N - 1] = -sv * q
    L[N - 1, N - 1] = p[N - 1]
    return L


def char_poly(L, lam=None):
    """det(lam + L), expanded, with s^2 reduced to 1."""
    sp = _sympy()
    n = L.shape[0]
    lam = lam if lam is not None else sp.Symbol("lam")
    M = L + lam * sp.eye(n)
    d = sp.expand(M.det(method="berkowitz"))
    s = sp.Symbol("s")
    if d.has(s):
        d = sp.expand(sp.Poly(d, s).rem(sp.Poly(s**2 - 1, s)).as_expr())
    return d


def char_poly_coefficients(m: int, N: int, sign=None) -> list:
    """[c_1, .., c_N] with det(lam + L) = lam^N + sum c_k lam^{N-k}."""
    sp = _sympy()
    p, q, lam, s = lax_symbols(N)
    d = sp.Poly(char_poly(specialized_lax(m, N, sign), lam), lam)
    return [sp.expand(d.coeff_monomial(lam ** (N - k))) for k in range(1, N + 1)]


def sigma_symbols(m: int):
    return _sympy().symbols(f"sigma1:{m + 1}")


def whitney_sequence(m: int, upto: int) -> list:
    """Y_0 .. Y_upto with Y_k = sum_i (-1)^{i-1} sigma_i Y_{k-i}."""
    sp = _sympy()
    sig = sigma_symbols(m)
    Y = [sp.Integer(1)]
    for k in range(1, upto + 1):
        Y.append(sp.expand(sum((-1) ** (i - 1) * sig[i - 1] * Y[k - i] for i in range(1, min(k, m) + 1))))
    return Y


def qh_presentation(m: int, N: int) -> list:
    """Ideal generators of the small quantum cohomology of Gr(m, N)."""
    check_mN(m, N)
    sp = _sympy()
    q = sp.Symbol("q")
    Y = whitney_sequence(m, N)
    gens = [Y[k] for k in range(N - m + 1, N)]
    gens.append(sp.expand(Y[N] - (-1) ** (m - 1) * q))
    return gens


@dataclass
class CharPolyComparison:
    m: int
    N: int
    found: bool
    sign: Optional[int] = None
    substitution: Dict[str, str] = field(default_factory=dict)
    tried: int = 0

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.N, "found": self.found, "sign": self.sign, "substitution": self.substitution, "tried": self.tried}


def _ideal_equal(A: list, B: list, gens) -> bool:
    sp = _sympy()
    A = [a for a in A if a != 0]
    B = [b for b in B if b != 0]
    GA = sp.groebner(A, *gens, order="grevlex") if A else None
    GB = sp.groebner(B, *gens, order="grevlex") if B else None
    if GA is None or GB is None:
        return GA is None and GB is None
    return all(GB.reduce(a)[1] == 0 for a in A) and all(GA.reduce(b)[1] == 0 for b in B)


def compare_charpoly_qh(m: int, N: int) -> CharPolyComparison:
    """Search p_k -> +-sigma_k (k <= m), p_a -> +-Y_{N+1-a} (a > m) and the
    sign value for which the char-poly coefficient ideal equals the quantum
    cohomology ideal.  Y_k is the complete symmetric function written in the
    sigma_i, i.e. the Whitney sequence."""
    from itertools import product

    sp = _sympy()
    p, q, lam, s = lax_symbols(N)
    sig = sigma_symbols(m)
    Y = whitney_sequence(m, N)
    base = list(sig) + [Y[N + 1 - a] for a in range(m + 1, N + 1)]
    target = qh_presentation(m, N)
    gens = list(sig) + [q]
    GT = sp.groebner(target, *gens, order="grevlex")
    tried = 0
    for sign in (1, -1):
        coeffs = char_poly_coefficients(m, N, sign)
        for signs in product((1, -1), repeat=N):
            tried += 1
            sub = {p[i]: signs[i] * base[i] for i in range(N)}
            cs = [sp.expand(c.subs(sub)) for c in coeffs]
            if any(GT.reduce(c)[1] != 0 for c in cs):
                continue
            if _ideal_equal(cs, target, gens):
                return CharPolyComparison(m, N, True, sign, {str(p[i]): str(sub[p[i]]) for i in range(N)}, tried)
    return CharPolyComparison(m, N, False, None, {}, tried)
