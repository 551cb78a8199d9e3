"""Gauss-Givental realization of gl_N and the Gr(m,N) Whittaker vectors.

Generators act on functions of the Gelfand-Zetlin coordinates x_{n,i},
1 <= i <= n <= N-1; row N is pinned to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .gzpaths import RelationReport, check_mN, path_P, path_Pt, realization_lookup
from .symkernel import (
    DZERO,
    ONE,
    ZERO,
    DiffOperator,
    EZERO,
    ExpFunction,
    ExpPoly,
    ParamScalar,
    diff_apply,
    diff_commutator,
    gz,
    mu,
    rho,
)

Unit = Tuple[int, int]


def _x(N: int, n: int, k: int) -> Optional[tuple]:
    """Variable of vertex (n, k); None when pinned (row N)."""
    if n == N:
        return None
    if not 1 <= k <= n <= N - 1:
        raise ValueError(f"vertex ({n},{k}) is outside the graph")
    return gz(n, k)


def _d(N: int, n: int, k: int) -> DiffOperator:
    """d/dx_{n,k}; zero for off-graph or pinned vertices."""
    if 1 <= k <= n <= N - 1:
        return DiffOperator.d(gz(n, k))
    return DZERO


def _e(N: int, plus: Tuple[int, int], minus: Tuple[int, int]) -> ExpPoly:
    ex: Dict[tuple, int] = {}
    for (n, k), sgn in ((plus, 1), (minus, -1)):
        v = _x(N, n, k)
        if v is not None:
            ex[v] = ex.get(v, 0) + sgn
    return ExpPoly.exp(ex)


def chevalley_generator(N: int, i: int, j: int) -> DiffOperator:
    """E_{ii}, E_{i,i+1} or E_{i+1,i} as first-order operators."""
    if i == j:
        out = DiffOperator.mult(mu(i, N))
        for k in range(1, i):
            out = out - _d(N, N + k - i, k)
        for k in range(i, N):
            out = out + _d(N, k, i)
        return out
    if j == i + 1:
        out = DZERO
        for n in range(1, i + 1):
            inner = DZERO
            for k in range(1, n + 1):
                inner = inner + _d(N, N - 1 - i + k, k) - _d(N, N - 1 - i + k, k - 1)
            out = out - inner.scale(_e(N, (N - 1 - i + n, n), (N - i + n, n)))
        return out
    if i == j + 1:
        a = j
        out = DZERO
        for n in range(1, N - a + 1):
            inner = DiffOperator.mult(mu(a, N) - mu(a + 1, N))
            for k in range(1, n + 1):
                inner = inner + _d(N, a + k - 1, a) - _d(N, a + k - 1, a + 1)
            out = out + inner.scale(_e(N, (n + a, a + 1), (n + a - 1, a)))
        return out
    raise ValueError(f"E_{i}{j} is not a Chevalley generator")


def _D(N: int, n: int, j: int) -> DiffOperator:
    out = _d(N, n + 1 - j, 1)
    for i in range(1, j):
        out = out + _d(N, n + 1 + i - j, i + 1) - _d(N, n + 1 + i - j, i)
    return out


def _Dt(N: int, n: int, j: int) -> DiffOperator:
    out = DiffOperator.mult(mu(j, N) - mu(j + 1, N)) + _d(N, j, j)
    for i in range(1, n - j + 1):
        out = out + _d(N, i + j, j) - _d(N, i + j, j + 1)
    return out


def combinatorial_generator(N: int, n: int, j: int, rule: str = "weak") -> DiffOperator:
    """Off-diagonal E_{n,j} from sums of path functions over the GZ graph.

    ``rule`` selects the partition sets of the weak sums (see gzpaths.RULES);
    the unit-step rule reproduces the generators only for N <= 4.
    """
    look = realization_lookup(N)
    out = DZERO
    if n > j:
        for k in range(j, n):
            sign = (-1) ** (k - j)
            for i in range(0, N - n + 1):
                coeff = path_Pt(N, n - j, k + i, k, j, look, rule)
                if coeff:
                    out = out + _Dt(N, k + i, k).scale(coeff * sign)
        return out
    if n < j:
        for k in range(1, j - n + 1):
            sign = (-1) ** k
            for jj in range(0, n):
                coeff = path_P(N, j - n, N + k - j + jj, jj + 1, N - n, look, rule)
                if coeff:
                    out = out + _D(N, N - j + k + jj, jj + 1).scale(coeff * sign)
        return out
    raise ValueError("diagonal generators have no path form")


@dataclass
class GeneratorTable:
    N: int
    ops: Dict[Unit, DiffOperator]

    def __getitem__(self, ij: Unit) -> DiffOperator:
        return self.ops[ij]

    def chevalley(self) -> Dict[Unit, DiffOperator]:
        return {k: v for k, v in self.ops.items() if abs(k[0] - k[1]) <= 1}


@lru_cache(maxsize=None)
def _table(N: int) -> Dict[Unit, DiffOperator]:
    ops: Dict[Unit, DiffOperator] = {}
    for i in range(1, N + 1):
        ops[(i, i)] = chevalley_generator(N, i, i)
    for i in range(1, N):
        ops[(i, i + 1)] = chevalley_generator(N, i, i + 1)
        ops[(i + 1, i)] = chevalley_generator(N, i + 1, i)
    for gap in range(2, N):
        for i in range(1, N - gap + 1):
            j = i + gap
            ops[(i, j)] = diff_commutator(ops[(i, j - 1)], ops[(j - 1, j)])
            ops[(j, i)] = diff_commutator(ops[(j, j - 1)], ops[(j - 1, i)])
    return ops


def build_generators(N: int) -> GeneratorTable:
    """All E_{ij}; the non-Chevalley ones are iterated commutators."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return GeneratorTable(N, dict(_table(N)))


def verify_construction_agreement(N: int, rule: str = "weak") -> RelationReport:
    """Commutator closure against the path-sum formula for every E_{n,j}, n != j."""
    table = build_generators(N)
    rep = RelationReport()
    for (n, j), op in sorted(table.ops.items()):
        if n == j:
            continue
        res = op - combinatorial_generator(N, n, j, rule)
        rep.add("path-form", {"n": n, "j": j}, "0" if res.is_zero() else str(res))
    return rep


def verify_chevalley_relations(N: int) -> RelationReport:
    """gl_N relations among the Chevalley generators, including Serre."""
    if N < 2:
        raise ValueError("N must be at least 2")
    E = build_generators(N).ops
    rep = RelationReport()

    def check(rid, idx, lhs, rhs):
        res = lhs - rhs
        rep.add(rid, idx, "0" if res.is_zero() else str(res))

    def kron(a, b):
        return 1 if a == b else 0

    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i < j:
                check("cartan", {"i": i, "j": j}, diff_commutator(E[(i, i)], E[(j, j)]), DZERO)
            if j < N:
                c = kron(i, j) - kron(i, j + 1)
                check("cartan-raise", {"i": i, "j": j}, diff_commutator(E[(i, i)], E[(j, j + 1)]), E[(j, j + 1)] * c)
                check("cartan-lower", {"i": i, "j": j}, diff_commutator(E[(i, i)], E[(j + 1, j)]), E[(j + 1, j)] * (-c))
    for i in range(1, N):
        for j in range(1, N):
            rhs = E[(i, i)] - E[(i + 1, i + 1)] if i == j else DZERO
            check("raise-lower", {"i": i, "j": j}, diff_commutator(E[(i, i + 1)], E[(j + 1, j)]), rhs)
            if abs(i - j) >= 2:
                check("far-raise", {"i": i, "j": j}, diff_commutator(E[(i, i + 1)], E[(j, j + 1)]), DZERO)
                check("far-lower", {"i": i, "j": j}, diff_commutator(E[(i + 1, i)], E[(j + 1, j)]), DZERO)
            if abs(i - j) == 1:
                up, low = E[(i, i + 1)], E[(i + 1, i)]
                check("serre-raise", {"i": i, "j": j}, diff_commutator(up, diff_commutator(up, E[(j, j + 1)])), DZERO)
                check("serre-lower", {"i": i, "j": j}, diff_commutator(low, diff_commutator(low, E[(j + 1, j)])), DZERO)
    return rep


# ---------------------------------------------------------------------------
# Whittaker vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaFactor:
    """hbar**hbar_power * Gamma(argument), both affine in nu."""

    hbar_power: ParamScalar
    argument: ParamScalar

    def __str__(self):
        return f"hbar^({self.hbar_power})*Gamma({self.argument})"


@dataclass(frozen=True)
class WhittakerVector:
    side: str
    m: int
    N: int
    value: ExpFunction
    normalization: Tuple[GammaFactor, ...]  # the vector is value / prod(normalization)


def normalization_factors(side: str, m: int, N: int) -> Tuple[GammaFactor, ...]:
    nu = ParamScalar.nu
    out = []
    if side == "L":
        for i in range(N - m + 1, N + 1):
            for j in range(i + 1, N + 1):
                out.append(GammaFactor(ParamScalar.const(rho(i, N)) - nu(j), -nu(j) - rho(i, N)))
    else:
        for i in range(m + 1, N + 1):
            for j in range(i + 1, N + 1):
                out.append(GammaFactor(nu(j) - rho(i, N), ParamScalar.const(rho(i, N)) - nu(j)))
    return tuple(out)


def _psi_parts(side: str, m: int, N: int):
    h = ParamScalar.h()
    lin: Dict[tuple, ParamScalar] = {}

    def add_lin(v, c):
        lin[v] = lin.get(v, ZERO) + c

    ex = EZERO

    def add_exp(plus=None, minus=None):
        nonlocal ex
        d: Dict[tuple, int] = {}
        if plus is not None:
            d[gz(*plus)] = d.get(gz(*plus), 0) + 1
        if minus is not None:
            d[gz(*minus)] = d.get(gz(*minus), 0) - 1
        ex = ex + ExpPoly.exp(d, -h)

    if side == "L":
        for n in range(1, N):
            for i in range(1, n + 1):
                add_lin(gz(n, i), -(mu(n, N) - mu(n + 1, N)))
        for k in range(1, m):
            add_lin(gz(N - k, 1), mu(N - k, N))
        add_exp(plus=(N - m, 1))
        for k in range(1, m + 1):
            for i in range(1, N - m):
                add_exp((i + k - 1, k), (i + k, k))
        for k in range(m + 1, N):
            add_exp(plus=(N - 1, k))
            for i in range(1, N - k):
                add_exp((i + k - 1, k), (i + k, k))
    elif side == "R":
        for k in range(m + 1, N):
            add_lin(gz(k, k), -mu(k, N))
        add_exp(minus=(m, m))
        for k in range(1, N - m + 1):
            for i in range(1, m):
                add_exp((k + i, i + 1), (k + i - 1, i))
        for k in range(1, m):
            add_exp(minus=(N - 1, k))
            for i in range(1, k):
                add_exp((N - k + i, i + 1), (N - k + i - 1, i))
    else:
        raise ValueError("side must be 'L' or 'R'")
    return lin, ex


def build_whittaker_vector(side: str, m: int, N: int) -> WhittakerVector:
    check_mN(m, N)
    lin, ex = _psi_parts(side, m, N)
    f = ExpFunction(ExpPoly.const(1), tuple(lin.items()), ex)
    return WhittakerVector(side, m, N, f, normalization_factors(side, m, N))


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


def listed_generators(side: str, m: int, N: int) -> List[Unit]:
    """Generators named in the defining equations of each vector."""
    if side == "L":
        return [(m + 1, 1)] + [(k, i) for i in range(2, m + 1) for k in range(i, N + 1)] + [(j + 1, j) for j in range(m + 1, N)]
    return [(i - 1, i) for i in range(2, m + 1)] + [(k, j) for j in range(m + 1, N) for k in range(1, j + 1)] + [(m, N)]


def printed_scalar(side: str, m: int, N: int, ij: Unit) -> ParamScalar:
    """Value prescribed by the defining equations (s is the sign symbol)."""
    h = ParamScalar.h()
    i, j = ij
    if side == "L":
        if ij == (m + 1, 1) or (i == j + 1 and m + 1 <= j <= N - 1):
            return h
        return ZERO
    if ij == (m, N):
        return ParamScalar.sigma() * h
    if j == i + 1 and 2 <= j <= m:
        return -h
    return ZERO


def classify(realized: ParamScalar, printed: ParamScalar, sign_value: Optional[int] = None) -> str:
    """match / sign-deviation / fail between a realized and printed scalar.

    With ``sign_value`` given (+1 or -1), the sign symbol is evaluated first.
    """
    if sign_value is not None:
        printed = printed.subs(s=sign_value)
    if realized == printed:
        return "match"
    if realized.is_zero() or printed.is_zero():
        return "fail"
    for cand in (-printed, printed * ParamScalar.sigma(), -printed * ParamScalar.sigma()):
        c = cand if sign_value is None else cand.subs(s=sign_value)
        if realized == c:
            return "sign-deviation"
    return "fail"


@dataclass
class CharacterEntry:
    generator: Unit
    side: str
    realized: Optional[ParamScalar]  # None when the action is not scalar
    printed: ParamScalar
    status: str

    def to_json(self) -> dict:
        return {
            "generator": f"E[{self.generator[0]},{self.generator[1]}]",
            "side": self.side,
            "realized_scalar": None if self.realized is None else str(self.realized),
            "printed_scalar": str(self.printed),
            "match": self.status,
        }


@dataclass
class CharacterTable:
    m: int
    N: int
    entries: List[CharacterEntry] = field(default_factory=list)

    def scalars(self, side: str) -> Dict[Unit, ParamScalar]:
        return {e.generator: e.realized for e in self.entries if e.side == side}

    @property
    def all_scalar(self) -> bool:
        return all(e.realized is not None for e in self.entries)

    @property
    def zero_pattern_ok(self) -> bool:
        return all(e.realized is not None and e.realized.is_zero() == e.printed.is_zero() for e in self.entries)

    @property
    def ok(self) -> bool:
        return self.all_scalar and self.zero_pattern_ok

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def _allowed() -> set:
    h, s = ParamScalar.h(), ParamScalar.sigma()
    return {ZERO, h, -h, s * h, -s * h}


def scalar_action(op: DiffOperator, f: ExpFunction) -> Optional[ParamScalar]:
    """c when op f = c f with c a parameter scalar, else None."""
    g = diff_apply(op, f)
    ratio = g.prefactor
    if f.prefactor != ExpPoly.const(1):
        raise ValueError("scalar_action expects a pure exponential")
    if not ratio.is_scalar():
        return None
    return ratio.scalar()


def verify_whittaker(m: int, N: int, sign_value: Optional[int] = None) -> CharacterTable:
    """Apply every listed generator to its vector and tabulate the scalar.

    With ``sign_value`` the sign symbol in the prescribed scalars is
    evaluated before classification.
    """
    check_mN(m, N)
    E = build_generators(N).ops
    table = CharacterTable(m, N)
    allowed = _allowed()
    for side in ("L", "R"):
        psi = build_whittaker_vector(side, m, N).value
        for ij in listed_generators(side, m, N):
            c = scalar_action(E[ij], psi)
            printed = printed_scalar(side, m, N, ij)
            if sign_value is not None:
                printed = printed.subs(s=sign_value)
            if c is None or c not in allowed:
                table.entries.append(CharacterEntry(ij, side, c if c in allowed else None, printed, "fail"))
                continue
            table.entries.append(CharacterEntry(ij, side, c, printed, classify(c, printed)))
    return table


def cartan_annihilation(m: int, N: int) -> Dict[Tuple[str, int], Optional[ParamScalar]]:
    """Scalars of E_kk on psi_L (k = 2..m) and E_aa on psi_R (a = m+1..N-1)."""
    E = build_generators(N).ops
    out = {}
    psiL = build_whittaker_vector("L", m, N).value
    psiR = build_whittaker_vector("R", m, N).value
    for k in range(2, m + 1):
        out[("L", k)] = scalar_action(E[(k, k)], psiL)
    for a in range(m + 1, N):
        out[("R", a)] = scalar_action(E[(a, a)], psiR)
    return out
