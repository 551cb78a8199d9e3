"""Exact symbolic core.

Three layers of exact arithmetic:

* ``ParamScalar``: polynomials over the Gaussian rationals in the formal
  parameters ``nu[k]`` (standing for i*lambda_k), ``h`` (standing for 1/hbar,
  Laurent so that powers of hbar are representable) and the sign symbol ``s``
  with ``s**2 == 1``.
* ``ExpPoly``: finite sums  c * prod_v exp(a_v * v) * prod_v v**k_v  where the
  exponents a_v are affine in the ``nu`` symbols and the optional polynomial
  factors v**k_v host terms such as ``x_k * d/dx_n`` that appear once the
  torus coordinates enter.
* ``ExpFunction`` (P * exp(L + E)) and ``DiffOperator`` (normal form, all
  coefficients to the left of derivatives).

Everything is immutable once constructed and kept in canonical form, so
equality is syntactic.

Variables are plain tuples: ``("x", n, i)`` for a Gelfand-Zetlin vertex and
``("t", k)`` for the torus coordinate x_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Tuple, Union

Var = tuple
Rational = Union[int, Fraction]


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussQ:
    """a + b*i with rational a, b and b != 0 (purely real values stay Fraction)."""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational, im: Rational):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def make(re: Rational, im: Rational) -> "Number":
        if im == 0:
            return Fraction(re)
        return GaussQ(re, im)

    def __add__(self, o):
        if isinstance(o, GaussQ):
            return GaussQ.make(self.re + o.re, self.im + o.im)
        return GaussQ.make(self.re + o, self.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, GaussQ):
            return GaussQ.make(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        return GaussQ.make(self.re * o, self.im * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, GaussQ):
            d = o.re * o.re + o.im * o.im
            return self * GaussQ(o.re / d, -o.im / d)
        return GaussQ.make(self.re / o, self.im / o)

    def __eq__(self, o):
        if isinstance(o, GaussQ):
            return self.re == o.re and self.im == o.im
        return False

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"


Number = Union[Fraction, GaussQ]
I = GaussQ(0, 1)


def as_number(c) -> Number:
    if isinstance(c, (GaussQ, Fraction)):
        return c
    if isinstance(c, complex):
        raise TypeError("floating complex values are not exact; use GaussQ")
    return Fraction(c)


# ---------------------------------------------------------------------------
# ParamScalar
# ---------------------------------------------------------------------------

# Parameter symbols, ordered: ("h",) < ("nu", k) < ("s",)
H_SYM = ("h",)
S_SYM = ("s",)


def NU_SYM(k: int) -> tuple:
    return ("nu", k)


PMono = Tuple[Tuple[tuple, int], ...]


def _pmono_mul(a: PMono, b: PMono) -> PMono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    out = []
    for s in sorted(d):
        e = d[s]
        if s == S_SYM:
            e %= 2
        if e:
            out.append((s, e))
    return tuple(out)


class ParamScalar:
    """Exact polynomial in nu[k], h (Laurent) and s (s**2 = 1)."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[PMono, Number] | None = None, *, _trusted: bool = False):
        if _trusted:
            self._t = terms
        else:
            t: Dict[PMono, Number] = {}
            for mono, c in (terms or {}).items():
                mono = _pmono_mul((), tuple(mono)) if mono else ()
                c = as_number(c)
                if c != 0:
                    t[mono] = t.get(mono, 0) + c
            self._t = {k: v for k, v in t.items() if v != 0}
        self._hash = None

    # constructors -------------------------------------------------------
    @staticmethod
    def const(c) -> "ParamScalar":
        c = as_number(c)
        return ParamScalar({(): c}, _trusted=True) if c != 0 else ZERO

    @staticmethod
    def nu(k: int) -> "ParamScalar":
        return ParamScalar({((NU_SYM(k), 1),): Fraction(1)}, _trusted=True)

    @staticmethod
    def h(power: int = 1) -> "ParamScalar":
        if power == 0:
            return ONE
        return ParamScalar({((H_SYM, power),): Fraction(1)}, _trusted=True)

    @staticmethod
    def sigma() -> "ParamScalar":
        return ParamScalar({((S_SYM, 1),): Fraction(1)}, _trusted=True)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def coerce(o) -> "ParamScalar":
        if isinstance(o, ParamScalar):
            return o
        return ParamScalar.const(o)

    def __add__(self, o) -> "ParamScalar":
        o = ParamScalar.coerce(o)
        if not o._t:
            return self
        if not self._t:
            return o
        t = dict(self._t)
        for k, v in o._t.items():
            w = t.get(k, 0) + v
            if w == 0:
                t.pop(k, None)
            else:
                t[k] = w
        return ParamScalar(t, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "ParamScalar":
        return ParamScalar({k: -v for k, v in self._t.items()}, _trusted=True)

    def __sub__(self, o) -> "ParamScalar":
        return self + (-ParamScalar.coerce(o))

    def __rsub__(self, o) -> "ParamScalar":
        return ParamScalar.coerce(o) - self

    def __mul__(self, o) -> "ParamScalar":
        if not isinstance(o, ParamScalar):
            c = as_number(o)
            if c == 0:
                return ZERO
            return ParamScalar({k: v * c for k, v in self._t.items()}, _trusted=True)
        if not self._t or not o._t:
            return ZERO
        t: Dict[PMono, Number] = {}
        for ka, va in self._t.items():
            for kb, vb in o._t.items():
                k = _pmono_mul(ka, kb)
                t[k] = t.get(k, 0) + va * vb
        return ParamScalar({k: v for k, v in t.items() if v != 0}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ParamScalar":
        if n < 0:
            raise ValueError("negative powers are only available for h")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    # inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def is_constant(self) -> bool:
        return all(k == () for k in self._t)

    def constant(self) -> Number:
        return self._t.get((), Fraction(0))

    def terms(self) -> Iterator[Tuple[PMono, Number]]:
        for k in sorted(self._t):
            yield k, self._t[k]

    def symbols(self) -> set:
        return {s for k in self._t for s, _ in k}

    def __eq__(self, o) -> bool:
        if not isinstance(o, ParamScalar):
            try:
                o = ParamScalar.const(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self._t == o._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def subs(self, *, nu: Mapping[int, object] | None = None, h=None, s=None) -> "ParamScalar":
        """Substitute exact values for some parameters."""
        nu = nu or {}
        out = ZERO
        for mono, c in self._t.items():
            term = ParamScalar({(): c}, _trusted=True)
            keep = []
            for sym, e in mono:
                if sym == H_SYM and h is not None:
                    hv = as_number(h)
                    term = term * (hv**e if e >= 0 else Fraction(1) / hv ** (-e))
                elif sym == S_SYM and s is not None:
                    term = term * as_number(s) ** e
                elif sym[0] == "nu" and sym[1] in nu:
                    term = term * ParamScalar.coerce(nu[sym[1]]) ** e
                else:
                    keep.append((sym, e))
            out = out + term * ParamScalar({tuple(keep): 1}, _trusted=True)
        return out

    def evaluate(self, *, nu: Mapping[int, complex] | None = None, h: complex = 1.0, s: float = 1.0) -> complex:
        nu = nu or {}
        total = 0j
        for mono, c in self._t.items():
            v = complex(c)
            for sym, e in mono:
                if sym == H_SYM:
                    v *= complex(h) ** e
                elif sym == S_SYM:
                    v *= s**e
                else:
                    v *= complex(nu.get(sym[1], 0.0)) ** e
            total += v
        return total

    def __str__(self) -> str:
        from .serialize import scalar_to_text

        return scalar_to_text(self)

    def __repr__(self) -> str:
        return f"ParamScalar({self})"


ZERO = ParamScalar({}, _trusted=True)
ONE = ParamScalar({(): Fraction(1)}, _trusted=True)


def rho(n: int, N: int) -> Fraction:
    """rho_n = n - (N+1)/2 (spectral-parameter shift)."""
    return Fraction(2 * n - N - 1, 2)


def rho_casimir(i: int, N: int) -> Fraction:
    """rho_i = (N+1-2i)/2, the shift used by the quadratic Casimir."""
    return Fraction(N + 1 - 2 * i, 2)


def mu(n: int, N: int) -> ParamScalar:
    """mu_n = nu_n - rho_n."""
    return ParamScalar.nu(n) - rho(n, N)


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------

# An exponent is (rational constant, ((k, coeff), ...)) meaning c + sum coeff*nu_k.
Exponent = Tuple[Fraction, Tuple[Tuple[int, Fraction], ...]]


def make_exponent(value) -> Exponent:
    """Build an exponent from a rational or an affine-in-nu ParamScalar."""
    if isinstance(value, tuple):
        return value
    if not isinstance(value, ParamScalar):
        return (Fraction(value), ())
    const = Fraction(0)
    lin = {}
    for mono, c in value.terms():
        if isinstance(c, GaussQ):
            raise ValueError("exponents must have rational coefficients")
        if mono == ():
            const += c
        elif len(mono) == 1 and mono[0][0][0] == "nu" and mono[0][1] == 1:
            lin[mono[0][0][1]] = c
        else:
            raise ValueError(f"exponent must be affine in nu: {value}")
    return (const, tuple(sorted(lin.items())))


def exponent_add(a: Exponent, b: Exponent) -> Exponent:
    if not a[1] and not b[1]:
        return (a[0] + b[0], ())
    d = dict(a[1])
    for k, c in b[1]:
        d[k] = d.get(k, 0) + c
    return (a[0] + b[0], tuple(sorted((k, c) for k, c in d.items() if c != 0)))


def exponent_scalar(a: Exponent) -> ParamScalar:
    t = {}
    if a[0] != 0:
        t[()] = a[0]
    for k, c in a[1]:
        t[((NU_SYM(k), 1),)] = c
    return ParamScalar(t, _trusted=True)


def exponent_is_zero(a: Exponent) -> bool:
    return a[0] == 0 and not a[1]


# ---------------------------------------------------------------------------
# ExpPoly
# ---------------------------------------------------------------------------

ExpsKey = Tuple[Tuple[Var, Exponent], ...]
PowsKey = Tuple[Tuple[Var, int], ...]
MonoKey = Tuple[ExpsKey, PowsKey]


class ExpMonomial(NamedTuple):
    coeff: ParamScalar
    exps: ExpsKey
    pows: PowsKey = ()


def _merge_exps(a: ExpsKey, b: ExpsKey) -> ExpsKey:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        if v in d:
            d[v] = exponent_add(d[v], e)
        else:
            d[v] = e
    return tuple(sorted((v, e) for v, e in d.items() if not exponent_is_zero(e)))


def _merge_pows(a: PowsKey, b: PowsKey) -> PowsKey:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, k in b:
        d[v] = d.get(v, 0) + k
    return tuple(sorted(d.items()))


def _add_into(t: Dict[MonoKey, ParamScalar], key: MonoKey, c: ParamScalar) -> None:
    if key in t:
        w = t[key] + c
        if w.is_zero():
            del t[key]
        else:
            t[key] = w
    elif not c.is_zero():
        t[key] = c


class ExpPoly:
    """Finite sum of ExpMonomials in canonical form."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[MonoKey, ParamScalar] | None = None, *, _trusted: bool = False):
        if _trusted:
            self._t = terms
        else:
            t: Dict[MonoKey, ParamScalar] = {}
            for (exps, pows), c in (terms or {}).items():
                key = (_merge_exps((), tuple(sorted(exps))), tuple(sorted(pows)))
                key = (tuple(x for x in key[0] if not exponent_is_zero(x[1])), tuple(p for p in key[1] if p[1]))
                _add_into(t, key, ParamScalar.coerce(c))
            self._t = t
        self._hash = None

    # constructors -------------------------------------------------------
    @staticmethod
    def const(c) -> "ExpPoly":
        c = ParamScalar.coerce(c)
        if c.is_zero():
            return EZERO
        return ExpPoly({((), ()): c}, _trusted=True)

    @staticmethod
    def exp(exponents: Mapping[Var, object], coeff=1) -> "ExpPoly":
        """coeff * exp(sum_v a_v * v)."""
        exps = tuple(sorted((v, make_exponent(a)) for v, a in exponents.items()))
        exps = tuple(x for x in exps if not exponent_is_zero(x[1]))
        c = ParamScalar.coerce(coeff)
        if c.is_zero():
            return EZERO
        return ExpPoly({(exps, ()): c}, _trusted=True)

    @staticmethod
    def var(v: Var, power: int = 1) -> "ExpPoly":
        if power == 0:
            return EONE
        return ExpPoly({((), ((v, power),)): ONE}, _trusted=True)

    @staticmethod
    def from_monomials(monos: Iterable[ExpMonomial]) -> "ExpPoly":
        t: Dict[MonoKey, ParamScalar] = {}
        for m in monos:
            exps = _merge_exps((), tuple(sorted(m.exps)))
            exps = tuple(x for x in exps if not exponent_is_zero(x[1]))
            pows = tuple(sorted(p for p in m.pows if p[1]))
            _add_into(t, (exps, pows), ParamScalar.coerce(m.coeff))
        return ExpPoly(t, _trusted=True)

    @staticmethod
    def coerce(o) -> "ExpPoly":
        if isinstance(o, ExpPoly):
            return o
        return ExpPoly.const(o)

    # arithmetic ---------------------------------------------------------
    def __add__(self, o) -> "ExpPoly":
        o = ExpPoly.coerce(o)
        if not o._t:
            return self
        if not self._t:
            return o
        t = dict(self._t)
        for k, v in o._t.items():
            _add_into(t, k, v)
        return ExpPoly(t, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({k: -v for k, v in self._t.items()}, _trusted=True)

    def __sub__(self, o) -> "ExpPoly":
        return self + (-ExpPoly.coerce(o))

    def __rsub__(self, o) -> "ExpPoly":
        return ExpPoly.coerce(o) - self

    def __mul__(self, o) -> "ExpPoly":
        if not isinstance(o, ExpPoly):
            c = ParamScalar.coerce(o)
            if c.is_zero():
                return EZERO
            return ExpPoly({k: v * c for k, v in self._t.items()}, _trusted=True)
        if not self._t or not o._t:
            return EZERO
        t: Dict[MonoKey, ParamScalar] = {}
        for (ea, pa), ca in self._t.items():
            for (eb, pb), cb in o._t.items():
                _add_into(t, (_merge_exps(ea, eb), _merge_pows(pa, pb)), ca * cb)
        return ExpPoly(t, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExpPoly":
        out = EONE
        for _ in range(n):
            out = out * self
        return out

    def diff(self, v: Var) -> "ExpPoly":
        t: Dict[MonoKey, ParamScalar] = {}
        for (exps, pows), c in self._t.items():
            for w, e in exps:
                if w == v:
                    _add_into(t, (exps, pows), c * exponent_scalar(e))
                    break
            for i, (w, k) in enumerate(pows):
                if w == v:
                    newp = pows[:i] + (((w, k - 1),) if k > 1 else ()) + pows[i + 1 :]
                    _add_into(t, (exps, newp), c * k)
                    break
        return ExpPoly(t, _trusted=True)

    def set_zero(self, v: Var) -> "ExpPoly":
        """Substitute v = 0."""
        t: Dict[MonoKey, ParamScalar] = {}
        for (exps, pows), c in self._t.items():
            if any(w == v for w, _ in pows):
                continue
            _add_into(t, (tuple(x for x in exps if x[0] != v), pows), c)
        return ExpPoly(t, _trusted=True)

    def map_coeffs(self, fn) -> "ExpPoly":
        t: Dict[MonoKey, ParamScalar] = {}
        for k, c in self._t.items():
            _add_into(t, k, fn(c))
        return ExpPoly(t, _trusted=True)

    # inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def is_scalar(self) -> bool:
        return all(k == ((), ()) for k in self._t)

    def scalar(self) -> ParamScalar:
        """The constant (variable-free) part."""
        return self._t.get(((), ()), ZERO)

    def monomials(self) -> Iterator[ExpMonomial]:
        for k in sorted(self._t, key=_mono_sort_key):
            yield ExpMonomial(self._t[k], k[0], k[1])

    def variables(self) -> set:
        out = set()
        for exps, pows in self._t:
            out.update(v for v, _ in exps)
            out.update(v for v, _ in pows)
        return out

    def __eq__(self, o) -> bool:
        if not isinstance(o, ExpPoly):
            try:
                o = ExpPoly.coerce(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self._t == o._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def evaluate(self, point: Mapping[Var, float], **params) -> complex:
        import cmath

        total = 0j
        for (exps, pows), c in self._t.items():
            arg = 0j
            for v, e in exps:
                arg += exponent_scalar(e).evaluate(**params) * point[v]
            val = c.evaluate(**params) * cmath.exp(arg)
            for v, k in pows:
                val *= point[v] ** k
            total += val
        return total

    def __str__(self) -> str:
        from .serialize import exppoly_to_text

        return exppoly_to_text(self)

    def __repr__(self) -> str:
        return f"ExpPoly({self})"


def _mono_sort_key(key: MonoKey):
    exps, pows = key
    return (len(exps) + len(pows), [(v, e[0], e[1]) for v, e in exps], list(pows))


EZERO = ExpPoly({}, _trusted=True)
EONE = ExpPoly({((), ()): ONE}, _trusted=True)


def normalize(p) -> ExpPoly:
    """Canonical form of an ExpPoly or of an iterable of ExpMonomials."""
    if isinstance(p, ExpPoly):
        return ExpPoly.from_monomials(p.monomials())
    return ExpPoly.from_monomials(p)


# ---------------------------------------------------------------------------
# ExpFunction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpFunction:
    """prefactor * exp(phase_linear + phase_exp)."""

    prefactor: ExpPoly
    phase_linear: Tuple[Tuple[Var, ParamScalar], ...] = ()
    phase_exp: ExpPoly = EZERO

    def __post_init__(self):
        lin = tuple(sorted((v, ParamScalar.coerce(c)) for v, c in dict(self.phase_linear).items()))
        object.__setattr__(self, "phase_linear", tuple((v, c) for v, c in lin if not c.is_zero()))
        for (exps, pows), _ in self.phase_exp._t.items():
            if any(e[1] for _, e in exps):
                raise ValueError("phase_exp must have purely rational exponents")

    @staticmethod
    def make(prefactor=1, linear: Mapping[Var, object] | None = None, exp_part: ExpPoly | None = None) -> "ExpFunction":
        return ExpFunction(ExpPoly.coerce(prefactor), tuple((linear or {}).items()), exp_part if exp_part is not None else EZERO)

    def log_derivative(self, v: Var) -> ExpPoly:
        """d/dv of the phase."""
        lin = dict(self.phase_linear).get(v, ZERO)
        return ExpPoly.const(lin) + self.phase_exp.diff(v)

    def diff(self, v: Var) -> "ExpFunction":
        p = self.prefactor.diff(v) + self.prefactor * self.log_derivative(v)
        return ExpFunction(p, self.phase_linear, self.phase_exp)

    def times(self, c) -> "ExpFunction":
        return ExpFunction(self.prefactor * ExpPoly.coerce(c), self.phase_linear, self.phase_exp)

    def same_phase(self, other: "ExpFunction") -> bool:
        return self.phase_linear == other.phase_linear and self.phase_exp == other.phase_exp

    def variables(self) -> set:
        return self.prefactor.variables() | self.phase_exp.variables() | {v for v, _ in self.phase_linear}


# ---------------------------------------------------------------------------
# DiffOperator
# ---------------------------------------------------------------------------

DKey = Tuple[Tuple[Var, int], ...]


def _dkey_mul(a: DKey, b: DKey) -> DKey:
    return _merge_pows(a, b)


def _dkey_subkeys(a: DKey) -> Iterator[Tuple[DKey, DKey, int]]:
    """All (g, a-g, multinomial coefficient prod C(a_v, g_v)) with g <= a."""
    ranges = [range(k + 1) for _, k in a]
    for choice in product(*ranges):
        g = tuple((v, c) for (v, _), c in zip(a, choice) if c)
        rest = tuple((v, k - c) for (v, k), c in zip(a, choice) if k - c)
        mult = 1
        for (_, k), c in zip(a, choice):
            mult *= comb(k, c)
        yield g, rest, mult


def _add_op(t: Dict[DKey, ExpPoly], key: DKey, c: ExpPoly) -> None:
    if key in t:
        w = t[key] + c
        if w.is_zero():
            del t[key]
        else:
            t[key] = w
    elif not c.is_zero():
        t[key] = c


class DiffOperator:
    """sum_alpha c_alpha(x) * d^alpha, coefficients left of derivatives."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[DKey, object] | None = None, *, _trusted: bool = False):
        if _trusted:
            self._t = terms
        else:
            t: Dict[DKey, ExpPoly] = {}
            for k, c in (terms or {}).items():
                _add_op(t, tuple(sorted((v, n) for v, n in k if n)), ExpPoly.coerce(c))
            self._t = t
        self._hash = None

    @staticmethod
    def mult(c) -> "DiffOperator":
        c = ExpPoly.coerce(c)
        return DiffOperator({(): c}, _trusted=True) if c else DZERO

    @staticmethod
    def d(v: Var, order: int = 1, coeff=1) -> "DiffOperator":
        c = ExpPoly.coerce(coeff)
        return DiffOperator({((v, order),): c}, _trusted=True) if c else DZERO

    @staticmethod
    def coerce(o) -> "DiffOperator":
        if isinstance(o, DiffOperator):
            return o
        return DiffOperator.mult(o)

    def __add__(self, o) -> "DiffOperator":
        o = DiffOperator.coerce(o)
        t = dict(self._t)
        for k, c in o._t.items():
            _add_op(t, k, c)
        return DiffOperator(t, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "DiffOperator":
        return DiffOperator({k: -c for k, c in self._t.items()}, _trusted=True)

    def __sub__(self, o) -> "DiffOperator":
        return self + (-DiffOperator.coerce(o))

    def __rsub__(self, o) -> "DiffOperator":
        return DiffOperator.coerce(o) - self

    def scale(self, c) -> "DiffOperator":
        """Left multiplication by a function or scalar."""
        c = ExpPoly.coerce(c)
        t: Dict[DKey, ExpPoly] = {}
        for k, v in self._t.items():
            _add_op(t, k, c * v)
        return DiffOperator(t, _trusted=True)

    def __mul__(self, o) -> "DiffOperator":
        if isinstance(o, DiffOperator):
            return diff_compose(self, o)
        return self.scale(o)

    def __rmul__(self, o) -> "DiffOperator":
        return self.scale(o)

    def __matmul__(self, o: "DiffOperator") -> "DiffOperator":
        return diff_compose(self, o)

    @property
    def order(self) -> int:
        return max((sum(n for _, n in k) for k in self._t), default=0)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def terms(self) -> Iterator[Tuple[DKey, ExpPoly]]:
        for k in sorted(self._t, key=lambda k: (sum(n for _, n in k), k)):
            yield k, self._t[k]

    def coefficient(self, key: DKey) -> ExpPoly:
        return self._t.get(tuple(sorted(key)), EZERO)

    def variables(self) -> set:
        out = set()
        for k, c in self._t.items():
            out.update(v for v, _ in k)
            out |= c.variables()
        return out

    def map_coeffs(self, fn) -> "DiffOperator":
        t: Dict[DKey, ExpPoly] = {}
        for k, c in self._t.items():
            _add_op(t, k, fn(c))
        return DiffOperator(t, _trusted=True)

    def __eq__(self, o) -> bool:
        if not isinstance(o, DiffOperator):
            try:
                o = DiffOperator.coerce(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self._t == o._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def __str__(self) -> str:
        from .serialize import diffop_to_text

        return diffop_to_text(self)

    def __repr__(self) -> str:
        return f"DiffOperator({self})"


DZERO = DiffOperator({}, _trusted=True)
DONE = DiffOperator({(): EONE}, _trusted=True)


def _apply_dkey(key: DKey, target):
    for v, n in key:
        for _ in range(n):
            target = target.diff(v)
    return target


def diff_apply(D: DiffOperator, f):
    """Apply D to an ExpFunction (or to an ExpPoly)."""
    if isinstance(f, ExpPoly):
        out = EZERO
        for k, c in D._t.items():
            out = out + c * _apply_dkey(k, f)
        return out
    pref = EZERO
    for k, c in D._t.items():
        pref = pref + c * _apply_dkey(k, f).prefactor
    return ExpFunction(pref, f.phase_linear, f.phase_exp)


def diff_compose(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    """Normal form of A o B via d^a c = sum_g C(a,g) (d^g c) d^(a-g)."""
    t: Dict[DKey, ExpPoly] = {}
    for ka, ca in A._t.items():
        for kb, cb in B._t.items():
            if not ka:
                _add_op(t, kb, ca * cb)
                continue
            for g, rest, mult in _dkey_subkeys(ka):
                dc = _apply_dkey(g, cb) if g else cb
                if dc.is_zero():
                    continue
                _add_op(t, _dkey_mul(rest, kb), ca * dc * mult)
    return DiffOperator(t, _trusted=True)


def diff_commutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    return diff_compose(A, B) - diff_compose(B, A)


def conjugate_by_exp(D: DiffOperator, v: Var, c) -> DiffOperator:
    """exp(-c v) o D o exp(c v) for a rational c."""
    e_plus = DiffOperator.mult(ExpPoly.exp({v: c}))
    e_minus = DiffOperator.mult(ExpPoly.exp({v: -Fraction(c)}))
    return diff_compose(e_minus, diff_compose(D, e_plus))


# convenient variable constructors ------------------------------------------


def gz(n: int, i: int) -> Var:
    return ("x", n, i)


def torus(k: int) -> Var:
    return ("t", k)
