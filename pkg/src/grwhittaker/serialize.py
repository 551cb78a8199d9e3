"""Deterministic, round-trippable ASCII text format for symbolic values.

Grammar (terms are always joined by the three characters " + "):

    scalar   := "0" | sterm (" + " sterm)*
    sterm    := coeff | coeff "*" psyms | ["-"] psyms
    coeff    := rational | "(" rational sign urational "I)"
    psyms    := psym ("*" psym)*
    psym     := ("h" | "s" | "nu[" int "]") ["^" int]

    exppoly  := "0" | eterm (" + " eterm)*
    eterm    := "{" scalar "}" ["*exp(" earg (" + " earg)* ")"] ("*" var "^" int)*
    earg     := "(" scalar ")*" var

    diffop   := "0" | dterm (" + " dterm)*
    dterm    := "[" exppoly "]" ("*D(" var ")^" int)*

    var      := "x[" int "," int "]"    Gelfand-Zetlin vertex (n, i)
              | "x[" int "]"            torus coordinate x_k

Example: ``[{-1}*exp((1)*x[1,1])]*D(x[1,1])^1 + [{nu[1] + -1/2}]``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List

from .symkernel import (
    DiffOperator,
    EZERO,
    ExpPoly,
    GaussQ,
    H_SYM,
    ParamScalar,
    S_SYM,
    ZERO,
    exponent_scalar,
    make_exponent,
)

SEP = " + "


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


def _rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _coeff(c) -> str:
    if isinstance(c, GaussQ):
        sign = "-" if c.im < 0 else "+"
        return f"({_rat(c.re)}{sign}{_rat(abs(c.im))}I)"
    return _rat(Fraction(c))


def _psym(sym, e: int) -> str:
    name = "h" if sym == H_SYM else "s" if sym == S_SYM else f"nu[{sym[1]}]"
    return name if e == 1 else f"{name}^{e}"


def scalar_to_text(p: ParamScalar) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.terms():
        syms = "*".join(_psym(s, e) for s, e in mono)
        if not syms:
            parts.append(_coeff(c))
        elif c == 1:
            parts.append(syms)
        elif c == -1:
            parts.append("-" + syms)
        else:
            parts.append(_coeff(c) + "*" + syms)
    return SEP.join(parts)


def var_to_text(v) -> str:
    if v[0] == "x":
        return f"x[{v[1]},{v[2]}]"
    if v[0] == "t":
        return f"x[{v[1]}]"
    raise ValueError(f"unknown variable {v!r}")


def exppoly_to_text(p: ExpPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m in p.monomials():
        s = "{" + scalar_to_text(m.coeff) + "}"
        if m.exps:
            s += "*exp(" + SEP.join(f"({scalar_to_text(exponent_scalar(e))})*{var_to_text(v)}" for v, e in m.exps) + ")"
        for v, k in m.pows:
            s += f"*{var_to_text(v)}^{k}"
        parts.append(s)
    return SEP.join(parts)


def diffop_to_text(D: DiffOperator) -> str:
    if D.is_zero():
        return "0"
    parts = []
    for key, c in D.terms():
        s = "[" + exppoly_to_text(c) + "]"
        for v, n in key:
            s += f"*D({var_to_text(v)})^{n}"
        parts.append(s)
    return SEP.join(parts)


def to_text(obj) -> str:
    if isinstance(obj, DiffOperator):
        return diffop_to_text(obj)
    if isinstance(obj, ExpPoly):
        return exppoly_to_text(obj)
    if isinstance(obj, ParamScalar):
        return scalar_to_text(obj)
    raise TypeError(type(obj))


# ---------------------------------------------------------------------------
# readers
# ---------------------------------------------------------------------------

_OPEN = "([{"
_CLOSE = ")]}"


def _split_top(s: str, sep: str) -> List[str]:
    out, depth, start, i = [], 0, 0, 0
    while i < len(s):
        ch = s[i]
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
        elif depth == 0 and s.startswith(sep, i):
            out.append(s[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    out.append(s[start:])
    return out


_RAT = r"-?\d+(?:/\d+)?"
_RAT_RE = re.compile(rf"^{_RAT}$")
_GAUSS_RE = re.compile(rf"^\(({_RAT})([+-]\d+(?:/\d+)?)I\)$")
_PSYM_RE = re.compile(r"^(h|s|nu\[(\d+)\])(?:\^(-?\d+))?$")
_VAR_RE = re.compile(r"^x\[(-?\d+)(?:,(-?\d+))?\]$")


def _parse_coeff(tok: str):
    if _RAT_RE.match(tok):
        return Fraction(tok)
    m = _GAUSS_RE.match(tok)
    if m:
        return GaussQ.make(Fraction(m.group(1)), Fraction(m.group(2)))
    return None


def parse_scalar(s: str) -> ParamScalar:
    s = s.strip()
    if s == "0":
        return ZERO
    out = ZERO
    for term in _split_top(s, SEP):
        factors = _split_top(term, "*")
        c = _parse_coeff(factors[0])
        if c is not None:
            factors = factors[1:]
        elif factors[0].startswith("-"):
            c = Fraction(-1)
            factors[0] = factors[0][1:]
        else:
            c = Fraction(1)
        mono = []
        for f in factors:
            m = _PSYM_RE.match(f)
            if not m:
                raise ValueError(f"bad parameter symbol {f!r} in {s!r}")
            sym = H_SYM if m.group(1) == "h" else S_SYM if m.group(1) == "s" else ("nu", int(m.group(2)))
            mono.append((sym, int(m.group(3) or 1)))
        out = out + ParamScalar({tuple(mono): c})
    return out


def parse_var(s: str):
    m = _VAR_RE.match(s)
    if not m:
        raise ValueError(f"bad variable {s!r}")
    if m.group(2) is None:
        return ("t", int(m.group(1)))
    return ("x", int(m.group(1)), int(m.group(2)))


def _parse_eterm(term: str) -> ExpPoly:
    if not term.startswith("{"):
        raise ValueError(f"bad term {term!r}")
    factors = _split_top(term, "*")
    coeff = parse_scalar(factors[0][1:-1])
    exps = {}
    pows = []
    i = 1
    while i < len(factors):
        f = factors[i]
        if f.startswith("exp(") and f.endswith(")"):
            for arg in _split_top(f[4:-1], SEP):
                a, v = _split_top(arg, "*")
                exps[parse_var(v)] = make_exponent(parse_scalar(a[1:-1]))
        else:
            v, k = f.rsplit("^", 1)
            pows.append((parse_var(v), int(k)))
        i += 1
    return ExpPoly({(tuple(exps.items()), tuple(pows)): coeff})


def parse_exppoly(s: str) -> ExpPoly:
    s = s.strip()
    if s == "0":
        return EZERO
    out = EZERO
    for term in _split_top(s, SEP):
        out = out + _parse_eterm(term)
    return out


def parse_diffop(s: str) -> DiffOperator:
    s = s.strip()
    if s == "0":
        return DiffOperator()
    terms = {}
    for term in _split_top(s, SEP):
        factors = _split_top(term, "*")
        coeff = parse_exppoly(factors[0][1:-1])
        key = []
        for f in factors[1:]:
            m = re.match(r"^D\((.*)\)\^(\d+)$", f)
            if not m:
                raise ValueError(f"bad derivative factor {f!r}")
            key.append((parse_var(m.group(1)), int(m.group(2))))
        k = tuple(sorted(key))
        terms[k] = terms.get(k, EZERO) + coeff
    return DiffOperator(terms)


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def to_json_value(obj):
    """Exact objects become strings in the text grammar."""
    if isinstance(obj, (ParamScalar, ExpPoly, DiffOperator)):
        return to_text(obj)
    return obj
