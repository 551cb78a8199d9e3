"""Numerical evaluation of the Gr(m,N) Whittaker integral.

The integrand is exp(F) with

    F = c0 + sum_k lin_k y_k - sum_j w_j exp(a_j . y + b_j),   w_j > 0,

over the interior Gelfand-Zetlin variables y.  For real spectral parameters
|exp(F)| decays doubly exponentially along every coordinate ray, so the real
cycle truncated to a box is used.  The box is the bounding box of the convex
level set {Phi <= Phi_min + L}, Phi = -Re F, and is found by small convex
programs.  Two independent refinement policies run on that box:

    "trapezoid"  tensor trapezoid rule, step halving
    "gauss"      composite Gauss-Legendre, panel doubling

Both stop when two successive levels agree to tol * max(|I|, 1).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .gzpaths import build_gr_graph, check_mN
from .symkernel import ExpPoly, gz

POLICIES = ("trapezoid", "gauss")
Var = Tuple


class BudgetExceeded(RuntimeError):
    """Refinement ran out of evaluations; carries the best estimate."""

    def __init__(self, message: str, result: "QuadratureResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error: float
    evaluations: int
    policy: str = "trapezoid"
    levels: int = 0

    def to_json(self) -> dict:
        return {
            "value": {"re": float(self.value.real), "im": float(self.value.imag)},
            "abs_error": float(self.abs_error),
            "evaluations": int(self.evaluations),
        }


@dataclass(frozen=True)
class ExpTerm:
    """-weight * exp(sum_v exponents[v] * v) in the phase."""

    weight: float
    exponents: Tuple[Tuple[Var, int], ...]


@dataclass
class PhaseData:
    m: int
    N: int
    lam: Tuple[float, ...]
    hbar: float
    x: float
    linear: Dict[Var, complex]
    exp_terms: List[ExpTerm]
    variables: Tuple[Var, ...]
    external: Var = field(default=None)

    def exp_sum(self) -> ExpPoly:
        """sum_j exp(a_j . x) over the exponential terms, symbolically."""
        out = ExpPoly()
        for t in self.exp_terms:
            out = out + ExpPoly.exp(dict(t.exponents))
        return out

    def linear_form(self) -> Tuple[np.ndarray, complex]:
        """Coefficient vector on the integration variables and the constant
        coming from the external variable."""
        idx = {v: k for k, v in enumerate(self.variables)}
        lin = np.zeros(len(self.variables), dtype=complex)
        c0 = 0j
        for v, c in self.linear.items():
            if v == self.external:
                c0 += c * self.x
            else:
                lin[idx[v]] += c
        return lin, c0

    def exp_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(w, A, b) with the exponential terms w_j exp(A_j . y + b_j)."""
        idx = {v: k for k, v in enumerate(self.variables)}
        A = np.zeros((len(self.exp_terms), len(self.variables)))
        b = np.zeros(len(self.exp_terms))
        w = np.array([t.weight for t in self.exp_terms])
        for j, t in enumerate(self.exp_terms):
            for v, e in t.exponents:
                if v == self.external:
                    b[j] += e * self.x
                else:
                    A[j, idx[v]] += e
        return w, A, b

    def integrand(self) -> "Integrand":
        lin, c0 = self.linear_form()
        w, A, b = self.exp_arrays()
        return Integrand(lin, c0, w, A, b)


def measure_variables(m: int, N: int) -> Tuple[Var, ...]:
    """Integration variables in the order of the flat measure."""
    out = [gz(n, k) for n in range(1, N - m + 1) for k in range(1, min(n, m) + 1)]
    out += [gz(N - m + n, i) for n in range(1, m) for i in range(n + 1, min(N - m + n, m) + 1)]
    return tuple(out)


def build_phase(m: int, N: int, lam: Sequence[float], hbar: float = 1.0, x: float = 0.0) -> PhaseData:
    check_mN(m, N)
    lam = tuple(float(v) for v in lam)
    if len(lam) != N:
        raise ValueError(f"lambda must have length {N}, got {len(lam)}")
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    lin: Dict[Var, complex] = {}

    def add(v, c):
        lin[v] = lin.get(v, 0j) + c

    L = lambda n: lam[n - 1]  # noqa: E731
    add(gz(N, 1), 1j * sum(L(N - m + k) for k in range(1, m + 1)))
    for n in range(1, N - m + 1):
        for i in range(1, min(m, n) + 1):
            add(gz(n, i), 1j * (L(n) - L(n + 1)))
    for n in range(1, m):
        for i in range(n + 1, min(N - m + n, m) + 1):
            add(gz(N - m + n, i), 1j * (L(N - m + n) - L(N - m + n + 1)))
    w = 1.0 / hbar
    terms = [ExpTerm(w, ((gz(m, m), -1),)), ExpTerm(w, _pair(gz(N - m, 1), gz(N, 1)))]
    for k in range(1, m + 1):
        for i in range(1, N - m):
            terms.append(ExpTerm(w, _pair(gz(i + k - 1, k), gz(i + k, k))))
    for k in range(1, N - m + 1):
        for i in range(1, m):
            terms.append(ExpTerm(w, _pair(gz(k + i, i + 1), gz(k + i - 1, i))))
    variables = measure_variables(m, N)
    return PhaseData(m, N, lam, float(hbar), float(x), lin, terms, variables, gz(N, 1))


def _pair(plus: Var, minus: Var) -> Tuple[Tuple[Var, int], ...]:
    return tuple(sorted(((plus, 1), (minus, -1))))


def measure_matches_graph(m: int, N: int) -> bool:
    return set(measure_variables(m, N)) == {gz(*v) for v in build_gr_graph(m, N).interior}


def decay_check(phase: PhaseData) -> bool:
    """Every coordinate ray +-e_k meets an exponential term that blows up."""
    _, A, _ = phase.exp_arrays()
    return all((A[:, k] > 0).any() and (A[:, k] < 0).any() for k in range(A.shape[1]))


# ---------------------------------------------------------------------------
# integrand and truncation box
# ---------------------------------------------------------------------------


@dataclass
class Integrand:
    lin: np.ndarray
    c0: complex
    w: np.ndarray
    A: np.ndarray
    b: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.lin)

    def phi(self, y: np.ndarray) -> float:
        """-Re F, convex."""
        return float(-(self.lin.real @ y) - self.c0.real + self.w @ np.exp(self.A @ y + self.b))

    def phi_grad(self, y: np.ndarray) -> np.ndarray:
        return -self.lin.real + self.A.T @ (self.w * np.exp(self.A @ y + self.b))

    def log_values(self, Y: np.ndarray, shift: Optional[np.ndarray] = None) -> np.ndarray:
        """F at the rows of Y (plus i*shift)."""
        Z = Y if shift is None else Y + 1j * shift
        E = np.exp(Z @ self.A.T + self.b)
        return self.c0 + Z @ self.lin - E @ self.w


@dataclass(frozen=True)
class ContourSpec:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    shift: Optional[Tuple[float, ...]] = None

    def valid_for(self, f: Integrand) -> bool:
        if self.shift is None:
            return True
        return bool(np.all(np.abs(f.A @ np.asarray(self.shift)) < math.pi / 2))


def truncation_box(f: Integrand, level: float, pad: float = 0.5) -> Tuple[np.ndarray, np.ndarray, float]:
    """Bounding box of {phi <= phi_min + level} and phi_min."""
    d = f.dim
    res = optimize.minimize(f.phi, np.zeros(d), jac=f.phi_grad, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
    y0 = res.x
    pmin = f.phi(y0)
    lo, hi = np.empty(d), np.empty(d)
    cons = {"type": "ineq", "fun": lambda y: pmin + level - f.phi(y), "jac": lambda y: -f.phi_grad(y)}
    for k in range(d):
        for sgn, store in ((1.0, hi), (-1.0, lo)):
            e = np.zeros(d)
            e[k] = sgn
            r = optimize.minimize(lambda y: -(e @ y), y0, jac=lambda y: -e, constraints=[cons], method="SLSQP", options={"ftol": 1e-12, "maxiter": 500})
            store[k] = r.x[k] + sgn * pad
    return lo, hi, pmin


# ---------------------------------------------------------------------------
# tensor rules
# ---------------------------------------------------------------------------

_CHUNK = 1 << 18


def _threads() -> int:
    return max(1, int(os.environ.get("GRWHITTAKER_THREADS", "1")))


def _tensor_sum(f: Integrand, nodes: List[np.ndarray], weights: List[np.ndarray], scale: float, shift=None) -> complex:
    """sum_{grid} prod(weights) exp(F - scale) in a fixed, deterministic order."""
    d = len(nodes)
    if d == 0:
        return complex(np.exp(f.c0 - scale))
    # split over the first axis; each slab is a deterministic block
    rest_nodes = np.stack(np.meshgrid(*nodes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0))
    rest_w = np.ones(1)
    for wv in weights[1:]:
        rest_w = np.multiply.outer(rest_w, wv).reshape(-1)

    def slab(i: int) -> complex:
        Y = np.empty((rest_nodes.shape[0], d))
        Y[:, 0] = nodes[0][i]
        Y[:, 1:] = rest_nodes
        total = 0j
        for s in range(0, Y.shape[0], _CHUNK):
            F = f.log_values(Y[s : s + _CHUNK], shift)
            total += np.sum(rest_w[s : s + _CHUNK] * np.exp(F - scale))
        return weights[0][i] * total

    idx = range(len(nodes[0]))
    n = _threads()
    if n > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(n) as ex:
            parts = list(ex.map(slab, idx))
    else:
        parts = [slab(i) for i in idx]
    return complex(math.fsum(p.real for p in parts) + 1j * math.fsum(p.imag for p in parts))


def _trapezoid_nodes(lo: float, hi: float, h: float) -> Tuple[np.ndarray, np.ndarray]:
    n = max(2, int(math.ceil((hi - lo) / h)) + 1)
    x = np.linspace(lo, hi, n)
    step = (hi - lo) / (n - 1)
    w = np.full(n, step)
    w[0] = w[-1] = step / 2
    return x, w


def _base_panels(width: float, panel_width: float) -> int:
    return max(1, int(math.ceil(width / panel_width)))


def _gauss_nodes(lo: float, hi: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    t, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append((b - a) / 2 * t + (a + b) / 2)
        ws.append((b - a) / 2 * wt)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass(frozen=True)
class QuadratureSettings:
    policy: str = "trapezoid"
    tol: float = 1e-8
    max_evaluations: int = 200_000_000
    level: Optional[float] = None
    initial_step: float = 1.0
    gauss_order: int = 8
    panel_width: float = 2.0
    max_levels: int = 12


def integrate(f: Integrand, settings: QuadratureSettings = QuadratureSettings(), contour: Optional[ContourSpec] = None) -> QuadratureResult:
    """Integral of exp(F) over R^d by the chosen refinement policy."""
    if settings.policy not in POLICIES:
        raise ValueError(f"unknown policy {settings.policy!r}; expected one of {POLICIES}")
    level = settings.level if settings.level is not None else max(30.0, -math.log(settings.tol) + 15.0)
    if contour is None:
        lo, hi, pmin = truncation_box(f, level)
        shift = None
    else:
        if not contour.valid_for(f):
            raise ValueError("contour shift destroys decay of an exponential term")
        lo, hi = np.asarray(contour.lower, float), np.asarray(contour.upper, float)
        pmin = min(f.phi(lo), f.phi(hi), f.phi((lo + hi) / 2))
        shift = None if contour.shift is None else np.asarray(contour.shift, float)
    scale = -pmin  # exp(F + pmin) is O(1) at the peak
    d = f.dim
    evals = 0
    prev: Optional[complex] = None
    best = 0j
    err = math.inf
    for lev in range(settings.max_levels):
        if settings.policy == "trapezoid":
            h = settings.initial_step / 2**lev
            grid = [_trapezoid_nodes(lo[k], hi[k], h) for k in range(d)]
        else:
            grid = [_gauss_nodes(lo[k], hi[k], _base_panels(hi[k] - lo[k], settings.panel_width) * 2**lev, settings.gauss_order) for k in range(d)]
        size = int(np.prod([len(g[0]) for g in grid])) if d else 1
        if evals + size > settings.max_evaluations:
            raise BudgetExceeded(
                f"evaluation budget {settings.max_evaluations} exceeded at level {lev}",
                QuadratureResult(best * math.exp(scale), err * math.exp(scale), evals, settings.policy, lev),
            )
        val = _tensor_sum(f, [g[0] for g in grid], [g[1] for g in grid], scale, shift)
        evals += size
        if prev is not None:
            err = abs(val - prev)
            best = val
            mag = abs(val) * math.exp(scale)
            if err * math.exp(scale) <= settings.tol * max(mag, 1.0):
                return QuadratureResult(val * math.exp(scale), err * math.exp(scale), evals, settings.policy, lev + 1)
        prev = val
        best = val
    raise BudgetExceeded(
        f"no convergence after {settings.max_levels} levels",
        QuadratureResult(best * math.exp(scale), err * math.exp(scale), evals, settings.policy, settings.max_levels),
    )


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------

MAX_DIM = 4


def evaluate_whittaker(
    m: int,
    N: int,
    lam: Sequence[float],
    hbar: float = 1.0,
    x: float = 0.0,
    tol: float = 1e-8,
    policy: str = "trapezoid",
    apply_prefactor: bool = False,
    max_evaluations: int = 200_000_000,
    contour: Optional[ContourSpec] = None,
) -> QuadratureResult:
    """Integral of exp(F_{m,N}) over the real cycle.

    With ``apply_prefactor`` the result is multiplied by exp(-x m(N-m)/2).
    """
    check_mN(m, N)
    if m * (N - m) > MAX_DIM:
        raise ValueError(f"m(N-m) = {m * (N - m)} exceeds the supported dimension {MAX_DIM}")
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    phase = build_phase(m, N, lam, hbar, x)
    res = integrate(phase.integrand(), QuadratureSettings(policy=policy, tol=tol, max_evaluations=max_evaluations), contour)
    if apply_prefactor:
        f = math.exp(-x * m * (N - m) / 2)
        res = QuadratureResult(res.value * f, res.abs_error * f, res.evaluations, res.policy, res.levels)
    return res


def gamma_reference(nu: complex, hbar: float) -> complex:
    """hbar^{-nu} Gamma(-nu)."""
    return complex(hbar ** (-nu) * special.gamma(-nu))


def gamma_integral(nu: complex, hbar: float, tol: float = 1e-12, policy: str = "trapezoid") -> QuadratureResult:
    """Integral of exp(nu t - e^{-t}/hbar) over the real line."""
    nu = complex(nu)
    if not nu.real < 0:
        raise ValueError("the integral diverges unless Re nu < 0")
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    f = Integrand(np.array([nu]), 0j, np.array([1.0 / hbar]), np.array([[-1.0]]), np.array([0.0]))
    return integrate(f, QuadratureSettings(policy=policy, tol=tol))


def gamma_identity_check(nu: complex, hbar: float) -> float:
    ref = gamma_reference(nu, hbar)
    return abs(gamma_integral(nu, hbar).value - ref) / abs(ref)


GAMMA_GRID = tuple((nu, h) for nu in (-0.5, -1.0, -1.5, -2.0) for h in (0.5, 1.0, 2.0))


def bessel_oracle(order: complex, argument: float) -> complex:
    """K_order(argument) = (1/2) int exp(order t - z cosh t) dt over R,
    by Gauss-Legendre panels (settings independent of evaluate_whittaker)."""
    if not argument > 0:
        raise ValueError("argument must be positive")
    z = float(argument)
    f = Integrand(np.array([complex(order)]), 0j, np.array([z / 2, z / 2]), np.array([[1.0], [-1.0]]), np.zeros(2))
    r = integrate(f, QuadratureSettings(policy="gauss", tol=1e-13, gauss_order=12, level=60.0))
    return r.value / 2


def bessel_closed_form(nu: float, lam2: float, x: float, hbar: float = 1.0, kfun=None) -> complex:
    """Value of the (1,2) integral: e^{i lam2 x} e^{i nu x/2} 2 K_{i nu}(2 e^{-x/2}/hbar)."""
    kfun = kfun or bessel_oracle
    return complex(np.exp(1j * lam2 * x + 1j * nu * x / 2) * 2 * kfun(1j * nu, 2 * math.exp(-x / 2) / hbar))
