"""Command-line front end.

    grwhittaker graph       --m 2 --n 4 --format dot
    grwhittaker phase       --m 1 --n 3 --lambda 0,0,0
    grwhittaker integral    --m 1 --n 2 --lambda 0,0 --hbar 1 --x 0 --tol 1e-8
    grwhittaker lax         --m 2 --n 4 [--specialized] [--charpoly]
    grwhittaker hamiltonian --k 2 --m 1 --n 3 [--trace]
    grwhittaker verify      whittaker|chevalley|paths|boxes|centrality|adjoint ...
    grwhittaker report      [--only acceptance-1,...] [--output report.json]

Every subcommand accepts ``--config FILE`` (key=value lines); flags given on
the command line override the file.  Exit status: 0 success, 1 a check
failed, 2 usage or configuration error, 3 quadrature budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

SYMBOLIC_MAX_N = 8
NUMERIC_MAX_DIM = 4


class ConfigError(ValueError):
    pass


class UnknownKeyError(ConfigError):
    pass


class MalformedValueError(ConfigError):
    pass


class RangeError(ConfigError):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: int = 1
    N: int = 2
    lam: Optional[Tuple[float, ...]] = None
    hbar: float = 1.0
    x: float = 0.0
    epsilon: Optional[int] = None
    tol: float = 1e-8
    emit: str = "json"
    format: str = "json"
    policy: str = "trapezoid"
    k: int = 2
    gauge: str = "prefactor"

    @property
    def sign(self) -> Optional[int]:
        return None if self.epsilon is None else (-1) ** self.epsilon

    @property
    def lam_vector(self) -> Tuple[float, ...]:
        return self.lam if self.lam is not None else (0.0,) * self.N

    def validate(self, numeric: bool = False) -> "RunConfig":
        if not 1 <= self.m < self.N:
            raise RangeError(f"need 1 <= m < n, got m={self.m}, n={self.N}")
        if self.N > SYMBOLIC_MAX_N:
            raise RangeError(f"n={self.N} exceeds {SYMBOLIC_MAX_N}")
        if numeric and self.m * (self.N - self.m) > NUMERIC_MAX_DIM:
            raise RangeError(f"m(n-m)={self.m * (self.N - self.m)} exceeds {NUMERIC_MAX_DIM} for numerics")
        if self.lam is not None and len(self.lam) != self.N:
            raise RangeError(f"lambda has length {len(self.lam)}, expected {self.N}")
        if not self.hbar > 0:
            raise RangeError("hbar must be positive")
        if not self.tol > 0:
            raise RangeError("tol must be positive")
        if self.k not in (1, 2):
            raise RangeError("k must be 1 or 2")
        if self.emit not in ("json", "text"):
            raise RangeError("emit must be json or text")
        if self.format not in ("json", "dot"):
            raise RangeError("format must be json or dot")
        return self


def _floats(s: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


# config key -> (field name, parser)
_KEYS = {
    "m": ("m", int),
    "n": ("N", int),
    "lambda": ("lam", _floats),
    "hbar": ("hbar", float),
    "x": ("x", float),
    "epsilon": ("epsilon", int),
    "tol": ("tol", float),
    "emit": ("emit", str),
    "format": ("format", str),
    "policy": ("policy", str),
    "k": ("k", int),
    "gauge": ("gauge", str),
}


def parse_config_text(text: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise UnknownKeyError(f"line {lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            out[name] = conv(value)
        except ValueError as exc:
            raise MalformedValueError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return out


def load_config(path, overrides: Optional[Dict[str, object]] = None, numeric: bool = False) -> RunConfig:
    values = parse_config_text(Path(path).read_text()) if path is not None else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate(numeric)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _apply_sign(obj, sign: Optional[int]):
    if sign is None:
        return obj
    from .symkernel import DiffOperator, ExpPoly, ParamScalar

    if isinstance(obj, ParamScalar):
        return obj.subs(s=sign)
    if isinstance(obj, ExpPoly):
        return obj.map_coeffs(lambda c: c.subs(s=sign))
    if isinstance(obj, DiffOperator):
        return obj.map_coeffs(lambda e: e.map_coeffs(lambda c: c.subs(s=sign)))
    return obj


def _emit(payload, cfg: RunConfig, out, text: Optional[str] = None) -> None:
    if cfg.emit == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=False, default=str) + "\n")
    else:
        out.write((text if text is not None else _to_text(payload)) + "\n")


def _to_text(payload, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(payload, dict):
        return "\n".join(f"{pad}{k}: " + (("\n" + _to_text(v, indent + 1)) if isinstance(v, (dict, list)) and v else str(v)) for k, v in payload.items())
    if isinstance(payload, list):
        return "\n".join(_to_text(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}" for v in payload)
    return f"{pad}{payload}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_graph(cfg: RunConfig, args, out) -> int:
    from .gzpaths import build_gr_graph, build_gz_graph

    g = build_gz_graph(cfg.N) if args.gz else build_gr_graph(cfg.m, cfg.N)
    if cfg.format == "dot":
        out.write(g.to_dot() + "\n")
        return EXIT_OK
    name = lambda v: v if isinstance(v, str) else f"x[{v[0]},{v[1]}]"  # noqa: E731
    payload = {"n": cfg.N, "arrows": [[name(a), name(b)] for a, b in g.arrows]}
    if args.gz:
        payload["vertices"] = [name(v) for v in g.vertices]
    else:
        payload.update({"m": cfg.m, "interior": [name(v) for v in g.interior], "source": name(g.source)})
    _emit(payload, cfg, out)
    return EXIT_OK


def cmd_phase(cfg: RunConfig, args, out) -> int:
    from .integral import build_phase, decay_check
    from .serialize import var_to_text

    ph = build_phase(cfg.m, cfg.N, cfg.lam_vector, cfg.hbar, cfg.x)
    payload = {
        "m": cfg.m,
        "n": cfg.N,
        "lambda": list(ph.lam),
        "hbar": ph.hbar,
        "x": ph.x,
        "variables": [var_to_text(v) for v in ph.variables],
        "linear": {var_to_text(v): {"re": c.real, "im": c.imag} for v, c in sorted(ph.linear.items())},
        "exp_terms": [{"weight": -t.weight, "exponents": {var_to_text(v): e for v, e in t.exponents}} for t in ph.exp_terms],
        "graph_sum": str(ph.exp_sum()),
        "decays": decay_check(ph),
    }
    _emit(payload, cfg, out)
    return EXIT_OK


def cmd_integral(cfg: RunConfig, args, out) -> int:
    from .integral import BudgetExceeded, evaluate_whittaker

    base = {"m": cfg.m, "n": cfg.N, "lambda": list(cfg.lam_vector), "hbar": cfg.hbar, "x": cfg.x}
    try:
        r = evaluate_whittaker(cfg.m, cfg.N, cfg.lam_vector, cfg.hbar, cfg.x, cfg.tol, cfg.policy, apply_prefactor=args.prefactor, max_evaluations=args.max_evaluations)
    except BudgetExceeded as exc:
        _emit({**base, **exc.result.to_json(), "policy": cfg.policy, "error": str(exc)}, cfg, out)
        return EXIT_BUDGET
    _emit({**base, **r.to_json(), "policy": r.policy}, cfg, out)
    return EXIT_OK


def cmd_lax(cfg: RunConfig, args, out) -> int:
    from . import matelem

    payload: Dict[str, object] = {"m": cfg.m, "n": cfg.N}
    status = EXIT_OK
    if args.specialized or args.charpoly:
        L = matelem.specialized_lax(cfg.m, cfg.N, cfg.sign)
        payload["specialized"] = [[str(L[i, j]) for j in range(cfg.N)] for i in range(cfg.N)]
        if args.charpoly:
            payload["charpoly"] = str(matelem.char_poly(L))
            cmp = matelem.compare_charpoly_qh(cfg.m, cfg.N)
            payload["qh_comparison"] = cmp.to_json()
            payload["qh_presentation"] = [str(g) for g in matelem.qh_presentation(cfg.m, cfg.N)]
            if not cmp.found:
                status = EXIT_FAIL
    else:
        entries = []
        for e in matelem.compare_lax(cfg.m, cfg.N, sign_value=cfg.sign, literal=args.literal):
            d = e.to_json()
            d["realized"] = str(_apply_sign(e.realized, cfg.sign))
            entries.append(d)
            if e.status == "fail" or not e.zero_pattern_ok:
                status = EXIT_FAIL
        payload["entries"] = entries
    _emit(payload, cfg, out)
    return status


def cmd_hamiltonian(cfg: RunConfig, args, out) -> int:
    from . import matelem

    H = matelem.hamiltonian(cfg.k, cfg.m, cfg.N, gauge=cfg.gauge)
    cmp = matelem.compare_hamiltonian(cfg.k, cfg.m, cfg.N, gauge=cfg.gauge, sign_value=cfg.sign)
    payload = {
        "k": cfg.k,
        "m": cfg.m,
        "n": cfg.N,
        "gauge": cfg.gauge,
        "operator": str(_apply_sign(H, cfg.sign)),
        "status": cmp.status,
        "differences": cmp.differences,
        "realized_constant": str(cmp.realized_constant),
        "printed_constant": str(cmp.printed_constant),
    }
    if args.trace:
        payload["trace"] = {k: str(v) for k, v in matelem.casimir_trace(cfg.m, cfg.N).items()}
    _emit(payload, cfg, out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args, out) -> int:
    what = args.what
    if what == "whittaker":
        from .realization import verify_whittaker

        tab = verify_whittaker(cfg.m, cfg.N, cfg.sign)
        _emit({"m": cfg.m, "n": cfg.N, "ok": tab.ok, "entries": tab.to_json()}, cfg, out)
        return EXIT_OK if tab.ok else EXIT_FAIL
    if what in ("chevalley", "paths", "boxes"):
        from .gzpaths import verify_box_relations, verify_path_relations
        from .realization import verify_chevalley_relations

        rep = {"chevalley": lambda: verify_chevalley_relations(cfg.N), "paths": lambda: verify_path_relations(cfg.N), "boxes": lambda: verify_box_relations(cfg.m, cfg.N)}[what]()
        _emit({"n": cfg.N, "ok": rep.ok, "checked": len(rep), "entries": rep.to_json()}, cfg, out)
        return EXIT_OK if rep.ok else EXIT_FAIL
    if what == "centrality":
        from .matelem import verify_centrality

        res = {f"C{k}": {f"E[{i},{j}]": ok for (i, j), ok in verify_centrality(cfg.N, k).items()} for k in (1, 2)}
        ok = all(all(v.values()) for v in res.values())
        _emit({"n": cfg.N, "ok": ok, "commutes": res}, cfg, out)
        return EXIT_OK if ok else EXIT_FAIL
    if what == "adjoint":
        from .conformance import check_adjoint

        r = check_adjoint(max_n=cfg.N, samples=args.samples)
        _emit(r.to_json(), cfg, out)
        return EXIT_OK if r.status != "fail" else EXIT_FAIL
    raise ConfigError(f"unknown verification {what!r}")


def cmd_report(cfg: RunConfig, args, out) -> int:
    from .conformance import build_report

    only = [s.strip() for s in args.only.split(",")] if args.only else None
    rep = build_report(only=only, inject=args.inject or ())
    payload = rep.to_json()
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, default=str) + "\n")
    text = "\n".join(f"{c.check_id:15s} {c.status}" for c in rep.checks)
    _emit(payload, cfg, out, text=text)
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, dest="N")
    p.add_argument("--epsilon", type=int, help="sign exponent; the sign symbol s becomes (-1)^epsilon")
    p.add_argument("--emit", choices=("json", "text"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grwhittaker", description="Gr(m,N) Whittaker functions: symbolic checks and numerics.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="Gr(m,N) or Gelfand-Zetlin graph")
    _common(p)
    p.add_argument("--format", choices=("json", "dot"))
    p.add_argument("--gz", action="store_true", help="the full Gelfand-Zetlin graph of size n")
    p.add_argument("--output")

    p = sub.add_parser("phase", help="phase function of the integral")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=_floats)
    p.add_argument("--hbar", type=float)
    p.add_argument("--x", type=float)

    p = sub.add_parser("integral", help="evaluate the Whittaker integral")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=_floats)
    p.add_argument("--hbar", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--policy", choices=("trapezoid", "gauss"))
    p.add_argument("--prefactor", action="store_true", help="multiply by exp(-x m(n-m)/2)")
    p.add_argument("--max-evaluations", type=int, default=200_000_000)

    p = sub.add_parser("lax", help="quantum Lax operator, specialized Lax matrix, char poly")
    _common(p)
    p.add_argument("--specialized", action="store_true")
    p.add_argument("--charpoly", action="store_true")
    p.add_argument("--literal", action="store_true", help="compare against the table without hbar repair")

    p = sub.add_parser("hamiltonian", help="Hamiltonians from the Casimir elements")
    _common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--gauge", choices=("none", "prefactor", "balanced"))
    p.add_argument("--trace", action="store_true", help="also print intermediate pieces of C_2")

    p = sub.add_parser("verify", help="run one family of symbolic checks")
    p.add_argument("what", choices=("whittaker", "chevalley", "paths", "boxes", "centrality", "adjoint"))
    _common(p)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("report", help="full conformance report")
    _common(p)
    p.add_argument("--only", help="comma-separated check ids")
    p.add_argument("--output")
    p.add_argument("--inject", action="append", help="force a check id to fail (testing)")
    return ap


_HANDLERS = {
    "graph": (cmd_graph, False),
    "phase": (cmd_phase, False),
    "integral": (cmd_integral, True),
    "lax": (cmd_lax, False),
    "hamiltonian": (cmd_hamiltonian, False),
    "verify": (cmd_verify, False),
    "report": (cmd_report, False),
}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names}
    if args.command == "verify" and args.what in ("chevalley", "paths", "centrality", "adjoint") and overrides.get("N") and not overrides.get("m") and not args.config:
        overrides["m"] = 1
    handler, numeric = _HANDLERS[args.command]
    try:
        cfg = load_config(args.config, overrides, numeric=numeric)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    target = out
    handle = None
    if getattr(args, "output", None) and args.command == "graph":
        handle = open(args.output, "w")
        target = handle
    try:
        return handler(cfg, args, target)
    except (ValueError, NotImplementedError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    finally:
        if handle:
            handle.close()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
