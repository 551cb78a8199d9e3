"""Gelfand-Zetlin and Gr(m,N) graphs, path functions and their relations.

Vertices are pairs (n, j).  The weight of an arrow x -> y is exp(y - x).
Path functions are exact ``ExpPoly`` values in the formal vertex variables
``("x", n, j)``.  Terms that touch a vertex outside the triangle
1 <= j <= n <= N are dropped, which is what makes the partition bounds
of the sums effective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .symkernel import EONE, EZERO, ExpPoly, gz
from .serialize import exppoly_to_text

Vertex = Tuple[int, int]
Arrow = Tuple[object, object]  # (source, target); target may be SINK

SINK = "0"


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GZGraph:
    N: int
    vertices: Tuple[Vertex, ...]
    arrows: Tuple[Arrow, ...]

    def to_dot(self) -> str:
        return _dot(f"GZ_{self.N}", self.vertices, self.arrows)


def build_gz_graph(N: int) -> GZGraph:
    """Triangle 1 <= j <= n <= N with down arrows (n,j)->(n-1,j) and
    diagonal arrows (n,j)->(n+1,j+1)."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    verts = tuple((n, j) for n in range(1, N + 1) for j in range(1, n + 1))
    arrows = []
    for n, j in verts:
        if n > j:
            arrows.append(((n, j), (n - 1, j)))
        if n < N:
            arrows.append(((n, j), (n + 1, j + 1)))
    return GZGraph(N, verts, tuple(arrows))


@dataclass(frozen=True)
class GrGraph:
    """The Gr(m,N) graph: an (N-m) x m grid of interior vertices plus the
    source (N,1) and the sink 0.

    ``grid`` maps grid coordinates (k, i) (row k = 1..N-m counted from the
    bottom, column i = 1..m) to vertices (k-1+i, i).
    """

    m: int
    N: int
    interior: Tuple[Vertex, ...]
    source: Vertex
    arrows: Tuple[Arrow, ...]
    grid: Dict[Tuple[int, int], Vertex] = field(compare=False)

    def to_dot(self) -> str:
        return _dot(f"Gr_{self.m}_{self.N}", self.interior + (self.source, SINK), self.arrows)

    def arrow_weight(self, arrow: Arrow) -> ExpPoly:
        return arrow_weight(*arrow)


def build_gr_graph(m: int, N: int) -> GrGraph:
    check_mN(m, N)
    grid = {(k, i): (k - 1 + i, i) for k in range(1, N - m + 1) for i in range(1, m + 1)}
    interior = tuple(sorted(grid.values()))
    arrows: List[Arrow] = [((N, 1), grid[(N - m, 1)])]
    for (k, i), v in sorted(grid.items()):
        if k > 1:
            arrows.append((v, grid[(k - 1, i)]))
        if i < m:
            arrows.append((v, grid[(k, i + 1)]))
    arrows.append((grid[(1, m)], SINK))
    return GrGraph(m, N, interior, (N, 1), tuple(arrows), grid)


def check_mN(m: int, N: int) -> None:
    if not (isinstance(m, int) and isinstance(N, int) and 1 <= m < N):
        raise ValueError(f"need 1 <= m < N, got m={m}, N={N}")


def arrow_weight(src, dst) -> ExpPoly:
    ex: Dict[object, int] = {}
    if dst != SINK:
        ex[gz(*dst)] = ex.get(gz(*dst), 0) + 1
    if src != SINK:
        ex[gz(*src)] = ex.get(gz(*src), 0) - 1
    return ExpPoly.exp(ex)


def _name(v) -> str:
    return "zero" if v == SINK else f"x_{v[0]}_{v[1]}"


def _dot(name: str, vertices, arrows) -> str:
    lines = [f"digraph {name} {{"]
    for v in vertices:
        label = "0" if v == SINK else f"x[{v[0]},{v[1]}]"
        lines.append(f'  {_name(v)} [label="{label}"];')
    for a, b in arrows:
        lines.append(f"  {_name(a)} -> {_name(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def phase_from_graph(m: int, N: int) -> ExpPoly:
    """Sum of the arrow weights of the Gr(m,N) graph."""
    g = build_gr_graph(m, N)
    out = EZERO
    for a in g.arrows:
        out = out + arrow_weight(*a)
    return out


# ---------------------------------------------------------------------------
# path functions
# ---------------------------------------------------------------------------

# A vertex lookup returns the variable for (a, b), None if the vertex is off
# the graph (the term is dropped) or 0 if it is pinned to zero.
Lookup = Callable[[int, int], object]


def formal_lookup(N: int) -> Lookup:
    def look(a, b):
        return gz(a, b) if 1 <= b <= a <= N else None

    return look


def realization_lookup(N: int) -> Lookup:
    """Vertices of row N are pinned to 0."""

    def look(a, b):
        if not 1 <= b <= a <= N:
            return None
        return 0 if a == N else gz(a, b)

    return look


def _term(look: Lookup, pairs) -> Optional[ExpPoly]:
    ex: Dict[object, int] = {}
    for (p, q) in pairs:
        X, Y = look(*p), look(*q)
        if X is None or Y is None:
            return None
        if X != 0:
            ex[X] = ex.get(X, 0) + 1
        if Y != 0:
            ex[Y] = ex.get(Y, 0) - 1
    return ExpPoly.exp(ex)


def strict_partitions(r: int, upper: Callable[[int], int]) -> Iterator[Tuple[int, ...]]:
    """1 <= i_1 < ... < i_r with i_a <= upper(a)."""

    def rec(a, lo, acc):
        if a > r:
            yield tuple(acc)
            return
        for i in range(lo, upper(a) + 1):
            yield from rec(a + 1, i + 1, acc + [i])

    yield from rec(1, 1, [])


def step_partitions(s: int, upper: Optional[Callable[[int], int]] = None) -> Iterator[Tuple[int, ...]]:
    """0 <= i_1 <= ... <= i_s with i_1 <= 1 and unit-or-zero increments."""

    def rec(a, prev, acc):
        if a > s:
            yield tuple(acc)
            return
        for d in (0, 1):
            i = prev + d
            if upper is not None and i > upper(a):
                continue
            yield from rec(a + 1, i, acc + [i])

    yield from rec(1, 0, [])


def weak_partitions(s: int, upper: Callable[[int], int]) -> Iterator[Tuple[int, ...]]:
    """0 <= i_1 <= ... <= i_s with i_a <= upper(a)."""

    def rec(a, prev, acc):
        if a > s:
            yield tuple(acc)
            return
        for i in range(prev, upper(a) + 1):
            yield from rec(a + 1, i, acc + [i])

    yield from rec(1, 0, [])


# Partition rules for the weak sums in B and Atilde:
#   "step": i_1 <= 1 and increments in {0, 1}; the two-term recursions hold.
#   "weak": all weak partitions within the bound; needed by the path form of
#           the generators once N >= 5.  Both agree for N <= 4.
RULES = ("step", "weak")


def _weak_sums(rule: str, s: int, upper: Callable[[int], int]):
    if rule == "step":
        return step_partitions(s, upper)
    if rule == "weak":
        return weak_partitions(s, upper)
    raise ValueError(f"unknown partition rule {rule!r}")


def path_A(N: int, r: int, n: int, j: int, look: Optional[Lookup] = None) -> ExpPoly:
    look = look or formal_lookup(N)
    if r < 0:
        return EZERO
    out = EZERO
    for I in strict_partitions(r, lambda a: N - n + a):
        t = _term(look, [((n + i - a, j + i), (n + i - a + 1, j + i)) for a, i in enumerate(I, 1)])
        if t is not None:
            out = out + t
    return out


def path_B(N: int, n: int, j: int, k: int, look: Optional[Lookup] = None, rule: str = "step") -> ExpPoly:
    look = look or formal_lookup(N)
    s = k + j - n - 1
    if s < 0:
        return EZERO
    out = EZERO
    # no explicit bound: rows past N leave the graph and drop out
    for I in _weak_sums(rule, s, lambda a: N):
        pairs = [((n, j), (n + 1, j))] + [((n + i + a, j + i), (n + i + a + 1, j + i)) for a, i in enumerate(I, 1)]
        t = _term(look, pairs)
        if t is not None:
            out = out + t
    return out


def path_At(N: int, r: int, n: int, j: int, look: Optional[Lookup] = None, rule: str = "step") -> ExpPoly:
    look = look or formal_lookup(N)
    if r < 1:
        return EZERO
    out = EZERO
    for I in _weak_sums(rule, r - 1, lambda a: N - n - r):
        pairs = [((n + 1, j + 1), (n, j))] + [((n + i + a + 1, j + a + 1), (n + i + a, j + a)) for a, i in enumerate(I, 1)]
        t = _term(look, pairs)
        if t is not None:
            out = out + t
    return out


def path_Bt(N: int, n: int, j: int, k: int, look: Optional[Lookup] = None) -> ExpPoly:
    look = look or formal_lookup(N)
    s = j - k
    if s < 0:
        return EZERO
    out = EZERO
    for I in strict_partitions(s, lambda a: N - n + a):
        t = _term(look, [((n + i - a + 1, j + 1 - a), (n + i - a, j - a)) for a, i in enumerate(I, 1)])
        if t is not None:
            out = out + t
    return out


def path_P(N: int, r: int, n: int, j: int, k: int, look: Optional[Lookup] = None, rule: str = "step") -> ExpPoly:
    """P^r_{n,j}(k) = A^{r+n-k-j}_{n,j} B_{n,j}(k)."""
    e = r + n - k - j
    if e < 0:
        return EZERO
    return path_A(N, e, n, j, look) * path_B(N, n, j, k, look, rule)


def path_Pt(N: int, r: int, n: int, j: int, k: int, look: Optional[Lookup] = None, rule: str = "step") -> ExpPoly:
    """Ptilde^r_{n,j}(k) = Atilde^{r+k-j}_{n,j} Btilde_{n,j}(k)."""
    return path_At(N, r + k - j, n, j, look, rule) * path_Bt(N, n, j, k, look)


@dataclass(frozen=True)
class PathFamily:
    tag: str  # one of A, B, Atilde, Btilde, P, Ptilde
    n: int
    j: int
    r: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        needs_r = self.tag in ("A", "Atilde", "P", "Ptilde")
        needs_k = self.tag in ("B", "Btilde", "P", "Ptilde")
        if self.tag not in ("A", "B", "Atilde", "Btilde", "P", "Ptilde"):
            raise ValueError(f"unknown path family {self.tag!r}")
        if needs_r and (self.r is None or self.r < 0):
            raise ValueError(f"{self.tag} needs r >= 0")
        if needs_k and self.k is None:
            raise ValueError(f"{self.tag} needs k")


def path_function(fam: PathFamily, graph: GZGraph, pin_last_row: bool = False, rule: str = "step") -> ExpPoly:
    N = graph.N
    if not (1 <= fam.j <= fam.n <= N):
        raise ValueError(f"vertex ({fam.n},{fam.j}) is not in the graph")
    look = realization_lookup(N) if pin_last_row else formal_lookup(N)
    if fam.tag == "A":
        return path_A(N, fam.r, fam.n, fam.j, look)
    if fam.tag == "B":
        return path_B(N, fam.n, fam.j, fam.k, look, rule)
    if fam.tag == "Atilde":
        return path_At(N, fam.r, fam.n, fam.j, look, rule)
    if fam.tag == "Btilde":
        return path_Bt(N, fam.n, fam.j, fam.k, look)
    if fam.tag == "P":
        return path_P(N, fam.r, fam.n, fam.j, fam.k, look, rule)
    return path_Pt(N, fam.r, fam.n, fam.j, fam.k, look, rule)


# ---------------------------------------------------------------------------
# relation reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationEntry:
    relation_id: str
    indices: Dict[str, int]
    residual: str  # text form of lhs - rhs; "0" when the relation holds

    @property
    def ok(self) -> bool:
        return self.residual == "0"

    def to_json(self) -> dict:
        return {"relation-id": self.relation_id, "indices": dict(self.indices), "residual-text": self.residual}


@dataclass
class RelationReport:
    entries: List[RelationEntry] = field(default_factory=list)

    def add(self, relation_id: str, indices: Dict[str, int], residual: ExpPoly | str) -> None:
        text = residual if isinstance(residual, str) else ("0" if residual.is_zero() else str(residual))
        self.entries.append(RelationEntry(relation_id, indices, text))

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def failures(self) -> List[RelationEntry]:
        return [e for e in self.entries if not e.ok]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def _w(N: int, a, b, c, d) -> ExpPoly:
    """exp(x_{a,b} - x_{c,d}); zero when either vertex is off the graph."""
    t = _term(formal_lookup(N), [((a, b), (c, d))])
    return EZERO if t is None else t


def verify_path_relations(N: int, r_max: Optional[int] = None, rule: str = "step") -> RelationReport:
    """Check the four recursions over all vertices (n, j) with n <= N-1 and
    all exponents up to r_max (default N)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    r_max = N if r_max is None else r_max
    rep = RelationReport()
    for n in range(1, N):
        for j in range(1, n + 1):
            for r in range(1, r_max + 1):
                lhs = path_A(N, r, n, j)
                rhs = path_A(N, r, n + 1, j + 1) + path_A(N, r - 1, n, j + 1) * _w(N, n, j + 1, n + 1, j + 1)
                rep.add("A", {"n": n, "j": j, "r": r}, lhs - rhs)
            for r in range(2, r_max + 1):
                lhs = path_At(N, r, n, j, rule=rule) * _w(N, n, j, n + 1, j + 1)
                rhs = path_At(N, r - 1, n + 1, j + 1, rule=rule) + path_At(N, r - 1, n + 2, j + 1, rule=rule)
                rep.add("Atilde", {"n": n, "j": j, "r": r}, lhs - rhs)
            for k in range(n - j + 2, N + 1):
                lhs = path_B(N, n, j, k, rule=rule) * _w(N, n + 1, j, n, j)
                rhs = path_B(N, n + 1, j, k, rule=rule) + path_B(N, n + 2, j + 1, k, rule=rule)
                rep.add("B", {"n": n, "j": j, "k": k}, lhs - rhs)
            for k in range(1, j + 1):
                lhs = path_Bt(N, n, j, k)
                rhs = path_Bt(N, n + 1, j, k) + path_Bt(N, n, j - 1, k) * _w(N, n + 1, j, n, j - 1)
                rep.add("Btilde", {"n": n, "j": j, "k": k}, lhs - rhs)
    return rep


def verify_box_relations(m: int, N: int) -> RelationReport:
    """Box relations a_{K,i} b_{K-1,i} = b_{K,i} a_{K+1,i+1} at the vertex
    K = k-1+i of every grid square (k, i), k = 2..N-m, i = 1..m-1, plus the
    boundary-cycle product a_N * prod b_{top row} * prod a_{last column} * b_m,
    which must equal exp(-x_{N,1}).

    a_{K,i} is the down arrow leaving (K, i); b_{K,i} is the diagonal arrow
    leaving (K, i).  Every arrow used is also checked to be a graph arrow.
    """
    g = build_gr_graph(m, N)
    arrows = set(g.arrows)
    rep = RelationReport()

    def a(K, i):
        arr = ((K, i), (K - 1, i))
        return arr, arrow_weight(*arr)

    def b(K, i):
        arr = ((K, i), (K + 1, i + 1))
        return arr, arrow_weight(*arr)

    for k in range(2, N - m + 1):
        for i in range(1, m):
            K = k - 1 + i
            parts = [a(K, i), b(K - 1, i), b(K, i), a(K + 1, i + 1)]
            missing = [p[0] for p in parts if p[0] not in arrows]
            if missing:
                rep.add("box", {"k": k, "i": i}, f"arrows not in graph: {missing}")
                continue
            rep.add("box", {"k": k, "i": i}, parts[0][1] * parts[1][1] - parts[2][1] * parts[3][1])
    cycle = arrow_weight((N, 1), g.grid[(N - m, 1)])
    for i in range(1, m):
        cycle = cycle * arrow_weight(g.grid[(N - m, i)], g.grid[(N - m, i + 1)])
    for k in range(N - m, 1, -1):
        cycle = cycle * arrow_weight(g.grid[(k, m)], g.grid[(k - 1, m)])
    cycle = cycle * arrow_weight(g.grid[(1, m)], SINK)
    rep.add("cycle", {"m": m, "N": N}, cycle - ExpPoly.exp({gz(N, 1): -1}))
    return rep
