import pytest
from hypothesis import given, strategies as st

from grwhittaker.gzpaths import (
    PathFamily,
    SINK,
    arrow_weight,
    build_gr_graph,
    build_gz_graph,
    path_A,
    path_function,
    phase_from_graph,
    step_partitions,
    verify_box_relations,
    verify_path_relations,
    weak_partitions,
)
from grwhittaker.symkernel import ExpPoly, gz

mN_pairs = st.integers(2, 6).flatmap(lambda N: st.tuples(st.integers(1, N - 1), st.just(N)))


@pytest.mark.parametrize("N,count", [(1, 1), (2, 3), (4, 10)])
def test_gz_vertex_count(N, count):
    assert len(build_gz_graph(N).vertices) == count


def test_gz_graph_n2_arrows():
    assert set(build_gz_graph(2).arrows) == {((2, 1), (1, 1)), ((1, 1), (2, 2))}


def test_gr_graph_1_2():
    g = build_gr_graph(1, 2)
    assert g.interior == ((1, 1),)
    assert set(g.arrows) == {((2, 1), (1, 1)), ((1, 1), SINK)}


def test_gr_graph_1_3_cycle_product():
    g = build_gr_graph(1, 3)
    assert len(g.interior) == 2 and len(g.arrows) == 3
    prod = ExpPoly.const(1)
    for a in g.arrows:
        prod = prod * arrow_weight(*a)
    assert prod == ExpPoly.exp({gz(3, 1): -1})


def test_phase_1_2():
    x11, x21 = gz(1, 1), gz(2, 1)
    assert phase_from_graph(1, 2) == ExpPoly.exp({x11: -1}) + ExpPoly.exp({x11: 1, x21: -1})


def test_dot_lists_interior_vertices():
    dot = build_gr_graph(2, 4).to_dot()
    assert dot.startswith("digraph Gr_2_4 {")
    assert sum("label=\"x[" in line for line in dot.splitlines()) == 5  # 4 interior + source


@pytest.mark.parametrize("m,N", [(0, 2), (2, 2), (3, 2)])
def test_invalid_grassmannian_rejected(m, N):
    with pytest.raises(ValueError):
        build_gr_graph(m, N)


def test_empty_path_product_is_one():
    assert path_A(4, 0, 2, 1) == ExpPoly.const(1)


def test_path_family_validates_indices():
    with pytest.raises(ValueError):
        PathFamily("A", 2, 1)
    with pytest.raises(ValueError):
        PathFamily("Q", 2, 1, r=1)
    with pytest.raises(ValueError):
        path_function(PathFamily("A", 5, 1, r=1), build_gz_graph(3))


def test_step_partitions_are_subset_of_weak():
    step = set(step_partitions(3, lambda a: 3))
    weak = set(weak_partitions(3, lambda a: 3))
    assert step <= weak


@pytest.mark.parametrize("N", [2, 3, 4])
def test_path_relations_small(N):
    assert verify_path_relations(N).ok


@given(mN_pairs)
def test_graph_shape(mN):
    m, N = mN
    g = build_gr_graph(m, N)
    assert len(g.interior) == m * (N - m)
    # grid edges plus the source and sink arrows
    assert len(g.arrows) == (N - m - 1) * m + (m - 1) * (N - m) + 2


@given(mN_pairs)
def test_arrow_weights_telescope_along_any_source_to_sink_path(mN):
    m, N = mN
    g = build_gr_graph(m, N)
    out = {}
    for a, b in g.arrows:
        out.setdefault(a, []).append(b)
    v, prod = g.source, ExpPoly.const(1)
    while v != SINK:
        w = out[v][0]
        prod = prod * arrow_weight(v, w)
        v = w
    assert prod == ExpPoly.exp({gz(N, 1): -1})


@given(mN_pairs)
def test_box_relations(mN):
    assert verify_box_relations(*mN).ok
