import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, graph, path
from minmaxcut.graph import (
    MINMAX,
    MINSUM,
    GraphError,
    GraphParseError,
    Objective,
    WeightedMultigraph,
    canonical,
    crossing_edges,
    cut_weight,
    labels_to_parts,
    parse_graph,
    part_cuts,
    partition_cost,
    partition_json,
    refines,
    restrict,
    serialize_graph,
)


@st.composite
def weighted_graphs(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=3 * n))
    weights = draw(st.lists(st.integers(0, 9), min_size=len(chosen), max_size=len(chosen)))
    return graph(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])


@st.composite
def graph_and_labels(draw, k_max=4):
    g = draw(weighted_graphs())
    k = draw(st.integers(1, k_max))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=g.n, max_size=g.n))
    return g, tuple(frozenset(v for v in range(g.n) if labels[v] == i) for i in range(k))


# -- cut_weight -----------------------------------------------------------------


def test_cut_weight_examples(triangle, k4):
    assert cut_weight(triangle, {0}) == 2
    assert cut_weight(k4, {0, 1}) == 4
    assert cut_weight(graph(2, [(0, 1, 5)]), {0}) == 5


def test_cut_weight_counts_multiplicity():
    g = WeightedMultigraph.from_edges(2, [(0, 1, Fraction(3, 2), 4)])
    assert cut_weight(g, {1}) == 6


def test_cut_weight_rejects_out_of_range(triangle):
    with pytest.raises(GraphError):
        cut_weight(triangle, {3})


@given(weighted_graphs(), st.data())
def test_cut_is_symmetric(g, data):
    s = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert cut_weight(g, s) == cut_weight(g, set(range(g.n)) - s)


@given(weighted_graphs(), st.data())
def test_cut_is_submodular(g, data):
    a = data.draw(st.sets(st.integers(0, g.n - 1)))
    b = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert cut_weight(g, a) + cut_weight(g, b) >= cut_weight(g, a & b) + cut_weight(g, a | b)


# -- partition_cost -----------------------------------------------------------------


def test_partition_cost_objectives():
    p = path(3)
    parts = ({0}, {1}, {2})
    assert partition_cost(p, parts, MINMAX) == 2
    assert partition_cost(p, parts, MINSUM) == 4
    assert partition_cost(p, parts, Objective.parse("lp:2")) == pytest.approx(math.sqrt(6))


def test_partition_cost_needs_cover():
    with pytest.raises(GraphError):
        partition_cost(path(3), ({0}, {1}))


@given(graph_and_labels())
def test_minsum_is_twice_crossing_weight(case):
    g, parts = case
    crossing = sum((e.total for e in crossing_edges(g, parts)), Fraction(0))
    assert partition_cost(g, parts, MINSUM) == 2 * crossing


@given(graph_and_labels())
def test_lp1_equals_minsum(case):
    g, parts = case
    assert partition_cost(g, parts, Objective.parse("lp:1")) == partition_cost(g, parts, MINSUM)


@settings(max_examples=50)
@given(graph_and_labels())
def test_lp_large_p_approaches_minmax(case):
    g, parts = case
    unit = WeightedMultigraph(g.n, tuple(e.__class__(e.u, e.v, Fraction(1), e.mult) for e in g.edges))
    mm = float(partition_cost(unit, parts, MINMAX))
    lp = partition_cost(unit, parts, Objective.parse("lp:64"))
    assert mm <= lp + 1e-9
    assert lp <= 1.05 * mm + 1e-9


def test_objective_parse_and_str():
    assert str(Objective.parse("lp:3/2")) == "lp:3/2"
    assert Objective.parse("minsum") == MINSUM
    with pytest.raises(ValueError):
        Objective.parse("lp:1/2")
    with pytest.raises(ValueError):
        Objective.parse("median")


# -- crossing_edges, restrict, refines ------------------------------------------------


def test_crossing_edges_examples(k4):
    assert [(e.u, e.v) for e in crossing_edges(path(3), ({0}, {1, 2}))] == [(0, 1)]
    assert crossing_edges(k4, ({0, 1, 2, 3},)) == []
    assert len(crossing_edges(k4, ({0, 1}, {2, 3}))) == 4


def test_crossing_edges_ignores_vertices_outside_ground():
    assert crossing_edges(path(3), ({0}, {1})) != []
    assert crossing_edges(path(3), ({0},)) == []


def test_restrict_examples():
    assert restrict(({0, 1}, {2}, set()), {0, 2}) == (frozenset({0}), frozenset({2}))
    assert restrict(({0, 1}, {2}), set()) == ()
    assert restrict(({0, 1}, {2, 3}), {0, 1}) == (frozenset({0, 1}),)


def test_refines_examples():
    assert refines(({0}, {1}, {2}), ({0, 1}, {2}))
    assert refines(({0, 1}, {2}), ({0, 1}, {2}))
    assert not refines(({0, 1}, {2}), ({0, 2}, {1}))
    with pytest.raises(GraphError):
        refines(({0},), ({0, 1},))


@st.composite
def partitions_of(draw, n=6):
    labels = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    return labels_to_parts(dict(enumerate(labels)), 4)


def _nonempty(parts):
    return canonical(parts)


@given(partitions_of(), partitions_of(), partitions_of())
def test_refines_is_a_partial_order(a, b, c):
    a, b, c = map(_nonempty, (a, b, c))
    assert refines(a, a)
    if refines(a, b) and refines(b, a):
        assert a == b
    if refines(a, b) and refines(b, c):
        assert refines(a, c)


def test_canonical_orders_by_minimum():
    assert canonical([{3, 4}, {1}, set(), {0, 5}]) == (frozenset({0, 5}), frozenset({1}), frozenset({3, 4}))


def test_part_cuts_on_subpartition_with_empty_part(triangle):
    assert part_cuts(triangle, ({0}, {1, 2}, set())) == [2, 2, 0]


# -- file format ---------------------------------------------------------------------


def test_parse_example():
    g = parse_graph("p 2 1\ne 0 1 5\n")
    assert g.n == 2 and cut_weight(g, {0}) == 5


def test_parse_rationals_and_parallel_edges():
    g = parse_graph("# demo\np 3 3\ne 0 1 1/2\ne 0 1 1/2\ne 1 2 0.25\n")
    assert g.m == 3
    assert cut_weight(g, {0}) == 1
    assert cut_weight(g, {2}) == Fraction(1, 4)


@pytest.mark.parametrize(
    "text, line",
    [
        ("# nothing here\n", 0),
        ("p 2 1\np 2 1\ne 0 1 1\n", 2),
        ("p 2 1\ne 0 2 1\n", 2),
        ("p 2 1\ne 1 1 1\n", 2),
        ("p 2 1\ne 0 1 -1\n", 2),
        ("p 2 1\nx 0 1\n", 2),
        ("p 2 2\ne 0 1 1\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphParseError) as info:
        parse_graph(text)
    assert info.value.line == line


def test_missing_header_message():
    with pytest.raises(GraphParseError, match="missing header"):
        parse_graph("# only a comment\n")


@given(weighted_graphs())
def test_serialize_round_trip(g):
    canon = g.canonical()
    assert parse_graph(serialize_graph(g)) == canon
    assert serialize_graph(parse_graph(serialize_graph(g))) == serialize_graph(g)


def test_constructor_validation():
    with pytest.raises(GraphError):
        graph(2, [(0, 0)])
    with pytest.raises(GraphError):
        graph(2, [(0, 2)])
    with pytest.raises(GraphError):
        graph(2, [(0, 1, -1)])
    with pytest.raises(GraphError):
        WeightedMultigraph.from_edges(2, [(0, 1, 1, 0)])


def test_components_ignore_zero_weight_edges():
    g = graph(3, [(0, 1, 0), (1, 2, 1)])
    assert g.components() == [frozenset({0}), frozenset({1, 2})]


def test_induced_maps_back():
    g = complete(4)
    sub, back = g.induced([1, 3])
    assert sub.n == 2 and back == [1, 3]
    assert cut_weight(sub, {0}) == 1


def test_partition_json_fields(triangle):
    out = partition_json(triangle, ({0}, {1, 2}), 2, MINMAX)
    assert out == {"k": 2, "objective": "minmax", "parts": [[0], [1, 2]], "per_part_cut": [2, 2], "cost": 2}
    half = graph(2, [(0, 1, Fraction(1, 2))])
    assert partition_json(half, ({0}, {1}), 2, MINMAX)["cost"] == "1/2"
