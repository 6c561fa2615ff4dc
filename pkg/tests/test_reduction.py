import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import complete, graph, weighted_corpus
from minmaxcut.baselines import global_min_cut
from minmaxcut.graph import GraphError, WeightedMultigraph, canonical, labels_to_parts, partition_cost
from minmaxcut.oracle import brute_opt
from minmaxcut.reduction import (
    SAMPLING_CONSTANT,
    ReductionTrace,
    bk_sample,
    build_instance_collection,
    component_assignments,
    delete_small_cuts,
    knapsack_round,
    lambda_guesses,
    lift_pieces,
    lift_solution,
    sampling_probability,
    stage_epsilon,
)


def heavy_graph(seed, n=10, density=0.8, mult=(300, 600)):
    rng = random.Random(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    return WeightedMultigraph.from_edges(n, [(u, v, 1, rng.randint(*mult)) for u, v in pairs])


def subset_cuts(g):
    """Cut value of every S containing vertex n-1's complement, indexed by mask over the first n-1 vertices."""
    masks = np.arange(1, 1 << (g.n - 1), dtype=np.int64)
    cuts = np.zeros(len(masks))
    for e in g.edges:
        cuts += float(e.total) * (((masks >> e.u) & 1) != ((masks >> e.v) & 1))
    return cuts


def power_of_two_between(opt):
    """The power of two in [opt, 2 opt)."""
    lam = Fraction(1)
    while lam < opt:
        lam *= 2
    while lam / 2 >= opt:
        lam /= 2
    return lam


# -- rounding ------------------------------------------------------------------------------


def test_rounding_example():
    r = knapsack_round(graph(3, [(0, 1, 3), (1, 2, 5)]), Fraction(1, 2), 8)
    assert r.theta == 2
    assert sorted(e.mult for e in r.graph.edges) == [2, 3]
    assert r.graph.total_weight() == 5 <= 2 * 2**2 / Fraction(1, 2)


def test_weights_equal_to_theta_give_one_copy():
    r = knapsack_round(complete(3), Fraction(1, 2), 6)
    assert r.theta == 1 and all(e.mult == 1 for e in r.graph.edges)


def test_heavy_edges_are_contracted():
    r = knapsack_round(graph(3, [(0, 1, 20), (1, 2, 2)]), Fraction(1, 2), 8)
    assert r.contracted == [(0, 1)] and r.vertex_map == (0, 0, 1)
    assert r.graph.n == 2 and r.m == 1


def test_rounding_errors(triangle):
    with pytest.raises(GraphError):
        knapsack_round(triangle, Fraction(1, 2), 0)
    with pytest.raises(GraphError):
        knapsack_round(triangle, 1, 3)


@pytest.mark.parametrize("g", weighted_corpus()[:40])
def test_rounding_size_and_cost_bounds(g):
    rng = random.Random(g.n)
    for eps in (Fraction(1, 2), Fraction(1, 4)):
        lam = max(e.w for e in g.edges)
        r = knapsack_round(g, eps, lam)
        assert r.graph.total_weight() <= 2 * r.m**2 / eps
        for _ in range(20):
            labels = [rng.randrange(3) for _ in range(r.graph.n)]
            rounded = canonical(labels_to_parts(dict(enumerate(labels)), 3))
            lifted = lift_solution(_identity_trace(g, r), rounded)
            original = partition_cost(g, lifted)
            scaled = partition_cost(r.graph, rounded) * r.theta
            assert original <= scaled <= original + eps * lam


def _identity_trace(g, r):
    return ReductionTrace(
        n=g.n, k=2, epsilon=0.5, stage_epsilon=0.5, lam="1", theta=str(r.theta),
        contracted=r.contracted, vertex_map=list(r.vertex_map), rounded_n=r.graph.n,
        copies=int(r.graph.total_weight()), deleted=[], deletion_threshold="0",
        components=[list(range(r.graph.n))],
    )


@pytest.mark.parametrize("g", [g for g in weighted_corpus() if g.n <= 7][:25])
def test_rounded_optimum_lifts_within_factor(g):
    eps = Fraction(1, 4)
    for k in (2, 3):
        opt = brute_opt(g, k).opt_value
        lam = power_of_two_between(opt)
        r = knapsack_round(g, eps, lam)
        if r.graph.n < k:
            continue
        best = brute_opt(r.graph, k).witnesses[0]
        lifted = lift_solution(_identity_trace(g, r), best)
        assert partition_cost(g, lifted) <= (1 + 4 * eps) * opt


# -- deletion ---------------------------------------------------------------------------------


def two_triangles_with_bridge():
    return graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def test_bridge_is_deleted():
    res = delete_small_cuts(two_triangles_with_bridge(), Fraction(1, 2), 8, 3)
    assert res.threshold == 1
    assert res.removed == [[(2, 3, 1)]]
    assert res.graph.components() == [frozenset({0, 1, 2}), frozenset({3, 4, 5})]
    assert not res.overflow


def test_well_connected_graph_is_untouched():
    g = complete(5)
    res = delete_small_cuts(g, Fraction(1, 2), 8, 3)
    assert res.graph == g and res.removed == []


def test_overflow_when_too_many_pieces():
    res = delete_small_cuts(two_triangles_with_bridge(), Fraction(1, 2), 4, 2)
    assert res.overflow and res.removed == []


@pytest.mark.parametrize("k", [2, 3, 4])
def test_deletion_bounds_on_random_graphs(k):
    for g in weighted_corpus()[:50]:
        eps = Fraction(1, 2)
        lam = Fraction(int(g.total_weight()), 3)
        r = knapsack_round(g, eps, lam)
        lam_h = lam / r.theta
        res = delete_small_cuts(r.graph, eps, lam_h, k)
        assert len(res.removed) <= k - 2
        assert res.removed_total < eps * lam_h / 2
        assert res.graph.total_weight() + res.removed_total == r.graph.total_weight()
        if not res.overflow:
            for comp in res.graph.components():
                if len(comp) > 1:
                    sub, _ = res.graph.induced(sorted(comp))
                    assert global_min_cut(sub)[0] > res.threshold


# -- sampling ------------------------------------------------------------------------------------


def test_probability_formula():
    assert sampling_probability(2000, 0.5, 10) == pytest.approx(SAMPLING_CONSTANT * math.log(10) / 500)
    assert sampling_probability(5, 0.5, 10) == 1.0
    assert sampling_probability(0, 0.5, 10) == 1.0


def test_probability_one_keeps_the_graph(k4):
    s = bk_sample(k4, 0.5, seed=1)
    assert s.p == 1.0 and s.graph == k4 and s.mincut == 3


def test_sampling_is_deterministic():
    g = heavy_graph(0)
    a, b = bk_sample(g, 0.5, seed=7), bk_sample(g, 0.5, seed=7)
    assert a.p < 1 and a.graph == b.graph
    assert bk_sample(g, 0.5, seed=8).graph != a.graph


def test_sampling_rejects_disconnected():
    with pytest.raises(GraphError):
        bk_sample(graph(4, [(0, 1), (2, 3)]), 0.5)


@pytest.mark.parametrize("graph_seed", [0, 1])
def test_sampling_preserves_all_cuts(graph_seed):
    g = heavy_graph(graph_seed)
    eps = 0.5
    base = subset_cuts(g)
    good = 0
    for seed in range(100):
        s = bk_sample(g, eps, seed=seed)
        assert s.p < 1
        ratio = subset_cuts(s.graph) / s.p / base
        good += bool(((ratio >= 1 - eps) & (ratio <= 1 + eps)).all())
        size = float(s.graph.total_weight()) / (s.p * float(g.total_weight()))
        assert 1 - eps <= size <= 1 + eps
    assert good >= 95


# -- component part counts -------------------------------------------------------------------


@pytest.mark.parametrize(
    "sizes, k, expected",
    [
        ([5], 3, [(3,)]),
        ([3, 3], 3, [(1, 2), (2, 1)]),
        ([1, 5], 4, [(1, 3)]),
        ([1, 1], 3, []),
        ([], 2, []),
        ([2, 2, 2], 3, [(1, 1, 1)]),
    ],
)
def test_component_assignments(sizes, k, expected):
    assert list(component_assignments(sizes, k)) == expected


def test_component_assignments_match_brute_force():
    for sizes in itertools.product(range(1, 4), repeat=3):
        for k in range(1, 10):
            brute = [c for c in itertools.product(*(range(1, s + 1) for s in sizes)) if sum(c) == k]
            assert sorted(component_assignments(sizes, k)) == brute


# -- instance collection and lifting --------------------------------------------------------------


def test_lambda_guesses_bracket_the_optimum():
    for g in weighted_corpus()[:30]:
        for k in (2, 3):
            opt = brute_opt(g, k).opt_value
            guesses = lambda_guesses(g, k)
            assert any(opt <= lam <= 2 * opt for lam in guesses)
            assert all(b == 2 * a for a, b in zip(guesses, guesses[1:]))


def test_stage_epsilon():
    assert stage_epsilon(0.5) == Fraction(1, 40)
    e = stage_epsilon(Fraction(1, 4))
    assert (1 + 4 * e) * (1 + 2 * e) * (1 + e) / (1 - e) < 1 + Fraction(1, 4)


def test_unit_well_connected_input_survives_every_stage():
    g = complete(5)
    insts = build_instance_collection(g, 2, 0.5)
    assert insts
    for inst in insts:
        (piece,) = inst.pieces
        mults = {e.mult for e in piece.canonical().edges}
        assert piece.n == 5 and len(piece.canonical().edges) == 10 and len(mults) == 1
        assert inst.trace.deleted == [] and inst.trace.sampling[0]["p"] == 1.0


def test_collection_instances_are_unit_and_connected():
    for g in weighted_corpus()[:20]:
        for k in (2, 3):
            eps = 0.5
            insts = build_instance_collection(g, k, eps, seed=3)
            assert insts
            bound = SAMPLING_CONSTANT * k / float(stage_epsilon(eps)) ** 3 * math.log(g.n)
            for inst in insts:
                assert sum(inst.counts) == k
                for piece, count in zip(inst.pieces, inst.counts):
                    assert piece.is_connected()
                    assert all(e.w == 1 for e in piece.edges)
                    if count >= 2:
                        assert brute_opt(piece, count).opt_value <= bound


def test_collection_input_errors(triangle):
    with pytest.raises(GraphError):
        build_instance_collection(graph(4, [(0, 1), (2, 3)]), 2, 0.5)
    with pytest.raises(GraphError):
        build_instance_collection(triangle, 1, 0.5)
    with pytest.raises(GraphError):
        build_instance_collection(triangle, 2, 1.5)
    assert build_instance_collection(triangle, 4, 0.5) == []


def test_trace_round_trip():
    g = weighted_corpus()[0]
    inst = build_instance_collection(g, 2, 0.5)[0]
    text = inst.trace.to_json()
    assert ReductionTrace.from_json(text) == inst.trace
    assert ReductionTrace.from_json(text).to_json() == text


def test_lift_identity_and_contraction():
    g = graph(3, [(0, 1, 20), (1, 2, 2)])
    r = knapsack_round(g, Fraction(1, 2), 8)
    trace = _identity_trace(g, r)
    assert lift_solution(trace, [[0], [1]]) == (frozenset({0, 1}), frozenset({2}))
    r2 = knapsack_round(complete(3), Fraction(1, 2), 6)
    assert lift_solution(_identity_trace(complete(3), r2), [[0, 2], [1]]) == (frozenset({0, 2}), frozenset({1}))


def test_lift_errors():
    g = graph(3, [(0, 1, 20), (1, 2, 2)])
    trace = _identity_trace(g, knapsack_round(g, Fraction(1, 2), 8))
    with pytest.raises(GraphError):
        lift_solution(trace, [[0], [1], [2]])
    with pytest.raises(GraphError):
        lift_pieces(trace, [])


def test_lift_pieces_joins_components():
    g = graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    inst = next(i for i in build_instance_collection(g, 3, 0.5, guesses=[1024]) if len(i.pieces) == 2)
    assert inst.trace.deleted
    local = [
        (frozenset(range(p.n)),) if c == 1 else brute_opt(p, c).witnesses[0]
        for p, c in zip(inst.pieces, inst.counts)
    ]
    lifted = lift_pieces(inst.trace, local)
    assert len(lifted) == 3 and set().union(*lifted) == set(range(6))
