import itertools
import random

import pytest

from conftest import complete, cycle, desk_corpus, graph, random_decomposition
from minmaxcut.families import (
    NiceDecomposition,
    build_separating_family,
    check_nice,
    enumerate_adhesion_partitions,
    feasibility_certificate,
    generate_nice_decompositions,
    make_nice,
    shares_adhesion,
    shares_edge,
    verify_nice,
    verify_separating,
)
from minmaxcut.graph import canonical, refines, restrict
from minmaxcut.oracle import all_optima, brute_opt, enumerate_k_partitions
from minmaxcut.structures import (
    SpanningTree,
    TreeDecomposition,
    crossing_count,
    thorup_tree,
    trivial_decomposition,
)


def separates(members, x1, x2):
    return any(x1 <= m and not (m & x2) for m in members)


# -- separating families ------------------------------------------------------------------


@pytest.mark.parametrize("size", range(0, 11))
@pytest.mark.parametrize("s1, s2", [(1, 1), (1, 3), (2, 2), (3, 1), (3, 3), (2, 0), (0, 2)])
def test_exhaustive_family_separates(size, s1, s2):
    fam = build_separating_family(range(size), s1, s2)
    assert verify_separating(fam)
    ground = list(range(size))
    for r1 in range(min(s1, size) + 1):
        for x1 in itertools.combinations(ground, r1):
            rest = [v for v in ground if v not in x1]
            for r2 in range(min(s2, len(rest)) + 1):
                for x2 in itertools.combinations(rest, r2):
                    assert separates(fam.members, set(x1), set(x2))


def test_zero_parameters():
    assert build_separating_family(range(5), 0, 3).members == (frozenset(),)
    assert build_separating_family(range(5), 3, 0).members == (frozenset(range(5)),)


@pytest.mark.parametrize("seed", range(5))
def test_random_family_verifies(seed):
    fam = build_separating_family(range(9), 2, 2, seed=seed, method="random")
    assert verify_separating(fam)


def test_random_family_is_seeded():
    a = build_separating_family(range(20), 2, 3, seed=7)
    b = build_separating_family(range(20), 2, 3, seed=7)
    assert a == b


def test_verify_separating_rejects_a_bad_family():
    fam = build_separating_family(range(4), 1, 1)
    broken = fam.__class__(fam.ground, (frozenset({0}),), 1, 1)
    assert not verify_separating(broken)


# -- adhesion partitions --------------------------------------------------------------------


def test_adhesion_partition_examples():
    t = SpanningTree(3, ((0, 1), (1, 2)))
    assert enumerate_adhesion_partitions({0, 2}, t, 2, budget=0) == [(frozenset({0, 2}),)]
    got = enumerate_adhesion_partitions({0, 2}, t, 2, budget=1)
    assert set(got) == {(frozenset({0, 2}),), (frozenset({0}), frozenset({2}))}
    assert enumerate_adhesion_partitions(set(), t, 2) == [()]


def _brute_feasible(tree, adhesion, k, budget):
    """Partitions of the adhesion that extend to some k-partition of V(T) within budget."""
    out = set()
    for r in range(1, k + 1):
        for parts in enumerate_k_partitions(tree.n, r):
            if crossing_count(tree, parts) <= budget:
                out.add(restrict(parts, adhesion))
    return out


@pytest.mark.parametrize("seed", range(25))
def test_adhesion_partitions_match_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 8)
    tree = SpanningTree(n, tuple((rng.randrange(v), v) for v in range(1, n)))
    adhesion = frozenset(rng.sample(range(n), rng.randint(1, min(4, n))))
    k = rng.randint(1, 3)
    budget = rng.randint(0, 3)
    got = enumerate_adhesion_partitions(adhesion, tree, k, budget)
    assert set(got) == _brute_feasible(tree, adhesion, k, budget)
    for parts in got:
        cert = feasibility_certificate(parts, tree, k, budget)
        assert cert is not None
        assert crossing_count(tree, cert) <= budget
        assert restrict(cert, adhesion) == parts
    # partitions that were left out have no certificate
    for r in range(1, min(k, len(adhesion)) + 1):
        for labels in itertools.product(range(r), repeat=len(adhesion)):
            parts = canonical(
                frozenset(v for v, lab in zip(sorted(adhesion), labels) if lab == i) for i in range(r)
            )
            if len(parts) == r and parts not in got:
                assert feasibility_certificate(parts, tree, k, budget) is None


# -- nice decompositions ---------------------------------------------------------------------


def two_triangles():
    g = graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    td = TreeDecomposition({0: {0, 1, 2}, 1: {2, 3, 4}}, {0: None, 1: 0})
    return g, td


def test_shares_examples():
    g, td = two_triangles()
    assert shares_adhesion({2}, {2, 3}, td, 0)
    assert not shares_adhesion({0}, {1}, td, 0)
    assert shares_edge({0}, {1}, td, g, 0)
    assert shares_edge({2}, {3}, td, g, 0)
    assert not shares_edge({0}, {3}, td, g, 0)
    assert not shares_edge({0}, {1}, td, g, 1)


def test_check_nice_examples():
    g, td = two_triangles()
    whole = make_nice([{0, 1, 2}], [{0}, {1}, {2}])
    assert verify_nice(g, td, 0, whole, 2)
    split = make_nice([{0}, {1, 2}], [{0}, {1, 2}])
    assert check_nice(g, td, 0, split, 2)[0].startswith("(i)")
    with_o = make_nice([{0}, {1}, {2}], [{0}, {1}, {2}], O={2})
    errors = check_nice(g, td, 0, with_o, 2)
    assert any(e.startswith("(iii)") for e in errors)
    assert check_nice(g, td, 0, make_nice([{0, 1}], [{0, 1}]), 2) == ["P is not a partition of the bag"]
    assert not verify_nice(g, td, 0, make_nice([{0, 1, 2}], [{0, 1}, {1, 2}]), 2)


def test_adhesion_condition():
    g = graph(5, [(0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4)])
    td = TreeDecomposition({0: {0, 1, 4}, 1: {0, 1, 2, 3}}, {0: None, 1: 0})
    d = make_nice([{0}, {1}, {4}], [{0}, {1}, {4}], O={4})
    assert check_nice(g, td, 0, d, 2) == ["(iv) an adhesion meets several non-O parts"]
    assert verify_nice(g, td, 0, make_nice([{0, 1}, {4}], [{0}, {1}, {4}], O={4}), 2)


def test_nice_json_round_trip():
    d = make_nice([{0, 1}, {2}], [{0}, {1}, {2}], O={2})
    assert NiceDecomposition.from_json(d.to_json()) == d
    assert d.P == (frozenset({0, 1}), frozenset({2})) and d.p == 1
    assert d.piece(0) == frozenset({2}) and d.piece(1) == frozenset({0, 1})


def _nice_cases():
    rng = random.Random(3)
    cases = []
    for name, g in desk_corpus()[::6]:
        if g.n > 7:
            continue
        td = trivial_decomposition(g) if rng.random() < 0.4 else random_decomposition(g, rng)
        for k in (2, 3):
            if k <= g.n:
                cases.append((name, g, td, k))
    return cases


@pytest.mark.parametrize("threshold", [None, 0])
def test_every_emitted_triple_is_nice_and_some_refines_an_optimum(threshold):
    checked = 0
    for name, g, td, k in _nice_cases():
        tree = thorup_tree(g, k)
        lam = int(brute_opt(g, k).opt_value)
        optima = [p for p in all_optima(g, k) if crossing_count(tree, p) <= 2 * k * k]
        assert optima, name
        for t in td.preorder:
            family = generate_nice_decompositions(g, td, t, tree, k, lam, bag_threshold=threshold)
            assert family, (name, t)
            for d in family:
                assert check_nice(g, td, t, d, k) == [], (name, t, d)
            bag = td.bags[t]
            assert any(refines(d.Q, restrict(p, bag)) for d in family for p in optima), (name, t)
            checked += 1
    assert checked > 100


def test_generation_stats_and_determinism():
    g = cycle(6)
    td = trivial_decomposition(g)
    tree = thorup_tree(g, 2)
    stats = {}
    a = generate_nice_decompositions(g, td, 0, tree, 2, 2, seed=1, stats=stats)
    b = generate_nice_decompositions(g, td, 0, tree, 2, 2, seed=1)
    assert a == b
    assert stats["emitted"] == len(a) and stats["members"] >= 1


def test_small_bag_triples_have_a_single_part():
    g = complete(4)
    td = trivial_decomposition(g)
    for d in generate_nice_decompositions(g, td, 0, thorup_tree(g, 2), 2, 3):
        assert d.P == (frozenset(range(4)),) and not d.O
