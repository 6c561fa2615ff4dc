import functools
import itertools

import pytest

from minmaxcut.graph import WeightedMultigraph
from minmaxcut.instances import atlas_graphs, random_corpus
from minmaxcut.oracle import brute_opt


def graph(n, edges):
    return WeightedMultigraph.from_edges(n, edges)


def complete(n, w=1):
    return graph(n, [(u, v, w) for u, v in itertools.combinations(range(n), 2)])


def path(n):
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


@functools.lru_cache(maxsize=None)
def desk_corpus():
    """Connected simple graphs: all of them up to isomorphism for n <= 6, plus
    100 seeded random graphs at n = 7 and 100 at n = 8."""
    out = [(f"atlas{i:03d}", g) for i, g in enumerate(atlas_graphs(6, 2, connected=True))]
    out += [(f"r7_{i:03d}", g) for i, g in enumerate(random_corpus(100, (7, 7), 0.5, seed=11))]
    out += [(f"r8_{i:03d}", g) for i, g in enumerate(random_corpus(100, (8, 8), 0.5, seed=12))]
    return tuple(out)


@functools.lru_cache(maxsize=None)
def weighted_corpus():
    return tuple(random_corpus(100, (4, 8), 0.5, weights=(1, 10), seed=21))


@functools.lru_cache(maxsize=None)
def brute_value(g, k, obj="minmax"):
    from minmaxcut.graph import Objective

    return brute_opt(g, k, Objective.parse(obj)).opt_value


@pytest.fixture(scope="session")
def corpus():
    return desk_corpus()


@pytest.fixture
def triangle():
    return complete(3)


@pytest.fixture
def k4():
    return complete(4)


def _connected_piece(g, allowed, size, rng):
    adj = g.adjacency()
    start = rng.choice(sorted(allowed))
    piece, frontier = {start}, [start]
    while frontier and len(piece) < size:
        x = frontier.pop(rng.randrange(len(frontier)))
        for y in adj[x]:
            if y in allowed and y not in piece and len(piece) < size:
                piece.add(y)
                frontier.append(y)
    return piece


def random_decomposition(g, rng, tries=50):
    """A random valid compact decomposition with up to three carved pieces."""
    from minmaxcut.structures import carve_decomposition, trivial_decomposition, verify_decomposition

    for _ in range(tries):
        pieces = []
        taken: set[int] = set()
        for _ in range(rng.randint(1, 3)):
            if pieces and rng.random() < 0.4:
                par = rng.randrange(len(pieces))
                allowed = set(pieces[par][0])
            else:
                par, allowed = None, set(range(g.n)) - taken
            if len(allowed) < 2:
                continue
            piece = _connected_piece(g, allowed, rng.randint(1, len(allowed) - 1), rng)
            pieces.append((piece, par))
            taken |= piece
        if not pieces:
            continue
        td = carve_decomposition(g, pieces)
        report = verify_decomposition(g, td)
        if report.valid and report.compact and all(td.bags.values()):
            return td
    return trivial_decomposition(g)
