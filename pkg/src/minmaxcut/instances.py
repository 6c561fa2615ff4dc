"""Instance generators: the clique gadget, its quotient, and random corpora."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graph import Edge, GraphError, WeightedMultigraph


def complete_graph(n: int, w=1) -> WeightedMultigraph:
    return WeightedMultigraph.from_edges(n, [(u, v, w) for u, v in itertools.combinations(range(n), 2)])


def is_simple(g: WeightedMultigraph) -> bool:
    pairs = [(min(e.u, e.v), max(e.u, e.v)) for e in g.edges for _ in range(e.mult)]
    return all(e.w == 1 for e in g.edges) and len(pairs) == len(set(pairs))


def has_clique(g: WeightedMultigraph, h: int) -> bool:
    """Brute-force test for a clique on h vertices."""
    if h <= 1:
        return g.n >= h
    adj = {v: set(nbrs) for v, nbrs in g.adjacency().items()}
    return any(all(b in adj[a] for a, b in itertools.combinations(c, 2)) for c in itertools.combinations(range(g.n), h))


@dataclass(frozen=True)
class GadgetSpec:
    base: WeightedMultigraph
    h: int

    def __post_init__(self):
        if self.h < 2:
            raise GraphError("clique size must be at least 2")
        if not is_simple(self.base):
            raise GraphError("the base graph must be simple")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def M(self) -> int:
        return max((self.n + 1) ** 2, 3 * self.m)

    @property
    def N(self) -> int:
        return self.M * self.n + 2

    @property
    def threshold(self) -> int:
        return self.M * self.h - self.h * (self.h - 1)

    @property
    def vertex_count(self) -> int:
        return (self.n + 1) * self.N

    def degree(self, v: int) -> int:
        return int(self.base.degree(v))

    def clique_vertex(self, i: int, j: int) -> int:
        """Vertex j of the clique for base vertex i; i = n names the extra clique."""
        return i * self.N + j

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "m": self.m,
                "h": self.h,
                "M": self.M,
                "N": self.N,
                "threshold": self.threshold,
                "vertices": self.vertex_count,
                "k": self.h + 1,
            },
            sort_keys=True,
        )


def clique_gadget(base: WeightedMultigraph, h: int) -> tuple[WeightedMultigraph, GadgetSpec]:
    """Blow every base vertex up into an N-clique, add an extra N-clique W, and
    connect clique i to W by M - deg(i) disjoint edges so each clique has boundary M."""
    spec = GadgetSpec(base, h)
    n, N, M = spec.n, spec.N, spec.M
    edges: list[Edge] = []
    one = Fraction(1)
    for i in range(n + 1):
        start = i * N
        for a in range(N):
            for b in range(a + 1, N):
                edges.append(Edge(start + a, start + b, one))
    for e in base.edges:
        edges.append(Edge(spec.clique_vertex(e.u, 0), spec.clique_vertex(e.v, 0), one))
    for i in range(n):
        for j in range(M - spec.degree(i)):
            edges.append(Edge(spec.clique_vertex(i, j), spec.clique_vertex(n, j), one))
    return WeightedMultigraph(spec.vertex_count, tuple(edges)), spec


def quotient_graph(spec: GadgetSpec) -> WeightedMultigraph:
    """The gadget with each N-clique contracted: base edges plus a star from vertex n."""
    edges = [(e.u, e.v, 1) for e in spec.base.edges]
    edges += [(v, spec.n, spec.M - spec.degree(v)) for v in range(spec.n)]
    return WeightedMultigraph.from_edges(spec.n + 1, edges)


def random_graph(n: int, density: float, rng: random.Random, weights: tuple[int, int] = (1, 1)) -> WeightedMultigraph:
    lo, hi = weights
    edges = [(u, v, rng.randint(lo, hi)) for u, v in itertools.combinations(range(n), 2) if rng.random() < density]
    return WeightedMultigraph.from_edges(n, edges)


def random_corpus(
    count: int,
    n_range: tuple[int, int],
    density: float = 0.5,
    weights: tuple[int, int] = (1, 1),
    seed: int = 0,
    max_tries: int = 10_000,
) -> list[WeightedMultigraph]:
    """Seeded connected random graphs; each draw is repeated until connected."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(*n_range)
        for _ in range(max_tries):
            g = random_graph(n, density, rng, weights)
            if g.is_connected():
                break
        else:
            raise GraphError(f"no connected graph with n={n}, density={density} after {max_tries} draws")
        out.append(g)
    return out


def atlas_graphs(max_n: int, min_n: int = 1, connected: bool | None = None) -> list[WeightedMultigraph]:
    """All simple graphs on min_n..max_n vertices up to isomorphism (max_n <= 7)."""
    import networkx as nx

    if max_n > 7:
        raise GraphError("the graph atlas stops at 7 vertices")
    out = []
    for G in nx.graph_atlas_g():
        n = G.number_of_nodes()
        if not min_n <= n <= max_n:
            continue
        if connected is not None and n > 0 and nx.is_connected(G) != connected:
            continue
        out.append(WeightedMultigraph.from_edges(n, sorted(G.edges())))
    return out


def parse_weight_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    return int(lo), int(hi or lo)


def graph_from_pairs(n: int, pairs: Sequence[tuple[int, int]]) -> WeightedMultigraph:
    return WeightedMultigraph.from_edges(n, pairs)
