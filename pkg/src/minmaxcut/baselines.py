"""Max-flow, Gomory-Hu cut trees (Gusfield) and the cut-tree approximations.

Removing the k-1 lightest edges of a Gomory-Hu tree gives a minsum
2-approximation.  Because every minmax solution is a k-approximation for
minsum, the same partition is a 2k-approximation for minmax.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .graph import GraphError, Parts, WeightedMultigraph, canonical


def _capacities(g: WeightedMultigraph) -> tuple[list[dict[int, int]], int]:
    edges, scale = g.integer_scaled()
    cap: list[dict[int, int]] = [dict() for _ in range(g.n)]
    for u, v, c in edges:
        if c:
            cap[u][v] = cap[u].get(v, 0) + c
            cap[v][u] = cap[v].get(u, 0) + c
    return cap, scale


def _max_flow_int(cap: list[dict[int, int]], s: int, t: int) -> tuple[int, frozenset[int]]:
    """Edmonds-Karp on an undirected integer capacity map."""
    n = len(cap)
    flow: list[dict[int, int]] = [dict() for _ in range(n)]

    def residual(u, v):
        return cap[u].get(v, 0) - flow[u].get(v, 0)

    value = 0
    while True:
        parent = {s: s}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v in cap[u]:
                if v not in parent and residual(u, v) > 0:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            return value, frozenset(parent)
        # bottleneck along the shortest augmenting path
        push, v = None, t
        while v != s:
            u = parent[v]
            r = residual(u, v)
            push = r if push is None else min(push, r)
            v = u
        v = t
        while v != s:
            u = parent[v]
            flow[u][v] = flow[u].get(v, 0) + push
            flow[v][u] = flow[v].get(u, 0) - push
            v = u
        value += push


def max_flow_min_cut(g: WeightedMultigraph, s: int, t: int) -> tuple[Fraction, frozenset[int]]:
    """Minimum s-t cut value and the source side (vertices reachable in the residual)."""
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise GraphError("source or sink out of range")
    if s == t:
        raise GraphError("source and sink must differ")
    cap, scale = _capacities(g)
    value, side = _max_flow_int(cap, s, t)
    return Fraction(value, scale), side


def global_min_cut(g: WeightedMultigraph) -> tuple[Fraction, frozenset[int]]:
    """Exact global minimum cut via n-1 max-flows from vertex 0."""
    if g.n < 2:
        raise GraphError("global min cut needs at least two vertices")
    cap, scale = _capacities(g)
    best = None
    for t in range(1, g.n):
        value, side = _max_flow_int(cap, 0, t)
        if best is None or value < best[0]:
            best = (value, side)
    return Fraction(best[0], scale), best[1]


@dataclass(frozen=True)
class GomoryHuTree:
    n: int
    edges: tuple[tuple[int, int, Fraction], ...]

    def adjacency(self) -> dict[int, list[tuple[int, Fraction]]]:
        adj: dict[int, list[tuple[int, Fraction]]] = {v: [] for v in range(self.n)}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def path_min(self, s: int, t: int) -> Fraction:
        """Smallest edge value on the tree path from s to t."""
        adj = self.adjacency()
        best = {s: None}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, w in adj[u]:
                if v not in best:
                    best[v] = w if best[u] is None else min(best[u], w)
                    queue.append(v)
        return best[t]

    def as_graph(self) -> WeightedMultigraph:
        return WeightedMultigraph.from_edges(self.n, self.edges)


def gomory_hu(g: WeightedMultigraph) -> GomoryHuTree:
    """Gusfield's algorithm: n-1 max-flow calls, no contractions."""
    if not g.is_connected():
        raise GraphError("Gomory-Hu construction needs a connected graph")
    cap, scale = _capacities(g)
    n = g.n
    parent = [0] * n
    value = [0] * n
    for s in range(1, n):
        t = parent[s]
        f, side = _max_flow_int(cap, s, t)
        value[s] = f
        for i in range(n):
            if i != s and i in side and parent[i] == t:
                parent[i] = s
        if parent[t] in side:
            # s moves above t in the tree
            parent[s] = parent[t]
            parent[t] = s
            value[s] = value[t]
            value[t] = f
    edges = tuple((min(s, parent[s]), max(s, parent[s]), Fraction(value[s], scale)) for s in range(1, n))
    return GomoryHuTree(n, tuple(sorted(edges)))


def _tree_components(n: int, edges) -> Parts:
    adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v, *_ in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        comp, stack = {s}, [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    stack.append(y)
        comps.append(frozenset(comp))
    return canonical(comps)


def minsum_2approx(g: WeightedMultigraph, k: int, tree: GomoryHuTree | None = None) -> Parts:
    """Drop the k-1 lightest Gomory-Hu tree edges; the k tree components are the parts."""
    if k > g.n:
        raise GraphError(f"k={k} exceeds n={g.n}")
    if k < 1:
        raise GraphError("k must be positive")
    tree = tree or gomory_hu(g)
    order = sorted(range(len(tree.edges)), key=lambda i: (tree.edges[i][2], i))
    dropped = set(order[: k - 1])
    kept = [e for i, e in enumerate(tree.edges) if i not in dropped]
    return _tree_components(g.n, kept)


def minmax_2k_approx(g: WeightedMultigraph, k: int) -> Parts:
    """Same partition as :func:`minsum_2approx`; cost_minmax <= 2k * OPT_minmax."""
    return minsum_2approx(g, k)
