"""Spanning trees and tree packing, tree decompositions, and tree projection.

``project_tree(T, X)`` prunes non-X leaves of T until none remain and then
contracts every maximal path whose inner vertices are non-X vertices of
degree two.  Each projected edge remembers the tree path it stands for, so a
partition of the projection can be lifted back to the whole tree.
"""

from __future__ import annotations

import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import GraphError, Parts, WeightedMultigraph, canonical

log = logging.getLogger(__name__)


# -- spanning trees -------------------------------------------------------------


class _DSU:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        self.p[b] = a
        return True


@dataclass(frozen=True)
class SpanningTree:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(self.n)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_spanning_tree_of(self, g: WeightedMultigraph) -> bool:
        if len(self.edges) != max(self.n - 1, 0) or self.n != g.n:
            return False
        present = set(g.pair_weights())
        dsu = _DSU(self.n)
        return all(e in present and dsu.union(*e) for e in self.edges)


def crossing_count(tree: SpanningTree, parts: Iterable[Iterable[int]]) -> int:
    """Tree edges with both endpoints in the ground set, in different parts."""
    label = {v: i for i, p in enumerate(parts) for v in p}
    return sum(1 for u, v in tree.edges if u in label and v in label and label[u] != label[v])


def _unit_edges(g: WeightedMultigraph) -> list[tuple[int, int, int]]:
    """Parallel groups as (u, v, copies); integer weights count as copies."""
    acc: dict[tuple[int, int], int] = {}
    for e in g.edges:
        if e.w.denominator != 1:
            raise GraphError("tree packing expects integer (unit-copy) weights")
        c = int(e.w) * e.mult
        if c:
            key = (min(e.u, e.v), max(e.u, e.v))
            acc[key] = acc.get(key, 0) + c
    return [(u, v, c) for (u, v), c in sorted(acc.items())]


def _greedy_packing(g: WeightedMultigraph, edges, count: int, rng: random.Random):
    load = [0] * len(edges)
    trees = []
    for _ in range(count):
        ties = [rng.random() for _ in edges]
        order = sorted(range(len(edges)), key=lambda i: (load[i] / edges[i][2], ties[i]))
        dsu, chosen = _DSU(g.n), []
        for i in order:
            u, v, _ = edges[i]
            if dsu.union(u, v):
                chosen.append(i)
                load[i] += 1
        trees.append(SpanningTree(g.n, tuple(edges[i][:2] for i in chosen)))
    return trees, max((load[i] / edges[i][2] for i in range(len(edges))), default=0)


def pack_trees(g: WeightedMultigraph, count: int, seed: int = 0, attempts: int = 8) -> list[SpanningTree]:
    """Greedy packing: each tree is an MST for relative load ``load/capacity``.

    Ties are broken at random; the packing with the smallest peak relative
    load over ``attempts`` tie-break streams is kept.
    """
    if not g.is_connected():
        raise GraphError("tree packing needs a connected graph")
    edges = _unit_edges(g)
    rng = random.Random(seed)
    best = None
    for _ in range(max(1, attempts)):
        trees, peak = _greedy_packing(g, edges, count, rng)
        if best is None or peak < best[1]:
            best = (trees, peak)
    return best[0]


def packing_size(n: int, k: int) -> int:
    return max(1, math.ceil(3 * k**3 * math.log(n + 1)))


def tree_score(g: WeightedMultigraph, tree: SpanningTree) -> int:
    """Sum over tree edges of the weight of the graph cut that edge induces.

    Trees whose fundamental cuts are light are the ones that few edges of a
    good partition can cross; lower is better.
    """
    adj = tree.adjacency()
    parent, order = {0: None}, [0]
    for x in order:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    below: dict[int, set[int]] = {v: {v} for v in range(tree.n)}
    for x in reversed(order[1:]):
        below[parent[x]] |= below[x]
    edges = _unit_edges(g)
    score = 0
    for x in order[1:]:
        side = below[x]
        score += sum(c for u, v, c in edges if (u in side) != (v in side))
    return score


def ranked_trees(g: WeightedMultigraph, k: int, seed: int = 0, count: int | None = None) -> list[SpanningTree]:
    """Distinct packed trees sorted by :func:`tree_score` (ties keep packing order)."""
    if g.n == 1:
        return [SpanningTree(1, ())]
    trees = pack_trees(g, count or packing_size(g.n, k), seed)
    unique = list(dict.fromkeys(trees))
    return sorted(unique, key=lambda t: tree_score(g, t))


def thorup_tree(g: WeightedMultigraph, k: int, seed: int = 0, count: int | None = None) -> SpanningTree:
    return ranked_trees(g, k, seed, count)[0]


# -- tree decompositions -----------------------------------------------------------


@dataclass
class TreeDecomposition:
    """Rooted tree of bags. ``parent[root]`` is None."""

    bags: dict[int, frozenset[int]]
    parent: dict[int, int | None]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.bags = {t: frozenset(b) for t, b in self.bags.items()}
        roots = [t for t, p in self.parent.items() if p is None]
        if set(self.parent) != set(self.bags) or len(roots) != 1:
            raise GraphError("decomposition needs exactly one root and a parent for every node")
        self.root = roots[0]
        self.children: dict[int, list[int]] = {t: [] for t in self.bags}
        for t, p in self.parent.items():
            if p is not None:
                if p not in self.bags:
                    raise GraphError(f"unknown parent node {p}")
                self.children[p].append(t)
        for c in self.children.values():
            c.sort()
        order, seen = [self.root], {self.root}
        for t in order:
            for c in self.children[t]:
                if c in seen:
                    raise GraphError("decomposition tree has a cycle")
                seen.add(c)
                order.append(c)
        if len(order) != len(self.bags):
            raise GraphError("decomposition tree is not connected")
        self.preorder = order

    def postorder(self) -> list[int]:
        return list(reversed(self.preorder))

    def subtree_nodes(self, t: int) -> list[int]:
        out, stack = [], [t]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return sorted(out)

    def subtree_vertices(self, t: int) -> frozenset[int]:
        """V(G_t): union of bags in the subtree rooted at t."""
        key = ("sub", t)
        if key not in self._cache:
            acc = set(self.bags[t])
            for c in self.children[t]:
                acc |= self.subtree_vertices(c)
            self._cache[key] = frozenset(acc)
        return self._cache[key]

    def adhesion(self, t: int) -> frozenset[int]:
        """Bag-side intersection along the edge to the parent; empty at the root."""
        p = self.parent[t]
        if p is None:
            return frozenset()
        key = ("adh", t)
        if key not in self._cache:
            inside = self.subtree_vertices(t)
            outside: set[int] = set()
            for s, bag in self.bags.items():
                if s not in set(self.subtree_nodes(t)):
                    outside |= bag
            self._cache[key] = frozenset(inside & outside)
        return self._cache[key]


def trivial_decomposition(g: WeightedMultigraph) -> TreeDecomposition:
    if not g.is_connected():
        raise GraphError("the single-bag decomposition is only compact for connected graphs")
    return TreeDecomposition({0: frozenset(range(g.n))}, {0: None})


def carve_decomposition(g: WeightedMultigraph, pieces: Sequence[tuple[Iterable[int], int | None]]) -> TreeDecomposition:
    """Build a compact decomposition by carving off connected vertex sets.

    ``pieces[i] = (interior, parent)`` with parent an earlier piece index or
    None for a child of the root.  Node ``i+1`` gets bag ``interior ∪ N(interior)``;
    the root (node 0) and each parent keep what their children did not take.
    Interiors must be connected, pairwise disjoint and non-adjacent unless
    nested, and each neighbourhood must stay inside the parent's region.
    """
    adj = g.adjacency()
    region: dict[int, set[int]] = {0: set(range(g.n))}
    interior: dict[int, set[int]] = {0: set(range(g.n))}
    parent: dict[int, int | None] = {0: None}
    for i, (inner, par) in enumerate(pieces):
        node = i + 1
        inner = set(inner)
        interior[node] = inner
        region[node] = inner | ({y for x in inner for y in adj[x]} - inner)
        parent[node] = 0 if par is None else par + 1
    bags = {}
    for node, reg in region.items():
        bag = set(reg)
        for c, p in parent.items():
            if p == node:
                bag -= interior[c]
        bags[node] = frozenset(bag)
    return TreeDecomposition(bags, parent)


@dataclass
class DecompositionReport:
    valid: bool
    compact: bool
    max_adhesion: int
    violation: str | None = None


def verify_decomposition(g: WeightedMultigraph, td: TreeDecomposition) -> DecompositionReport:
    """Check coverage, edge containment, connected occurrence sets and compactness."""
    violation = None
    covered = set().union(*td.bags.values()) if td.bags else set()
    missing = set(range(g.n)) - covered
    extra = covered - set(range(g.n))
    if missing:
        violation = f"vertex {min(missing)} is in no bag"
    elif extra:
        violation = f"bag contains unknown vertex {min(extra)}"
    if violation is None:
        for u, v in g.pair_weights():
            if not any(u in b and v in b for b in td.bags.values()):
                violation = f"edge ({u},{v}) is in no bag"
                break
    if violation is None:
        for v in range(g.n):
            nodes = {t for t, b in td.bags.items() if v in b}
            tops = [t for t in nodes if td.parent[t] not in nodes]
            if len(tops) != 1:
                violation = f"bags containing vertex {v} are not connected"
                break
    valid = violation is None
    compact = valid
    max_adh = 0
    if valid:
        adj = g.adjacency()
        for t in td.bags:
            adh = td.adhesion(t)
            max_adh = max(max_adh, len(adh))
            inner = td.subtree_vertices(t) - adh
            if not inner:
                compact = False
                violation = f"node {t}: V(G_t) minus adhesion is empty"
                break
            comps = g.components(inner)
            nbr = {y for x in inner for y in adj[x]} - inner
            if len(comps) != 1 or nbr != set(adh):
                compact = False
                violation = f"node {t} is not compact"
                break
    return DecompositionReport(valid, compact, max_adh, violation)


def parse_decomposition(text: str) -> TreeDecomposition:
    bags: dict[int, frozenset[int]] = {}
    parent: dict[int, int | None] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            nums = [int(x) for x in tok[1:]]
        except ValueError:
            raise GraphError(f"line {lineno}: expected integers") from None
        if tok[0] == "b" and nums:
            if nums[0] in bags:
                raise GraphError(f"line {lineno}: duplicate bag {nums[0]}")
            bags[nums[0]] = frozenset(nums[1:])
        elif tok[0] == "t" and len(nums) == 2:
            if nums[1] in parent and parent[nums[1]] is not None:
                raise GraphError(f"line {lineno}: node {nums[1]} has two parents")
            parent[nums[1]] = nums[0]
        else:
            raise GraphError(f"line {lineno}: unknown line {line!r}")
    for t in bags:
        parent.setdefault(t, None)
    return TreeDecomposition(bags, parent)


def serialize_decomposition(td: TreeDecomposition) -> str:
    lines = [f"b {t} " + " ".join(map(str, sorted(td.bags[t]))) for t in td.preorder]
    lines += [f"t {td.parent[t]} {t}" for t in td.preorder if td.parent[t] is not None]
    return "\n".join(lines) + "\n"


# -- unbreakability -------------------------------------------------------------------

UNBREAKABLE_CAP = 20


def verify_unbreakable(g: WeightedMultigraph, s: Iterable[int], a: int, b) -> bool:
    """True iff every cut (S', V-S') of weight <= b leaves <= a vertices of s on some side."""
    s = frozenset(s)
    if len(s) <= a:
        return True
    if g.n > UNBREAKABLE_CAP:
        raise GraphError(f"n={g.n} exceeds the unbreakability enumeration cap {UNBREAKABLE_CAP}")
    edges, scale = g.integer_scaled()
    bound = b * scale
    smask = sum(1 << v for v in s)
    full = (1 << g.n) - 1
    chunk = 1 << 16
    # vertex n-1 is fixed outside S' (cuts are symmetric)
    for start in range(1, 1 << (g.n - 1), chunk):
        masks = np.arange(start, min(start + chunk, 1 << (g.n - 1)), dtype=np.int64)
        cut = np.zeros(len(masks), dtype=np.int64)
        for u, v, c in edges:
            cut += c * (((masks >> u) ^ (masks >> v)) & 1)
        for mask in masks[cut <= bound].tolist():
            inside = bin(mask & smask).count("1")
            outside = bin((full ^ mask) & smask).count("1")
            if inside > a and outside > a:
                return False
    return True


# -- projection ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectedTree:
    x: frozenset[int]
    vertices: frozenset[int]
    # (a, b, path) with path = tree vertices from a to b inclusive
    edges: tuple[tuple[int, int, tuple[int, ...]], ...]

    def degree(self, v: int) -> int:
        return sum(1 for a, b, _ in self.edges if v in (a, b))

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a, b, _ in self.edges]


def project_tree(tree: SpanningTree, x: Iterable[int]) -> ProjectedTree:
    x = frozenset(x)
    if not x:
        raise GraphError("projection needs a nonempty vertex set")
    adj = {v: set(ns) for v, ns in tree.adjacency().items()}
    alive = set(adj)
    leaves = deque(v for v in alive if len(adj[v]) <= 1 and v not in x)
    while leaves:
        v = leaves.popleft()
        if v not in alive or v in x or len(adj[v]) > 1:
            continue
        alive.discard(v)
        for y in adj[v]:
            adj[y].discard(v)
            if len(adj[y]) <= 1 and y not in x:
                leaves.append(y)
        adj[v].clear()
    keep = {v for v in alive if v in x or len(adj[v]) != 2}
    edges = []
    for a in sorted(keep):
        for nb in sorted(adj[a]):
            path, prev, cur = [a], a, nb
            while cur not in keep:
                path.append(cur)
                nxt = next(y for y in adj[cur] if y != prev)
                prev, cur = cur, nxt
            path.append(cur)
            if a < cur:
                edges.append((a, cur, tuple(path)))
    return ProjectedTree(x, frozenset(keep), tuple(sorted(edges)))


def project_partition(tree: SpanningTree, x: Iterable[int], parts: Iterable[Iterable[int]]) -> tuple[ProjectedTree, Parts]:
    """Push a full partition of V(T) down to proj(T, x): restrict to the kept vertices.

    A projected edge crosses only if its tree path does, and paths are
    edge-disjoint, so the projected crossing count never exceeds the tree's.
    """
    proj = project_tree(tree, x)
    return proj, canonical(frozenset(p) & proj.vertices for p in parts)


def lift_partition(tree: SpanningTree, x: Iterable[int], p_proj: Iterable[Iterable[int]]) -> Parts:
    """Extend a partition of proj(T, x)'s vertices to all tree vertices.

    For every crossing projected edge the first tree edge of its path is cut;
    each resulting tree component then joins the part of the projected
    vertices it contains.
    """
    proj = project_tree(tree, x)
    p_proj = [frozenset(p) for p in p_proj if p]
    label = {v: i for i, p in enumerate(p_proj) for v in p}
    if set(label) != set(proj.vertices):
        raise GraphError("p_proj must partition the projected vertex set")
    cut = set()
    for a, b, path in proj.edges:
        if label[a] != label[b]:
            cut.add((min(path[0], path[1]), max(path[0], path[1])))
    adj: dict[int, list[int]] = {v: [] for v in range(tree.n)}
    for u, v in tree.edges:
        if (u, v) not in cut:
            adj[u].append(v)
            adj[v].append(u)
    buckets: list[set[int]] = [set() for _ in p_proj]
    seen: set[int] = set()
    for s in range(tree.n):
        if s in seen:
            continue
        comp, stack = [s], [s]
        seen.add(s)
        while stack:
            y = stack.pop()
            for z in adj[y]:
                if z not in seen:
                    seen.add(z)
                    comp.append(z)
                    stack.append(z)
        owners = {label[v] for v in comp if v in label}
        if len(owners) != 1:
            raise GraphError("lifted component touches several projected parts")
        buckets[owners.pop()].update(comp)
    return canonical(buckets)
