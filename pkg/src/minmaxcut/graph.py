"""Weighted multigraphs, (sub)partitions, cut evaluation and the text format.

Vertices are the integers ``0..n-1``.  Every edge carries an exact rational
weight and a positive integer multiplicity, so a rounded instance with
thousands of parallel unit copies stays a handful of records.

Partitions and k-subpartitions are plain tuples of frozensets.  A
*k-subpartition* keeps its order and may contain empty parts; a *partition*
has only nonempty parts and is usually kept in canonical order (parts sorted
by their smallest vertex).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Parts = tuple[frozenset[int], ...]


class GraphError(ValueError):
    """Invalid graph data or a vertex id out of range."""


class GraphParseError(GraphError):
    """Malformed graph file; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        return Fraction(str(w))
    return Fraction(w)


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    w: Fraction = Fraction(1)
    mult: int = 1

    @property
    def total(self) -> Fraction:
        return self.w * self.mult


@dataclass(frozen=True)
class WeightedMultigraph:
    """Undirected multigraph with rational weights and edge multiplicities."""

    n: int
    edges: tuple[Edge, ...] = ()
    _adj: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("negative vertex count")
        clean = []
        for e in self.edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            w = _as_fraction(e.w)
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise GraphError(f"edge ({e.u},{e.v}) has a vertex outside 0..{self.n - 1}")
            if e.u == e.v:
                raise GraphError(f"self-loop at vertex {e.u}")
            if w < 0:
                raise GraphError(f"negative weight on edge ({e.u},{e.v})")
            if int(e.mult) != e.mult or e.mult < 1:
                raise GraphError(f"multiplicity of edge ({e.u},{e.v}) must be a positive integer")
            clean.append(Edge(e.u, e.v, w, int(e.mult)))
        object.__setattr__(self, "edges", tuple(clean))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence]) -> "WeightedMultigraph":
        """Build from ``(u, v)``, ``(u, v, w)`` or ``(u, v, w, mult)`` tuples."""
        out = []
        for e in edges:
            if len(e) == 2:
                out.append(Edge(e[0], e[1]))
            elif len(e) == 3:
                out.append(Edge(e[0], e[1], _as_fraction(e[2])))
            else:
                out.append(Edge(e[0], e[1], _as_fraction(e[2]), e[3]))
        return cls(n, tuple(out))

    def canonical(self) -> "WeightedMultigraph":
        """Orient edges u<v, merge equal-weight parallels, sort."""
        acc: dict[tuple[int, int, Fraction], int] = {}
        for e in self.edges:
            a, b = min(e.u, e.v), max(e.u, e.v)
            acc[(a, b, e.w)] = acc.get((a, b, e.w), 0) + e.mult
        return WeightedMultigraph(self.n, tuple(Edge(a, b, w, m) for (a, b, w), m in sorted(acc.items())))

    # -- basic queries --------------------------------------------------------

    @property
    def m(self) -> int:
        """Number of edges counted with multiplicity."""
        return sum(e.mult for e in self.edges)

    def total_weight(self) -> Fraction:
        return sum((e.total for e in self.edges), Fraction(0))

    def is_unit(self) -> bool:
        return all(e.w == 1 for e in self.edges)

    def has_integer_weights(self) -> bool:
        return all(e.w.denominator == 1 for e in self.edges)

    def adjacency(self) -> dict[int, dict[int, Fraction]]:
        """Neighbour map with weights summed over parallel copies."""
        if self._adj is None:
            adj: dict[int, dict[int, Fraction]] = {v: {} for v in range(self.n)}
            for e in self.edges:
                if e.total == 0:
                    continue
                adj[e.u][e.v] = adj[e.u].get(e.v, 0) + e.total
                adj[e.v][e.u] = adj[e.v].get(e.u, 0) + e.total
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def pair_weights(self) -> dict[tuple[int, int], Fraction]:
        """Total weight per unordered vertex pair ``(min, max)``."""
        out: dict[tuple[int, int], Fraction] = {}
        for e in self.edges:
            key = (min(e.u, e.v), max(e.u, e.v))
            out[key] = out.get(key, 0) + e.total
        return out

    def degree(self, v: int) -> Fraction:
        return sum(self.adjacency()[v].values(), Fraction(0))

    def components(self, vertices: Iterable[int] | None = None) -> list[frozenset[int]]:
        """Connected components (positive-weight edges), sorted by min vertex."""
        verts = set(range(self.n)) if vertices is None else set(vertices)
        adj = self.adjacency()
        seen: set[int] = set()
        comps = []
        for s in sorted(verts):
            if s in seen:
                continue
            stack, comp = [s], {s}
            seen.add(s)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in verts and y not in seen:
                        seen.add(y)
                        comp.add(y)
                        stack.append(y)
            comps.append(frozenset(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def induced(self, vertices: Iterable[int]) -> tuple["WeightedMultigraph", list[int]]:
        """Induced subgraph relabelled to ``0..|S|-1``; also returns new->old ids."""
        order = sorted(set(vertices))
        index = {v: i for i, v in enumerate(order)}
        edges = tuple(
            Edge(index[e.u], index[e.v], e.w, e.mult)
            for e in self.edges
            if e.u in index and e.v in index
        )
        return WeightedMultigraph(len(order), edges), order

    def integer_scaled(self) -> tuple[list[tuple[int, int, int]], int]:
        """Edges as ``(u, v, c)`` with integer capacities ``c = w*mult*L``; returns L too."""
        lcm = 1
        for e in self.edges:
            lcm = lcm * e.w.denominator // math.gcd(lcm, e.w.denominator)
        return [(e.u, e.v, int(e.total * lcm)) for e in self.edges], lcm


# -- objectives ---------------------------------------------------------------


@dataclass(frozen=True)
class Objective:
    """``minmax``, ``minsum`` or ``lp`` with exponent ``p >= 1``."""

    kind: str = "minmax"
    p: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("minmax", "minsum", "lp"):
            raise ValueError(f"unknown objective {self.kind!r}")
        if self.kind == "lp":
            if self.p is None or Fraction(self.p) < 1:
                raise ValueError("lp objective needs p >= 1")
            object.__setattr__(self, "p", Fraction(self.p))

    @classmethod
    def parse(cls, text: str) -> "Objective":
        text = text.strip()
        if text in ("minmax", "minsum"):
            return cls(text)
        if text.startswith("lp:"):
            return cls("lp", Fraction(text[3:]))
        raise ValueError(f"cannot parse objective {text!r}")

    def __str__(self) -> str:
        return self.kind if self.kind != "lp" else f"lp:{self.p}"

    def value(self, cuts: Sequence[Fraction]):
        """Objective value of a per-part cut vector (float for non-trivial lp)."""
        if self.kind == "minmax":
            return max(cuts, default=Fraction(0))
        if self.kind == "minsum":
            return sum(cuts, Fraction(0))
        if self.p == 1:
            return sum(cuts, Fraction(0))
        s = self.key(cuts)
        return float(s) ** (1.0 / float(self.p))

    def key(self, cuts: Sequence[Fraction]):
        """Monotone surrogate for comparisons; exact when p is an integer."""
        if self.kind != "lp":
            return self.value(cuts)
        if self.p.denominator == 1:
            e = int(self.p)
            return sum((Fraction(c) ** e for c in cuts), Fraction(0))
        return sum(float(c) ** float(self.p) for c in cuts)


MINMAX = Objective("minmax")
MINSUM = Objective("minsum")


# -- cut evaluation -------------------------------------------------------------


def _check_vertices(g: WeightedMultigraph, s: Iterable[int]) -> None:
    for v in s:
        if not (isinstance(v, int) and 0 <= v < g.n):
            raise GraphError(f"vertex {v!r} out of range for n={g.n}")


def cut_weight(g: WeightedMultigraph, s: Iterable[int]) -> Fraction:
    """Total weight of edges with exactly one endpoint in ``s``."""
    s = frozenset(s)
    _check_vertices(g, s)
    return sum(((e.total) for e in g.edges if (e.u in s) != (e.v in s)), Fraction(0))


def part_cuts(g: WeightedMultigraph, parts: Sequence[Iterable[int]]) -> list[Fraction]:
    label = {}
    for i, part in enumerate(parts):
        _check_vertices(g, part)
        for v in part:
            label[v] = i
    cuts = [Fraction(0)] * len(parts)
    for e in g.edges:
        a, b = label.get(e.u), label.get(e.v)
        if a != b:
            if a is not None:
                cuts[a] += e.total
            if b is not None:
                cuts[b] += e.total
    return cuts


def partition_cost(g: WeightedMultigraph, parts: Sequence[Iterable[int]], obj: Objective = MINMAX):
    covered = set()
    for part in parts:
        covered.update(part)
    if covered != set(range(g.n)):
        raise GraphError("partition does not cover every vertex")
    return obj.value(part_cuts(g, parts))


def crossing_edges(g: WeightedMultigraph, parts: Sequence[Iterable[int]]) -> list[Edge]:
    """Edges whose endpoints both lie in the ground set, in different parts."""
    label = {v: i for i, part in enumerate(parts) for v in part}
    return [e for e in g.edges if e.u in label and e.v in label and label[e.u] != label[e.v]]


# -- partitions -------------------------------------------------------------------


def canonical(parts: Iterable[Iterable[int]]) -> Parts:
    """Drop empty parts and sort the rest by minimum element."""
    nonempty = [frozenset(p) for p in parts if p]
    return tuple(sorted(nonempty, key=min))


def restrict(parts: Iterable[Iterable[int]], x: Iterable[int]) -> Parts:
    x = frozenset(x)
    return canonical(frozenset(p) & x for p in parts)


def ground(parts: Iterable[Iterable[int]]) -> frozenset[int]:
    out: set[int] = set()
    for p in parts:
        out.update(p)
    return frozenset(out)


def is_subpartition(parts: Sequence[Iterable[int]], of: Iterable[int] | None = None) -> bool:
    seen: set[int] = set()
    for p in parts:
        p = set(p)
        if seen & p:
            return False
        seen |= p
    return of is None or seen == set(of)


def refines(q: Iterable[Iterable[int]], p: Iterable[Iterable[int]]) -> bool:
    """True iff every part of ``p`` is a union of parts of ``q``."""
    q = [frozenset(a) for a in q if a]
    p = [frozenset(a) for a in p if a]
    if ground(q) != ground(p):
        raise GraphError("refines() needs partitions of the same ground set")
    owner = {v: i for i, part in enumerate(p) for v in part}
    return all(len({owner[v] for v in part}) == 1 for part in q)


def coarsens(parts: Iterable[Iterable[int]], finer: Iterable[Iterable[int]]) -> bool:
    """True iff each part of ``finer`` lies inside a single part of ``parts``.

    Empty parts are ignored and ``parts`` may cover more than ``finer``.
    """
    owner = {v: i for i, part in enumerate(parts) for v in part}
    for part in finer:
        labels = {owner.get(v) for v in part}
        if len(labels) > 1 or None in labels:
            return False
    return True


def labels_to_parts(labels: dict[int, int], k: int) -> Parts:
    """Ordered k-subpartition from a vertex -> part-index map."""
    buckets: list[set[int]] = [set() for _ in range(k)]
    for v, i in labels.items():
        buckets[i].add(v)
    return tuple(frozenset(b) for b in buckets)


# -- text format ------------------------------------------------------------------


def _parse_weight(token: str, line: int) -> Fraction:
    try:
        w = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise GraphParseError(f"bad weight {token!r}", line) from None
    if w < 0:
        raise GraphParseError(f"negative weight {token!r}", line)
    return w


def parse_graph(text: str) -> WeightedMultigraph:
    """Parse the ``p n m`` / ``e u v w`` line format; result is canonical."""
    n = m = None
    header_line = 0
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "p":
            if n is not None:
                raise GraphParseError(f"duplicate header (first on line {header_line})", lineno)
            if len(tok) != 3:
                raise GraphParseError("header must be 'p <n> <m>'", lineno)
            try:
                n, m = int(tok[1]), int(tok[2])
            except ValueError:
                raise GraphParseError("header counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise GraphParseError("header counts must be nonnegative", lineno)
            header_line = lineno
        elif tok[0] == "e":
            if n is None:
                raise GraphParseError("edge before header", lineno)
            if len(tok) != 4:
                raise GraphParseError("edge line must be 'e <u> <v> <w>'", lineno)
            try:
                u, v = int(tok[1]), int(tok[2])
            except ValueError:
                raise GraphParseError("vertex ids must be integers", lineno) from None
            if not (0 <= u < n and 0 <= v < n):
                raise GraphParseError(f"vertex out of range 0..{n - 1}", lineno)
            if u == v:
                raise GraphParseError(f"self-loop at vertex {u}", lineno)
            edges.append(Edge(u, v, _parse_weight(tok[3], lineno)))
        else:
            raise GraphParseError(f"unknown line type {tok[0]!r}", lineno)
    if n is None:
        raise GraphParseError("missing header 'p <n> <m>'")
    if len(edges) != m:
        raise GraphParseError(f"header announces {m} edges, found {len(edges)}", header_line)
    return WeightedMultigraph(n, tuple(edges)).canonical()


def _format_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def serialize_graph(g: WeightedMultigraph) -> str:
    g = g.canonical()
    lines = [f"p {g.n} {g.m}"]
    for e in g.edges:
        lines.extend([f"e {e.u} {e.v} {_format_weight(e.w)}"] * e.mult)
    return "\n".join(lines) + "\n"


def partition_json(g: WeightedMultigraph, parts: Sequence[Iterable[int]], k: int, obj: Objective) -> dict:
    """Partition record in the documented output schema."""
    cuts = part_cuts(g, parts)
    cost = obj.value(cuts)
    return {
        "k": k,
        "objective": str(obj),
        "parts": [sorted(p) for p in parts],
        "per_part_cut": [json_number(c) for c in cuts],
        "cost": json_number(cost),
    }


def json_number(x):
    """Integers stay integers, other rationals become ``"a/b"`` strings."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x
