"""Weighted to small-optimum unit instances: rounding, small-cut deletion, sampling.

The pipeline runs once per guess ``lam`` of the optimum:

1. contract edges heavier than ``lam`` and replace every other edge by
   ``ceil(w / theta)`` unit copies, ``theta = eps * lam / m``;
2. while some component has a global min cut of at most
   ``eps * lam_H / (2(k-1))`` copies, delete that cut;
3. keep each copy of each component independently with probability
   ``p = 100 ln n / (eps² · mincut)`` (clamped to 1).

Every stage keeps the vertex set except the contraction, so a partition of
the final instance lifts back through the recorded vertex map.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .baselines import global_min_cut, minmax_2k_approx
from .graph import Edge, GraphError, Parts, WeightedMultigraph, canonical, partition_cost
from .structures import _DSU

# sampling constant from the concentration bound
SAMPLING_CONSTANT = 100


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


# -- stage 1: rounding ------------------------------------------------------------------


@dataclass
class Rounding:
    graph: WeightedMultigraph
    vertex_map: tuple[int, ...]
    theta: Fraction
    contracted: list[tuple[int, int]]
    m: int


def knapsack_round(g: WeightedMultigraph, eps, lam) -> Rounding:
    """Unit multigraph whose copy counts are the weights divided by ``theta``, rounded up."""
    eps, lam = as_fraction(eps), as_fraction(lam)
    if lam <= 0:
        raise GraphError("lambda must be positive")
    if not 0 < eps < 1:
        raise GraphError("epsilon must lie in (0, 1)")
    dsu = _DSU(g.n)
    contracted = []
    for e in g.edges:
        if e.w > lam:
            contracted.append((e.u, e.v))
            dsu.union(e.u, e.v)
    roots = sorted({dsu.find(v) for v in range(g.n)}, key=lambda r: min(v for v in range(g.n) if dsu.find(v) == r))
    index = {r: i for i, r in enumerate(roots)}
    vmap = tuple(index[dsu.find(v)] for v in range(g.n))
    kept = [e for e in g.edges if e.w > 0 and vmap[e.u] != vmap[e.v]]
    m = sum(e.mult for e in kept)
    theta = eps * lam / m if m else Fraction(1)
    edges = [Edge(vmap[e.u], vmap[e.v], Fraction(1), math.ceil(e.w / theta) * e.mult) for e in kept]
    return Rounding(WeightedMultigraph(len(roots), tuple(edges)).canonical(), vmap, theta, contracted, m)


# -- stage 2: deleting small cuts ---------------------------------------------------------


@dataclass
class Deletion:
    graph: WeightedMultigraph
    removed: list[list[tuple[int, int, int]]]
    threshold: Fraction
    overflow: bool = False

    @property
    def removed_total(self) -> int:
        return sum(c for cut in self.removed for _, _, c in cut)


def delete_small_cuts(h: WeightedMultigraph, eps, lam, k: int) -> Deletion:
    """Repeatedly delete a global min cut of value at most ``eps*lam/(2(k-1))`` inside a component.

    A deletion that would leave k or more components is not performed and
    ``overflow`` is set instead: it shows that ``lam`` is far above the optimum.
    """
    if k < 2:
        raise GraphError("k must be at least 2")
    threshold = as_fraction(eps) * as_fraction(lam) / (2 * (k - 1))
    current = h
    removed: list[list[tuple[int, int, int]]] = []
    overflow = False
    while True:
        comps = current.components()
        found = None
        for comp in comps:
            if len(comp) < 2:
                continue
            sub, back = current.induced(sorted(comp))
            value, side = global_min_cut(sub)
            if 0 < value <= threshold:
                found = frozenset(back[v] for v in side)
                break
        if found is None:
            break
        if len(comps) >= k - 1:
            overflow = True
            break
        cut, keep = [], []
        for e in current.edges:
            if (e.u in found) != (e.v in found):
                cut.append((e.u, e.v, int(e.total)))
            else:
                keep.append(e)
        removed.append(cut)
        current = WeightedMultigraph(current.n, tuple(keep))
    return Deletion(current, removed, threshold, overflow)


# -- stage 3: sampling --------------------------------------------------------------------


@dataclass
class Sample:
    graph: WeightedMultigraph
    p: float
    mincut: int


def sampling_probability(mincut, eps, n: int) -> float:
    if mincut <= 0 or n < 2:
        return 1.0
    return min(1.0, SAMPLING_CONSTANT * math.log(n) / (float(eps) ** 2 * float(mincut)))


def bk_sample(h1: WeightedMultigraph, eps, seed: int | Sequence[int] = 0, n: int | None = None) -> Sample:
    """Keep each unit copy independently with probability p (binomial per parallel group)."""
    if not h1.is_connected():
        raise GraphError("sampling expects a connected component")
    if h1.n < 2:
        return Sample(h1, 1.0, 0)
    mincut = int(global_min_cut(h1)[0])
    p = sampling_probability(mincut, eps, n or h1.n)
    if p >= 1.0:
        return Sample(h1, 1.0, mincut)
    rng = np.random.default_rng(seed)
    edges = []
    for e in h1.canonical().edges:
        kept = int(rng.binomial(int(e.total), p))
        if kept:
            edges.append(Edge(e.u, e.v, Fraction(1), kept))
    return Sample(WeightedMultigraph(h1.n, tuple(edges)), p, mincut)


# -- component part counts ---------------------------------------------------------------


def component_assignments(sizes: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    """Every way to give each component at least one and at most ``size`` parts, k in total."""
    sizes = list(sizes)
    if not sizes:
        return
    suffix = [0] * (len(sizes) + 1)
    for i in range(len(sizes) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sizes[i]

    def rec(i: int, left: int, acc: tuple[int, ...]):
        if i == len(sizes):
            if left == 0:
                yield acc
            return
        rest = len(sizes) - i - 1
        for c in range(1, min(sizes[i], left - rest) + 1):
            if left - c <= suffix[i + 1]:
                yield from rec(i + 1, left - c, acc + (c,))

    yield from rec(0, k, ())


# -- traces and collections -------------------------------------------------------------------


@dataclass
class ReductionTrace:
    n: int
    k: int
    epsilon: float
    stage_epsilon: float
    lam: str
    theta: str
    contracted: list[tuple[int, int]]
    vertex_map: list[int]
    rounded_n: int
    copies: int
    deleted: list[list[tuple[int, int, int]]]
    deletion_threshold: str
    components: list[list[int]]
    sampling: list[dict] = field(default_factory=list)
    assignment: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReductionTrace":
        data = json.loads(text)
        data["contracted"] = [tuple(x) for x in data["contracted"]]
        data["deleted"] = [[tuple(x) for x in cut] for cut in data["deleted"]]
        return cls(**data)


@dataclass
class Instance:
    """One unit instance: sampled components, each with its part count."""

    trace: ReductionTrace
    pieces: list[WeightedMultigraph]
    counts: tuple[int, ...]


def lambda_guesses(g: WeightedMultigraph, k: int) -> list[Fraction]:
    """Powers of two bracketing the optimum, from the 2k-approximation's cost.

    With ``ub`` that cost, the optimum lies in ``[ub/2k, ub]``, so some
    power of two in the returned range lies in ``[OPT, 2 OPT]``.
    """
    ub = partition_cost(g, minmax_2k_approx(g, k))
    if ub == 0:
        return []
    lo = ub / (2 * k)
    j = math.floor(math.log2(lo))
    while Fraction(2) ** j > lo:
        j -= 1
    out = []
    while True:
        lam = Fraction(2) ** j
        out.append(lam)
        if lam >= ub:
            return out
        j += 1


def stage_epsilon(eps) -> Fraction:
    """Per-stage accuracy; the composed loss (1+4e)(1+2e)(1+e)/(1-e) stays below 1+eps."""
    return as_fraction(eps) / 20


def build_instance_collection(
    g: WeightedMultigraph,
    k: int,
    eps,
    seed: int = 0,
    guesses: Sequence | None = None,
) -> list[Instance]:
    """Unit instances for every λ guess and every per-component part count."""
    if k < 2:
        raise GraphError("k must be at least 2")
    if not 0 < as_fraction(eps) < 1:
        raise GraphError("epsilon must lie in (0, 1)")
    if not g.is_connected():
        raise GraphError("split the graph into components first (see component_assignments)")
    if k > g.n:
        return []
    e1 = stage_epsilon(eps)
    out = []
    for gi, lam in enumerate(guesses if guesses is not None else lambda_guesses(g, k)):
        lam = as_fraction(lam)
        rounding = knapsack_round(g, e1, lam)
        if rounding.graph.n < k:
            continue
        lam_h = lam / rounding.theta
        deletion = delete_small_cuts(rounding.graph, e1, lam_h, k)
        if deletion.overflow:
            continue
        comps = deletion.graph.components()
        pieces, sampling = [], []
        for ci, comp in enumerate(comps):
            sub, _ = deletion.graph.induced(sorted(comp))
            sample = bk_sample(sub, e1, seed=[seed, gi, ci], n=g.n)
            pieces.append(sample.graph)
            sampling.append(
                {
                    "component": ci,
                    "p": sample.p,
                    "mincut": sample.mincut,
                    "seed": [seed, gi, ci],
                    "copies_before": int(sub.total_weight()),
                    "copies_after": int(sample.graph.total_weight()),
                }
            )
        base = ReductionTrace(
            n=g.n,
            k=k,
            epsilon=float(eps),
            stage_epsilon=float(e1),
            lam=str(lam),
            theta=str(rounding.theta),
            contracted=rounding.contracted,
            vertex_map=list(rounding.vertex_map),
            rounded_n=rounding.graph.n,
            copies=int(rounding.graph.total_weight()),
            deleted=deletion.removed,
            deletion_threshold=str(deletion.threshold),
            components=[sorted(c) for c in comps],
            sampling=sampling,
        )
        for counts in component_assignments([len(c) for c in comps], k):
            out.append(Instance(replace(base, assignment=list(counts)), pieces, counts))
    return out


def lift_solution(trace: ReductionTrace, parts: Sequence[Sequence[int]]) -> Parts:
    """Partition of the rounded vertex set back to the original vertices."""
    seen = [v for p in parts for v in p]
    if sorted(seen) != list(range(trace.rounded_n)):
        raise GraphError("partition does not match the reduced instance's vertex set")
    where = {v: i for i, p in enumerate(parts) for v in p}
    if len(trace.vertex_map) != trace.n:
        raise GraphError("trace vertex map has the wrong length")
    lifted = [set() for _ in parts]
    for v, r in enumerate(trace.vertex_map):
        lifted[where[r]].add(v)
    return canonical(frozenset(x) for x in lifted)


def lift_pieces(trace: ReductionTrace, piece_parts: Sequence[Parts]) -> Parts:
    """Join per-component partitions (local ids) into one over the rounded vertices, then lift."""
    if len(piece_parts) != len(trace.components):
        raise GraphError("one partition per component expected")
    joined = []
    for comp, local in zip(trace.components, piece_parts):
        for part in local:
            joined.append([comp[v] for v in part])
    return lift_solution(trace, joined)
