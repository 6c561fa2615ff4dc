"""Separating families, feasible adhesion partitions and nice decompositions.

A separating family over a ground set S with parameters (s1, s2) contains,
for every disjoint X1, X2 with |X1| <= s1 and |X2| <= s2, a member X with
X1 ⊆ X ⊆ S - X2.  Small grounds get an exhaustive family; larger ones get
random draws.

A *nice decomposition* of a bag is a triple (P, Q, O): Q refines P, O is
either empty or one shared part, and the non-O parts of P do not touch each
other through edges or adhesions.  The DP handles each non-O part of P on
its own and glues the pieces together through O.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .graph import Parts, WeightedMultigraph, canonical, refines, restrict
from .structures import SpanningTree, TreeDecomposition, lift_partition, project_tree

log = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 12


# -- separating families -------------------------------------------------------------


@dataclass(frozen=True)
class SeparatingFamily:
    ground: tuple
    members: tuple[frozenset, ...]
    s1: int
    s2: int


def _subsets_upto(items: Sequence, size: int):
    for r in range(size + 1):
        yield from itertools.combinations(items, r)


def verify_separating(fam: SeparatingFamily) -> bool:
    """Exhaustive check of the separating property (bitmask based)."""
    index = {x: i for i, x in enumerate(fam.ground)}
    masks = [sum(1 << index[x] for x in m) for m in fam.members]
    items = range(len(fam.ground))
    for x1 in _subsets_upto(items, fam.s1):
        m1 = sum(1 << i for i in x1)
        cand = [m for m in masks if m & m1 == m1]
        rest = [i for i in items if i not in x1]
        for x2 in _subsets_upto(rest, fam.s2):
            m2 = sum(1 << i for i in x2)
            if not any(m & m2 == 0 for m in cand):
                return False
    return True


def build_separating_family(
    ground: Iterable[Hashable], s1: int, s2: int, seed: int = 0, method: str = "auto"
) -> SeparatingFamily:
    ground = tuple(sorted(set(ground)))
    size = len(ground)
    s1, s2 = min(s1, size), min(s2, size)
    if method == "auto":
        method = "exhaustive" if size <= EXHAUSTIVE_CAP else "random"
    if s2 == 0:
        return SeparatingFamily(ground, (frozenset(ground),), s1, s2)
    if s1 == 0:
        return SeparatingFamily(ground, (frozenset(),), s1, s2)
    if method == "exhaustive":
        # X = X1 always works; so does X = S - X2.  Keep the smaller list.
        small = sum(math.comb(size, r) for r in range(s1 + 1))
        large = sum(math.comb(size, r) for r in range(s2 + 1))
        if small <= large:
            members = [frozenset(c) for c in _subsets_upto(ground, s1)]
        else:
            members = [frozenset(ground) - frozenset(c) for c in _subsets_upto(ground, s2)]
        return SeparatingFamily(ground, tuple(members), s1, s2)
    if method != "random":
        raise ValueError(f"unknown method {method!r}")
    rng = random.Random(seed)
    prob = s1 / (s1 + s2)
    rounds = math.ceil((s1 + s2) ** s1 * 2 * math.log(size + 2))
    members: list[frozenset] = []
    for _attempt in range(50):
        members += [frozenset(x for x in ground if rng.random() < prob) for _ in range(rounds)]
        fam = SeparatingFamily(ground, tuple(dict.fromkeys(members)), s1, s2)
        if size > EXHAUSTIVE_CAP or verify_separating(fam):
            return fam
    raise RuntimeError("random separating family did not verify")


# -- adhesion partitions -------------------------------------------------------------


def _components_without(vertices: Iterable[int], edges: Sequence[tuple[int, int]], removed) -> list[frozenset[int]]:
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for i, (a, b) in enumerate(edges):
        if i not in removed:
            adj[a].append(b)
            adj[b].append(a)
    seen: set[int] = set()
    comps = []
    for s in sorted(adj):
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
    return comps


def _bin_assignments(count: int, k: int):
    """Restricted-growth labellings of ``count`` items with at most k labels."""
    a = [0] * count

    def rec(i, used):
        if i == count:
            yield tuple(a)
            return
        for lab in range(min(used + 1, k)):
            a[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    if count == 0:
        yield ()
        return
    yield from rec(1, 1)


def enumerate_adhesion_partitions(
    adhesion: Iterable[int], tree: SpanningTree, k: int, budget: int | None = None
) -> list[Parts]:
    """All partitions of the adhesion with <= k parts that extend to a full
    partition crossing the tree at most ``budget`` (default 2k²) times.

    Work happens on proj(T, A): cut up to ``budget`` projected edges and put
    the components into at most k bins.  Cutting a superset of edges only
    refines the components, so it is enough to cut exactly
    ``min(budget, |E(proj)|)`` edges.
    """
    adhesion = frozenset(adhesion)
    if not adhesion:
        return [()]
    budget = 2 * k * k if budget is None else budget
    proj = project_tree(tree, adhesion)
    edges = proj.edge_pairs()
    out: set[Parts] = set()
    r = min(budget, len(edges))
    for removed in itertools.combinations(range(len(edges)), r):
        comps = [c & adhesion for c in _components_without(proj.vertices, edges, set(removed))]
        comps = [c for c in comps if c]
        for labels in _bin_assignments(len(comps), k):
            bins: list[set[int]] = [set() for _ in range(k)]
            for c, lab in zip(comps, labels):
                bins[lab] |= c
            out.add(canonical(bins))
    return sorted(out, key=lambda p: tuple(tuple(sorted(x)) for x in p))


def feasibility_certificate(
    parts: Sequence[Iterable[int]], tree: SpanningTree, k: int, budget: int | None = None
) -> Parts | None:
    """Brute force: a full partition of V(T) restricting to ``parts`` with few tree crossings.

    Tries every set of at most ``budget`` projected edges and lifts the
    first one that separates the parts.  Returns None when none exists.
    """
    parts = [frozenset(p) for p in parts if p]
    if len(parts) > k:
        return None
    adhesion = frozenset().union(*parts) if parts else frozenset()
    if not adhesion:
        return (frozenset(range(tree.n)),)
    budget = 2 * k * k if budget is None else budget
    label = {v: i for i, p in enumerate(parts) for v in p}
    proj = project_tree(tree, adhesion)
    edges = proj.edge_pairs()
    for r in range(min(budget, len(edges)) + 1):
        for removed in itertools.combinations(range(len(edges)), r):
            comps = _components_without(proj.vertices, edges, set(removed))
            owners = [{label[v] for v in c if v in label} for c in comps]
            if any(len(o) > 1 for o in owners):
                continue
            bins: list[set[int]] = [set() for _ in parts]
            for c, o in zip(comps, owners):
                bins[o.pop() if o else 0] |= c
            return lift_partition(tree, adhesion, bins)
    return None


# -- nice decompositions ----------------------------------------------------------------


@dataclass(frozen=True)
class NiceDecomposition:
    parts: Parts  # the non-O parts of P, canonical order
    Q: Parts
    O: frozenset[int]

    @property
    def P(self) -> Parts:
        return self.parts + ((self.O,) if self.O else ())

    @property
    def p(self) -> int:
        return len(self.parts)

    def piece(self, ell: int) -> frozenset[int]:
        """P_ell for ell >= 1, and O for ell = 0."""
        return self.O if ell == 0 else self.parts[ell - 1]

    def to_json(self) -> dict:
        return {
            "P": [sorted(x) for x in self.parts],
            "Q": [sorted(x) for x in self.Q],
            "O": sorted(self.O),
        }

    @classmethod
    def from_json(cls, data: dict) -> "NiceDecomposition":
        return cls(
            canonical(frozenset(x) for x in data["P"]),
            canonical(frozenset(x) for x in data["Q"]),
            frozenset(data.get("O", ())),
        )


def make_nice(P: Iterable[Iterable[int]], Q: Iterable[Iterable[int]], O: Iterable[int] = ()) -> NiceDecomposition:
    O = frozenset(O)
    return NiceDecomposition(canonical(frozenset(x) for x in P if frozenset(x) != O), canonical(Q), O)


def _descendant_adhesions(td: TreeDecomposition, t: int) -> list[frozenset[int]]:
    return [td.adhesion(s) for s in td.subtree_nodes(t)]


def shares_adhesion(p1: Iterable[int], p2: Iterable[int], td: TreeDecomposition, t: int) -> bool:
    """Some adhesion of a descendant of t (t included) meets both sets."""
    p1, p2 = frozenset(p1), frozenset(p2)
    return any(a & p1 and a & p2 for a in _descendant_adhesions(td, t))


def shares_edge(p1: Iterable[int], p2: Iterable[int], td: TreeDecomposition, g: WeightedMultigraph, t: int) -> bool:
    """Some edge of G_t joins the two sets."""
    p1, p2 = frozenset(p1), frozenset(p2)
    inside = td.subtree_vertices(t)
    adj = g.adjacency()
    return any(y in p2 and y in inside for x in p1 & inside for y in adj[x])


def check_nice(g: WeightedMultigraph, td: TreeDecomposition, t: int, d: NiceDecomposition, k: int) -> list[str]:
    """Violated conditions (empty list means the triple is a nice decomposition)."""
    bag = td.bags[t]
    errors = []
    P, Q, O = d.P, d.Q, d.O
    cover_p = [v for x in P for v in x]
    cover_q = [v for x in Q for v in x]
    if sorted(cover_p) != sorted(bag) or len(set(cover_p)) != len(cover_p) or any(not x for x in P):
        return ["P is not a partition of the bag"]
    if sorted(cover_q) != sorted(bag) or len(set(cover_q)) != len(cover_q) or any(not x for x in Q):
        return ["Q is not a partition of the bag"]
    if not refines(Q, P):
        errors.append("Q does not refine P")
    if O:
        if O not in Q:
            errors.append("(i) O is not a part of Q")
    elif len(P) != 1:
        errors.append("(i) O is empty but P has several parts")
    limit = 4 * k * k + 1
    for x in P:
        if sum(1 for y in Q if y <= x) > limit:
            errors.append("(ii) a part of P holds too many parts of Q")
            break
    owner = {v: i for i, x in enumerate(d.parts) for v in x}
    for e in g.edges:
        a, b = owner.get(e.u), owner.get(e.v)
        if a is not None and b is not None and a != b:
            errors.append(f"(iii) edge ({e.u},{e.v}) joins two non-O parts")
            break
    adhesions = [td.adhesion(c) for c in td.children[t]] + [td.adhesion(t)]
    for a in adhesions:
        if len({owner[v] for v in a if v in owner}) > 1:
            errors.append("(iv) an adhesion meets several non-O parts")
            break
    return errors


def verify_nice(g: WeightedMultigraph, td: TreeDecomposition, t: int, d: NiceDecomposition, k: int) -> bool:
    return not check_nice(g, td, t, d, k)


def _interaction_components(
    parts: Sequence[frozenset[int]], skip: int | None, g: WeightedMultigraph, td: TreeDecomposition, t: int
) -> list[list[int]]:
    """Components of H(parts) with node ``skip`` deleted, as sorted index lists."""
    idx = [i for i in range(len(parts)) if i != skip]
    adj: dict[int, list[int]] = {i: [] for i in idx}
    for i, j in itertools.combinations(idx, 2):
        if shares_adhesion(parts[i], parts[j], td, t) or shares_edge(parts[i], parts[j], td, g, t):
            adj[i].append(j)
            adj[j].append(i)
    seen: set[int] = set()
    comps = []
    for s in idx:
        if s in seen:
            continue
        comp, stack = [s], [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


def _case_two(
    comps: list[frozenset[int]], keep: frozenset[int], bag: frozenset[int],
    g: WeightedMultigraph, td: TreeDecomposition, t: int, k: int,
) -> NiceDecomposition:
    limit = 4 * k * k + 1
    # step 1: parts outside the chosen set collapse into O1
    o1 = frozenset().union(*[c for i, c in enumerate(comps) if i not in keep])
    q1 = [c for i, c in enumerate(comps) if i in keep]
    if o1:
        q1.append(o1)
    skip = len(q1) - 1 if o1 else None
    # step 2: oversized interaction components join O
    o2 = set(o1)
    rest = []
    for comp in _interaction_components(q1, skip, g, td, t):
        if len(comp) > limit:
            for i in comp:
                o2 |= q1[i]
        else:
            rest.append([q1[i] for i in comp])
    o2 = frozenset(o2)
    q2 = [x for group in rest for x in group] + ([o2] if o2 else [])
    # step 3: every remaining interaction component becomes one part
    skip2 = len(q2) - 1 if o2 else None
    q3 = [frozenset().union(*[q2[i] for i in comp]) for comp in _interaction_components(q2, skip2, g, td, t)]
    if o2:
        q3.append(o2)
    # step 4: restrict to the bag
    O = o2 & bag
    return make_nice(restrict(q3, bag), restrict(q2, bag), O)


def generate_nice_decompositions(
    g: WeightedMultigraph,
    td: TreeDecomposition,
    t: int,
    tree: SpanningTree,
    k: int,
    lam: int,
    seed: int = 0,
    bag_threshold: int | None = None,
    stats: dict | None = None,
) -> list[NiceDecomposition]:
    """The family D of nice decompositions of bag χ(t).

    Small bags (at most ``(λk+1)^5`` vertices unless ``bag_threshold`` says
    otherwise) give triples ((χ(t)), R_C'|χ(t), ∅) where R_C' are the
    components of proj(T, χ(t)) after deleting an edge set C'.  Larger bags
    run the four merging steps over a second separating family on the parts
    of R_C'.  Triples that fail :func:`check_nice` are dropped and counted.
    """
    bag = td.bags[t]
    proj = project_tree(tree, bag)
    edges = proj.edge_pairs()
    kk = 4 * k * k
    threshold = (lam * k + 1) ** 5 if bag_threshold is None else bag_threshold
    s1 = min(len(edges), kk)
    s2 = min(len(edges), (kk + 1) * 2 * ((lam * k + 1) ** 5 + kk + 1))
    fam = build_separating_family(range(len(edges)), s1, s2, seed)
    found: dict[NiceDecomposition, None] = {}
    rejected = 0
    for cut in fam.members:
        comps = _components_without(proj.vertices, edges, cut)
        if len(bag) <= threshold:
            if len(comps) <= kk + 1:
                found[make_nice([bag], restrict(comps, bag))] = None
            continue
        r1 = min(len(comps), kk + 1)
        r2 = min(len(comps), (kk + 1) * (lam * lam * k * k + 2 * lam * k + kk + 1))
        inner = build_separating_family(range(len(comps)), r1, r2, seed)
        for keep in inner.members:
            d = _case_two(comps, keep, bag, g, td, t, k)
            if check_nice(g, td, t, d, k):
                rejected += 1
            else:
                found[d] = None
    if stats is not None:
        stats.update(members=len(fam.members), emitted=len(found), rejected=rejected)
    if rejected:
        log.debug("node %s: %d candidate triples failed the nice conditions", t, rejected)
    return list(found)
