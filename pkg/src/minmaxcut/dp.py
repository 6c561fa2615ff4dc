"""Dynamic program over a compact tree decomposition for minmax k-cut.

For a node t, a feasible adhesion partition P_A of A_t, a cut vector x
(entries 0..λ) and a tree-crossing budget d (0..2k²), the table f_t says
whether some k-subpartition of V(G_t) puts P_A's parts in positions
0..|P_A|-1, has per-part cut values x inside G_t and crosses the spanning
tree at most d times.

Tables only store true entries, keyed without d: the value kept is the
smallest budget that works (every update rule is monotone in d).  Each entry
also keeps one witness so the optimum partition can be read off at the root.

Per node the work splits along a nice decomposition (P, Q, O) of the bag:

* ``h`` layer ell covers O ∪ P_ell plus the child subtrees hanging from it,
  built by brute force over coarsenings of Q (leaf) or by gluing child
  tables one at a time onto such a coarsening R (the ``ν`` recursion);
* ``g`` layer ell glues h layers 0..ell together through O;
* ``r`` forgets which part holds O; ``f_t`` unions r over all triples.

Gluing may reorder parts.  The admissible permutation pairs factor into
independent groups, so the code forms the image set of each side under its
group and joins them; this yields exactly the entries the pairwise loops
would.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .families import (
    NiceDecomposition,
    enumerate_adhesion_partitions,
    generate_nice_decompositions,
)
from .graph import MINMAX, GraphError, Objective, Parts, WeightedMultigraph, canonical, restrict
from .structures import SpanningTree, TreeDecomposition, thorup_tree, trivial_decomposition, verify_decomposition

log = logging.getLogger(__name__)


# -- witnesses ------------------------------------------------------------------------


class Witness:
    """A k-subpartition stored as a vertex -> index map, possibly lazily
    composed from permuted sub-witnesses."""

    __slots__ = ("labels", "subs")

    def __init__(self, labels: dict[int, int] | None = None, subs: tuple = ()):
        self.labels = labels
        self.subs = subs

    def materialize(self) -> dict[int, int]:
        if self.labels is not None:
            return self.labels
        out: dict[int, int] = {}
        for sub, perm in self.subs:
            for v, b in sub.materialize().items():
                out[v] = perm[b] if perm is not None else b
        return out

    def parts(self, k: int) -> Parts:
        buckets: list[set[int]] = [set() for _ in range(k)]
        for v, b in self.materialize().items():
            buckets[b].add(v)
        return tuple(frozenset(x) for x in buckets)


def _permuted(w: Witness | None, perm: tuple[int, ...] | None) -> Witness | None:
    if w is None or perm is None:
        return w
    return Witness(None, ((w, perm),))


def _joined(w1: Witness | None, p1, w2: Witness | None, p2) -> Witness | None:
    if w1 is None or w2 is None:
        return None
    return Witness(None, ((w1, p1), (w2, p2)))


# -- permutation helpers -----------------------------------------------------------------


def _perms_fixing(k: int, fixed: Iterable[int]) -> list[tuple[int, ...] | None]:
    """All permutations of range(k) fixing ``fixed`` pointwise; identity is None."""
    fixed = set(fixed)
    free = [i for i in range(k) if i not in fixed]
    out: list[tuple[int, ...] | None] = []
    for image in itertools.permutations(free):
        perm = list(range(k))
        for a, b in zip(free, image):
            perm[a] = b
        perm = tuple(perm)
        out.append(None if perm == tuple(range(k)) else perm)
    return out


def _apply(vec: tuple[int, ...], perm: tuple[int, ...] | None) -> tuple[int, ...]:
    """Entry i moves to position perm[i]."""
    if perm is None:
        return vec
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        out[perm[i]] = x
    return tuple(out)


def _compose(outer: tuple[int, ...] | None, inner: tuple[int, ...] | None) -> tuple[int, ...] | None:
    if outer is None:
        return inner
    if inner is None:
        return outer
    return tuple(outer[inner[i]] for i in range(len(inner)))


def _images(table: dict, perms: list, with_q: bool) -> dict:
    """Image of a table under a permutation group, min budget per key.

    Entries are visited by increasing budget; an entry whose key is already
    covered with a budget at most its own lies in an orbit that has been
    fully added, so it is skipped.
    """
    out: dict = {}
    for key, (d, w) in sorted(table.items(), key=lambda kv: kv[1][0]):
        hit = out.get(key)
        if hit is not None and hit[0] <= d:
            continue
        for perm in perms:
            if with_q:
                nk = (_apply(key[0], perm), key[1] if perm is None else perm[key[1]])
            else:
                nk = _apply(key, perm)
            cur = out.get(nk)
            if cur is None or cur[0] > d:
                out[nk] = (d, _permuted(w, perm), perm)
    return {key: (d, w) for key, (d, w, _p) in out.items()}


def _store(table: dict, key, d: int, w) -> None:
    cur = table.get(key)
    if cur is None or cur[0] > d:
        table[key] = (d, w)


# -- results --------------------------------------------------------------------------------


@dataclass
class DPResult:
    feasible: bool
    value: object = None
    cuts: tuple[int, ...] | None = None
    partition: Parts | None = None
    stats: dict = field(default_factory=dict)


class DPSolver:
    """Bottom-up evaluation of the tables on a unit (integer copy) multigraph."""

    def __init__(
        self,
        g: WeightedMultigraph,
        k: int,
        lam: int,
        tree: SpanningTree | None = None,
        td: TreeDecomposition | None = None,
        *,
        seed: int = 0,
        witnesses: bool = True,
        prune_dominated: bool = True,
        bag_threshold: int | None = None,
        audit: bool = False,
    ):
        if k < 2:
            raise GraphError("the DP needs k >= 2")
        if lam < 0:
            raise GraphError("lambda must be nonnegative")
        if not g.has_integer_weights():
            raise GraphError("the DP runs on unit-weight graphs (integer weights count as copies)")
        if not g.is_connected():
            raise GraphError("the DP needs a connected graph; split components first")
        self.g, self.k, self.lam = g, k, int(lam)
        self.budget = 2 * k * k
        self.seed = seed
        self.witnesses = witnesses
        self.prune_dominated = prune_dominated
        self.bag_threshold = bag_threshold
        self.audit = audit
        self.tree = tree if tree is not None else thorup_tree(g, k, seed)
        if not self.tree.is_spanning_tree_of(g):
            raise GraphError("supplied tree is not a spanning tree of the graph")
        if td is None:
            if g.n > (self.lam * k + 1) ** 5:
                log.info("single bag exceeds the unbreakable size bound; running time is not guaranteed")
            td = trivial_decomposition(g)
        else:
            report = verify_decomposition(g, td)
            if not (report.valid and report.compact):
                raise GraphError(f"unusable tree decomposition: {report.violation}")
        self.td = td
        self.adj: dict[int, dict[int, int]] = {v: {} for v in range(g.n)}
        for (u, v), c in g.pair_weights().items():
            c = int(c)
            if c:
                self.adj[u][v] = c
                self.adj[v][u] = c
        self.tree_adj: dict[int, set[int]] = {v: set() for v in range(g.n)}
        for u, v in self.tree.edges:
            self.tree_adj[u].add(v)
            self.tree_adj[v].add(u)
        self.tables: dict[int, dict[Parts, dict]] = {}
        self.families: dict[int, list[Parts]] = {}
        self.stats: dict = {"entries": 0, "triples": 0, "triples_used": 0, "audited": 0}

    # -- small graph helpers --------------------------------------------------------------

    def cut_vector(self, labels: dict[int, int], within: Iterable[int]) -> tuple[int, ...]:
        within = set(within)
        cut = [0] * self.k
        for u in within:
            bu = labels[u]
            for v, c in self.adj[u].items():
                if v in within and labels[v] != bu:
                    cut[bu] += c
        return tuple(cut)

    def tree_crossings(self, labels: dict[int, int], within: Iterable[int]) -> int:
        within = set(within)
        return sum(
            1 for u in within for v in self.tree_adj[u] if u < v and v in within and labels[u] != labels[v]
        )

    def _pieces(self, D: NiceDecomposition, ell: int) -> frozenset[int]:
        return D.O | D.piece(ell)

    def attached_children(self, t: int, D: NiceDecomposition, ell: int) -> list[int]:
        """A(ell): children whose adhesion lies in O ∪ P_ell and meets P_ell."""
        ground = self._pieces(D, ell)
        piece = D.piece(ell)
        return [c for c in self.td.children[t] if self.td.adhesion(c) <= ground and self.td.adhesion(c) & piece]

    def layer_vertices(self, t: int, D: NiceDecomposition, ell: int) -> frozenset[int]:
        """V(G(ell))."""
        out = set(self._pieces(D, ell))
        for c in self.attached_children(t, D, ell):
            out |= self.td.subtree_vertices(c)
        return frozenset(out)

    # -- enumeration of coarsenings ----------------------------------------------------------

    def _coarsenings(self, t: int, D: NiceDecomposition, PA: Parts, ell: int):
        """k-subpartitions R of O ∪ P_ell coarsening Q, with the adhesion pinned
        when it lies inside, tree crossings <= 2k² and every part's cut inside
        G[O ∪ P_ell] at most λ.  Yields (labels, cut vector, crossings, q values)."""
        k, lam, budget = self.k, self.lam, self.budget
        ground = self._pieces(D, ell)
        qparts = [x for x in D.Q if x <= ground]
        adhesion = self.td.adhesion(t)
        forced: dict[int, int] = {}
        if adhesion <= ground:
            where = {v: i for i, part in enumerate(PA) for v in part}
            for j, x in enumerate(qparts):
                idx = {where[v] for v in x & adhesion}
                if len(idx) > 1:
                    return
                if idx:
                    forced[j] = idx.pop()
        owner = {v: j for j, x in enumerate(qparts) for v in x}
        weights: list[list[tuple[int, int, int]]] = [[] for _ in qparts]
        pair_e: dict[tuple[int, int], int] = {}
        pair_t: dict[tuple[int, int], int] = {}
        for u in ground:
            ju = owner[u]
            for v, c in self.adj[u].items():
                if v in owner and u < v and owner[v] != ju:
                    key = (min(ju, owner[v]), max(ju, owner[v]))
                    pair_e[key] = pair_e.get(key, 0) + c
            for v in self.tree_adj[u]:
                if v in owner and u < v and owner[v] != ju:
                    key = (min(ju, owner[v]), max(ju, owner[v]))
                    pair_t[key] = pair_t.get(key, 0) + 1
        for (a, b) in set(pair_e) | set(pair_t):
            weights[b].append((a, pair_e.get((a, b), 0), pair_t.get((a, b), 0)))
        o_index = owner[min(D.O)] if D.O else None
        n_parts = len(qparts)
        bins = [0] * n_parts
        cut = [0] * k

        def rec(j: int, tc: int):
            if j == n_parts:
                labels = {v: bins[owner[v]] for v in ground}
                qs = range(k) if o_index is None else (bins[o_index],)
                yield labels, tuple(cut), tc, qs
                return
            choices = (forced[j],) if j in forced else range(k)
            for b in choices:
                ok = True
                touched = []
                extra = 0
                for a, c, tt in weights[j]:
                    ba = bins[a]
                    if ba != b:
                        extra += tt
                        if c:
                            cut[b] += c
                            cut[ba] += c
                            touched.append((ba, c))
                if tc + extra > budget or cut[b] > lam or any(cut[ba] > lam for ba, _ in touched):
                    ok = False
                if ok:
                    bins[j] = b
                    yield from rec(j + 1, tc + extra)
                for ba, c in touched:
                    cut[b] -= c
                    cut[ba] -= c

        yield from rec(0, 0)

    # -- h, nu -----------------------------------------------------------------------------------

    def compute_h(self, t: int, D: NiceDecomposition, PA: Parts, ell: int) -> dict:
        """Layer ell of h: keys (y, q) -> (min d, witness)."""
        children = self.attached_children(t, D, ell)
        table: dict = {}
        for labels, cut, tc, qs in self._coarsenings(t, D, PA, ell):
            w = Witness(labels) if self.witnesses else None
            if not children:
                for q in qs:
                    _store(table, (cut, q), tc, w)
                continue
            nu = self.compute_nu(t, D, ell, labels, cut, tc, qs, w, children)
            for key, (d, wit) in nu.items():
                _store(table, key, d, wit)
        if self.audit:
            for (y, q), (d, w) in table.items():
                self.check_layer_entry(t, D, PA, ell, y, q, d, w, cumulative=False)
        return table

    def compute_nu(self, t, D, ell, labels, cut, tc, qs, w, children) -> dict:
        """Glue child tables one by one onto the coarsening ``labels`` (keys (z, q))."""
        k, lam, budget = self.k, self.lam, self.budget
        table = {(cut, q): (tc, w) for q in qs}
        used = set(labels.values())
        group1 = _perms_fixing(k, used)
        for child in children:
            adh = self.td.adhesion(child)
            parts_by_bin: dict[int, set[int]] = {}
            for v in adh:
                parts_by_bin.setdefault(labels[v], set()).add(v)
            r_adh = canonical(frozenset(x) for x in parts_by_bin.values())
            gamma = [labels[min(x)] for x in r_adh]
            child_rows = self.tables[child].get(r_adh)
            if not child_rows:
                return {}
            ka = len(r_adh)
            inner = {v: i for i, x in enumerate(r_adh) for v in x}
            corr = [0] * k
            for u in adh:
                for v, c in self.adj[u].items():
                    if v in inner and inner[v] != inner[u]:
                        corr[inner[u]] += c
            tcross = sum(1 for u in adh for v in self.tree_adj[u] if u < v and v in inner and inner[u] != inner[v])
            # sigma2 sends child position j < ka to gamma[j]; the rest fill the free bins in order
            rest = [b for b in range(k) if b not in gamma]
            base = tuple(gamma + rest)
            shifted = {}
            for x, (d2, w2) in child_rows.items():
                key = _apply(tuple(xi - ci for xi, ci in zip(x, corr)), base)
                _store(shifted, key, d2, _permuted(w2, base))
            right = _images(shifted, _perms_fixing(k, gamma), with_q=False)
            left = _images(table, group1, with_q=True)
            table = {}
            for (z, q), (d1, w1) in left.items():
                for xv, (d2, w2) in right.items():
                    vec = tuple(a + b for a, b in zip(z, xv))
                    if max(vec) > lam:
                        continue
                    d3 = max(d1 + d2 - tcross, 0)
                    if d3 > budget:
                        continue
                    _store(table, (vec, q), d3, _joined(w1, None, w2, None))
            if not table:
                return {}
        return table

    # -- g, r, f -----------------------------------------------------------------------------------

    def compute_g(self, t: int, D: NiceDecomposition, PA: Parts, layers: list[dict]) -> dict:
        k, lam, budget = self.k, self.lam, self.budget
        adhesion = self.td.adhesion(t)
        kp = len(PA)
        g = layers[0]
        covered = set(D.O)
        for ell in range(1, D.p + 1):
            perms1 = _perms_fixing(k, range(kp) if adhesion <= covered else ())
            covered |= D.piece(ell)
            perms2 = _perms_fixing(k, range(kp) if adhesion <= D.O | D.piece(ell) else ())
            left: dict[int, list] = {}
            for (y, q), (d, w) in _images(g, perms1, with_q=True).items():
                left.setdefault(q, []).append((y, d, w))
            right: dict[int, list] = {}
            for (z, q), (d, w) in _images(layers[ell], perms2, with_q=True).items():
                right.setdefault(q, []).append((z, d, w))
            new: dict = {}
            for q, rows in left.items():
                for y, d1, w1 in rows:
                    for z, d2, w2 in right.get(q, ()):
                        d3 = d1 + d2
                        if d3 > budget:
                            continue
                        vec = tuple(a + b for a, b in zip(y, z))
                        if max(vec) > lam:
                            continue
                        _store(new, (vec, q), d3, _joined(w1, None, w2, None))
            g = new
            if self.audit:
                for (y, q), (d, w) in g.items():
                    self.check_layer_entry(t, D, PA, ell, y, q, d, w, cumulative=True)
        return g

    @staticmethod
    def compute_r(g_last: dict) -> dict:
        r: dict = {}
        for (x, _q), (d, w) in g_last.items():
            _store(r, x, d, w)
        return r

    def nice_family(self, t: int) -> list[NiceDecomposition]:
        fam = generate_nice_decompositions(
            self.g, self.td, t, self.tree, self.k, self.lam, seed=self.seed, bag_threshold=self.bag_threshold
        )
        self.stats["triples"] += len(fam)
        if self.prune_dominated:
            fam = prune_dominated(fam)
        self.stats["triples_used"] += len(fam)
        return fam

    def node_table(self, t: int) -> dict[Parts, dict]:
        family = enumerate_adhesion_partitions(self.td.adhesion(t), self.tree, self.k, self.budget)
        self.families[t] = family
        f: dict[Parts, dict] = {PA: {} for PA in family}
        for D in self.nice_family(t):
            for PA in family:
                layers = [self.compute_h(t, D, PA, ell) for ell in range(D.p + 1)]
                r = self.compute_r(self.compute_g(t, D, PA, layers))
                for x, (d, w) in r.items():
                    _store(f[PA], x, d, w)
        if self.audit:
            for PA, rows in f.items():
                for x, (d, w) in rows.items():
                    self.check_f_entry(t, PA, x, d, w)
        self.stats["entries"] += sum(len(rows) for rows in f.values())
        return f

    def run(self) -> dict[Parts, dict]:
        for t in self.td.postorder():
            self.tables[t] = self.node_table(t)
        return self.tables[self.td.root]

    def solve(self, obj: Objective = MINMAX) -> DPResult:
        if self.k > self.g.n:
            return DPResult(False, stats=self.stats)
        root = self.run()
        return extract_opt(root, self.k, obj, self.stats)

    # -- soundness checks ---------------------------------------------------------------------------

    def check_f_entry(self, t, PA, x, d, w) -> None:
        self.stats["audited"] += 1
        if w is None:
            return
        labels = w.materialize()
        verts = self.td.subtree_vertices(t)
        assert set(labels) == set(verts), "f witness does not cover V(G_t)"
        adhesion = self.td.adhesion(t)
        for i in range(self.k):
            got = frozenset(v for v in adhesion if labels[v] == i)
            want = PA[i] if i < len(PA) else frozenset()
            assert got == want, "f witness breaks the adhesion partition"
        assert self.cut_vector(labels, verts) == tuple(x), "f witness has the wrong cut vector"
        assert self.tree_crossings(labels, verts) <= d, "f witness exceeds the crossing budget"

    def check_layer_entry(self, t, D, PA, ell, y, q, d, w, cumulative: bool) -> None:
        """g entries (cumulative) cover layers 0..ell, h entries only layer ell."""
        self.stats["audited"] += 1
        if w is None:
            return
        labels = w.materialize()
        layers = range(ell + 1) if cumulative else [ell]
        verts: set[int] = set()
        ground: set[int] = set()
        for i in layers:
            verts |= self.layer_vertices(t, D, i)
            ground |= self._pieces(D, i)
        assert set(labels) == verts, "layer witness covers the wrong vertex set"
        for x in D.Q:
            if x <= ground:
                assert len({labels[v] for v in x}) == 1, "layer witness does not coarsen Q"
        assert self.tree_crossings(labels, verts) <= d, "layer witness exceeds the crossing budget"
        assert self.cut_vector(labels, verts) == tuple(y), "layer witness has the wrong cut vector"
        assert all(labels[v] == q for v in D.O), "O is not inside part q"
        adhesion = self.td.adhesion(t)
        if adhesion <= ground:
            for i in range(self.k):
                got = frozenset(v for v in adhesion if labels[v] == i)
                want = PA[i] if i < len(PA) else frozenset()
                assert got == want, "layer witness breaks the adhesion partition"

    def dump(self) -> list[dict]:
        """Tables as JSON-ready rows (one per stored entry)."""
        rows = []
        for t, table in self.tables.items():
            for PA, entries in table.items():
                for x, (d, w) in sorted(entries.items()):
                    rows.append(
                        {
                            "node": t,
                            "adhesion_partition": [sorted(p) for p in PA],
                            "x": list(x),
                            "d": d,
                            "bit": 1,
                            "witness": None if w is None else [sorted(p) for p in w.parts(self.k)],
                        }
                    )
        return rows


def prune_dominated(family: list[NiceDecomposition]) -> list[NiceDecomposition]:
    """Drop triples whose Q is a strict coarsening of another triple's Q with the same P and O.

    Every table built from the coarser triple is contained entrywise in the
    one built from the finer, so the union over the family does not change.
    """
    groups: dict[tuple, list[int]] = {}
    for i, D in enumerate(family):
        groups.setdefault((D.P, D.O), []).append(i)
    dropped: set[int] = set()
    for members in groups.values():
        members = sorted(members, key=lambda i: -len(family[i].Q))
        for pos, i in enumerate(members):
            coarse = family[i].Q
            owner = {v: j for j, part in enumerate(coarse) for v in part}
            for j in members[:pos]:
                fine = family[j].Q
                if j in dropped or len(fine) <= len(coarse):
                    continue
                if all(len({owner[v] for v in part}) == 1 for part in fine):
                    dropped.add(i)
                    break
    return [D for i, D in enumerate(family) if i not in dropped]


def extract_opt(root: dict[Parts, dict], k: int, obj: Objective = MINMAX, stats: dict | None = None) -> DPResult:
    """Best root entry whose cut vector has every entry >= 1."""
    rows = root.get((), {})
    best = None
    for x, (d, w) in rows.items():
        if min(x) < 1:
            continue
        key = (obj.key([Fraction(v) for v in x]), x)
        if best is None or key < best[0]:
            best = (key, x, w)
    if best is None:
        return DPResult(False, stats=stats or {})
    _, x, w = best
    partition = canonical(w.parts(k)) if w is not None else None
    return DPResult(True, obj.value([Fraction(v) for v in x]), tuple(x), partition, stats or {})


def solve_dp(
    g: WeightedMultigraph,
    k: int,
    lam: int,
    obj: Objective = MINMAX,
    tree: SpanningTree | None = None,
    td: TreeDecomposition | None = None,
    **options,
) -> DPResult:
    """Optimum over k-partitions whose every part cut is at most λ (infeasible if none)."""
    if k > g.n:
        return DPResult(False)
    return DPSolver(g, k, lam, tree, td, **options).solve(obj)
