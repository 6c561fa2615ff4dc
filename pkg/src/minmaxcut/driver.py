"""Top-level solvers: the exact DP over components and the approximation scheme."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .baselines import minmax_2k_approx
from .dp import DPResult, DPSolver
from .graph import MINMAX, GraphError, Objective, Parts, WeightedMultigraph, canonical, part_cuts, partition_cost
from .reduction import build_instance_collection, component_assignments, lift_pieces, stage_epsilon
from .structures import SpanningTree, TreeDecomposition, ranked_trees

log = logging.getLogger(__name__)

DEFAULT_CAP_CONSTANT = 100


@dataclass
class Solution:
    feasible: bool
    value: object = None
    partition: Parts | None = None
    cuts: list | None = None
    stats: dict = field(default_factory=dict)


def _part_key(parts: Parts):
    return tuple(tuple(sorted(p)) for p in parts)


def auto_lambda(g: WeightedMultigraph, k: int, obj: Objective = MINMAX) -> int:
    """A budget every part of some optimum respects, from the cut-tree baseline.

    Each part's cut is at most the objective value, and the optimum is at
    most the baseline's value, so the baseline's value (rounded up) works.
    """
    parts = minmax_2k_approx(g, k)
    return math.ceil(partition_cost(g, parts, obj))


def _zero_grouping(comps: list[frozenset[int]], k: int) -> Parts:
    groups = [set(c) for c in comps[: k - 1]]
    groups.append(set().union(*comps[k - 1 :]))
    return canonical(frozenset(x) for x in groups)


def _combine(g, k, obj, comps, solve_one) -> Solution:
    """Best union of per-component solutions over all part-count assignments."""
    if len(comps) >= k:
        parts = _zero_grouping(comps, k)
        cuts = part_cuts(g, parts)
        return Solution(True, obj.value(cuts), parts, cuts)
    best = None
    for counts in component_assignments([len(c) for c in comps], k):
        pieces = [solve_one(i, c) for i, c in enumerate(counts)]
        if any(p is None for p in pieces):
            continue
        parts = canonical(part for piece in pieces for part in piece)
        cuts = part_cuts(g, parts)
        key = (obj.key(cuts), _part_key(parts))
        if best is None or key < best[0]:
            best = (key, parts, cuts)
    if best is None:
        return Solution(False)
    _, parts, cuts = best
    return Solution(True, obj.value(cuts), parts, cuts)


def exact_fpt(
    g: WeightedMultigraph,
    k: int,
    lam: int | None = None,
    obj: Objective = MINMAX,
    *,
    tree: SpanningTree | None = None,
    td: TreeDecomposition | None = None,
    seed: int = 0,
    cap: int | None = None,
    tree_retry: int = 0,
    table_sink: list | None = None,
    **dp_options,
) -> Solution:
    """Exact optimum among k-partitions whose part cuts are all at most ``lam``.

    Integer weights count as parallel copies.  With ``lam=None`` a budget
    from the baseline is chosen per component (bounded by ``cap`` if given;
    when the capped run is infeasible the budget doubles up to the bound).
    A tree or decomposition is only used when the graph is connected.
    Passing ``witnesses=False`` skips witness bookkeeping; the solution then
    carries the value and cut vector but no partition.
    """
    if k < 1:
        raise GraphError("k must be positive")
    if lam is not None and lam < 0:
        raise GraphError("lambda must be nonnegative")
    if not g.has_integer_weights():
        raise GraphError("the exact solver needs integer weights; use the scheme for rational ones")
    stats = {"dp_runs": 0, "entries": 0, "lambdas": []}
    if k > g.n:
        return Solution(False, stats=stats)
    comps = g.components()
    connected = len(comps) == 1
    witness_free = dp_options.get("witnesses") is False
    if witness_free and not connected and k > 1:
        raise GraphError("witness-free runs need a connected graph (parts are needed to combine components)")
    memo: dict[tuple[int, int], Parts | None] = {}
    last: list[DPResult] = []

    def solve_one(i: int, kc: int) -> Parts | None:
        if (i, kc) in memo:
            return memo[i, kc]
        comp = sorted(comps[i])
        if kc == 1:
            memo[i, kc] = (frozenset(comp),)
            return memo[i, kc]
        sub, back = g.induced(comp)
        bound = auto_lambda(sub, kc, obj)
        budgets = [lam] if lam is not None else _budgets(bound, cap)
        result = None
        for budget in budgets:
            trees = [tree] if connected and tree is not None else _candidate_trees(sub, kc, seed, tree_retry)
            for t in trees:
                solver = DPSolver(sub, kc, budget, t, td if connected else None, seed=seed, **dp_options)
                res = solver.solve(obj)
                stats["dp_runs"] += 1
                stats["entries"] += solver.stats["entries"]
                stats["lambdas"].append(budget)
                if table_sink is not None:
                    table_sink.extend(_mapped_rows(solver.dump(), back, i, kc, budget))
                if res.feasible and (result is None or obj.key(list(map(Fraction, res.cuts))) < result[0]):
                    result = (obj.key(list(map(Fraction, res.cuts))), res)
            if result is not None:
                break
        if result is None:
            memo[i, kc] = None
        elif witness_free:
            last.append(result[1])
            memo[i, kc] = ()
        else:
            memo[i, kc] = canonical(frozenset(back[v] for v in p) for p in result[1].partition)
        return memo[i, kc]

    if witness_free and k > 1:
        if solve_one(0, k) is None:
            return Solution(False, stats=stats)
        res = last[-1]
        return Solution(True, res.value, None, list(res.cuts), stats)
    sol = _combine(g, k, obj, comps, solve_one)
    sol.stats = stats
    return sol


def _mapped_rows(rows: list[dict], back: list[int], comp: int, kc: int, budget: int) -> list[dict]:
    for row in rows:
        row["adhesion_partition"] = [sorted(back[v] for v in p) for p in row["adhesion_partition"]]
        if row["witness"] is not None:
            row["witness"] = [sorted(back[v] for v in p) for p in row["witness"]]
        row.update(component=comp, parts=kc, budget=budget)
    return rows


def _budgets(bound: int, cap: int | None) -> list[int]:
    if cap is None or cap >= bound:
        return [bound]
    out, lam = [], max(1, cap)
    while lam < bound:
        out.append(lam)
        lam *= 2
    out.append(bound)
    return out


def _candidate_trees(g: WeightedMultigraph, k: int, seed: int, extra: int) -> list[SpanningTree | None]:
    if extra <= 0:
        return [None]
    return ranked_trees(g, k, seed)[: 1 + extra]


# -- approximation scheme ----------------------------------------------------------------------


@dataclass
class SchemeResult:
    partition: Parts | None
    cost: Fraction | None
    certificate: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.partition is not None


def dp_cap(k: int, eps, n: int, constant: float = DEFAULT_CAP_CONSTANT) -> int:
    """Budget cap ``constant * (k / eps'^3) * ln n`` with eps' the per-stage accuracy."""
    e1 = float(stage_epsilon(eps))
    return max(1, math.ceil(constant * k / e1**3 * math.log(max(n, 2))))


def _scheme_connected(g: WeightedMultigraph, k: int, eps, seed: int, n_total: int, cap_constant, log_rows) -> tuple[Parts, Fraction]:
    if k == 1:
        return (frozenset(range(g.n)),), Fraction(0)
    cap = dp_cap(k, eps, n_total, cap_constant)
    best = None
    solved: dict[tuple[str, int, int], tuple[Parts, list]] = {}
    for inst in build_instance_collection(g, k, eps, seed):
        piece_parts = []
        for pi, (piece, c) in enumerate(zip(inst.pieces, inst.counts)):
            key = (inst.trace.lam, pi, c)
            if key not in solved:
                sol = exact_fpt(piece, c, lam=None, cap=cap, seed=seed)
                if not sol.feasible:
                    raise GraphError("reduced instance unexpectedly infeasible")
                solved[key] = (sol.partition, sol.stats["lambdas"])
            piece_parts.append(solved[key][0])
        lifted = lift_pieces(inst.trace, piece_parts)
        cost = partition_cost(g, lifted)
        log_rows.append(
            {
                "lambda_guess": inst.trace.lam,
                "theta": inst.trace.theta,
                "copies": inst.trace.copies,
                "deleted_copies": sum(c for cut in inst.trace.deleted for _, _, c in cut),
                "components": len(inst.pieces),
                "counts": list(inst.counts),
                "p": [s["p"] for s in inst.trace.sampling],
                "dp_lambdas": [solved[(inst.trace.lam, pi, c)][1] for pi, c in enumerate(inst.counts)],
                "lifted_cost": str(cost),
            }
        )
        key = (cost, _part_key(lifted))
        if best is None or key < best[0]:
            best = (key, lifted, cost)
    if best is None:
        # every guess was skipped; fall back to the baseline partition
        parts = minmax_2k_approx(g, k)
        return parts, partition_cost(g, parts)
    return best[1], best[2]


def _scheme_once(g: WeightedMultigraph, k: int, eps, seed: int, cap_constant) -> SchemeResult:
    comps = g.components()
    rows: list[dict] = []
    cert = {
        "seed": seed,
        "epsilon": float(eps),
        "stage_epsilon": float(stage_epsilon(eps)),
        "cap": dp_cap(k, eps, g.n, cap_constant),
        "components": len(comps),
        "instances": rows,
    }
    memo: dict[tuple[int, int], Parts] = {}

    def solve_one(i: int, kc: int) -> Parts:
        if (i, kc) not in memo:
            comp = sorted(comps[i])
            sub, back = g.induced(comp)
            parts, _ = _scheme_connected(sub, kc, eps, seed, g.n, cap_constant, rows)
            memo[i, kc] = canonical(frozenset(back[v] for v in p) for p in parts)
        return memo[i, kc]

    sol = _combine(g, k, MINMAX, comps, solve_one)
    cert["cost"] = str(sol.value)
    return SchemeResult(sol.partition, sol.value, cert)


def approx_scheme(
    g: WeightedMultigraph,
    k: int,
    eps,
    seed: int = 0,
    retries: int = 1,
    cap_constant: float = DEFAULT_CAP_CONSTANT,
) -> SchemeResult:
    """(1+eps)-approximate minmax k-partition with high probability.

    ``retries`` reruns the randomized reduction with seeds ``seed, seed+1, ...``
    and keeps the cheapest partition.
    """
    if k < 2:
        raise GraphError("k must be at least 2")
    if not 0 < float(eps) < 1:
        raise GraphError("epsilon must lie in (0, 1)")
    if k > g.n:
        return SchemeResult(None, None, {"reason": "k exceeds n"})
    best = None
    runs = []
    for s in range(seed, seed + max(1, retries)):
        res = _scheme_once(g, k, eps, s, cap_constant)
        runs.append(res.certificate)
        key = (res.cost, _part_key(res.partition))
        if best is None or key < best[0]:
            best = (key, res)
    result = best[1]
    result.certificate = {"runs": runs, "best_seed": result.certificate["seed"], "cost": str(result.cost)}
    return result
