"""Brute-force ground truth: enumerate every k-partition and evaluate it.

Partitions of ``{0..n-1}`` into exactly k blocks are generated as
restricted-growth strings (RGS): ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``.
Each string names one partition, so the count is the Stirling number S(n, k).
Evaluation is vectorised with numpy over integer-scaled weights, which keeps
the arithmetic exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .graph import MINMAX, Objective, Parts, WeightedMultigraph, canonical

DEFAULT_CAP = 12


class OracleError(ValueError):
    pass


class Infeasible(OracleError):
    """No k-partition exists (k > n)."""


@dataclass
class OracleResult:
    opt_value: object
    witnesses: list[Parts] = field(default_factory=list)
    evaluated_count: int = 0


def _check(n: int, k: int, cap: int) -> None:
    if n > cap:
        raise OracleError(f"n={n} exceeds the enumeration cap {cap}")
    if k < 1:
        raise OracleError("k must be positive")


def rgs_array(n: int, k: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All RGS of length n with exactly k blocks, one per row, in lex order."""
    _check(n, k, cap)
    if k > n or n == 0:
        return np.zeros((0, n), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    used = np.ones(1, dtype=np.int8)  # blocks used so far
    for i in range(1, n):
        remaining = n - i
        chunks, new_used = [], []
        for label in range(k):
            # label may be any used block, or exactly the next fresh one
            ok = (label <= used) & (np.maximum(used, label + 1) + remaining - 1 >= k)
            ok &= np.maximum(used, label + 1) <= k
            sel = rows[ok]
            if len(sel):
                chunks.append(np.hstack([sel, np.full((len(sel), 1), label, dtype=np.int8)]))
                new_used.append(np.maximum(used[ok], label + 1).astype(np.int8))
        rows = np.vstack(chunks)
        used = np.concatenate(new_used)
        order = np.lexsort(rows.T[::-1])
        rows, used = rows[order], used[order]
    return rows[used == k]


def enumerate_k_partitions(n: int, k: int, cap: int = DEFAULT_CAP) -> Iterator[Parts]:
    """Yield every partition of ``0..n-1`` into exactly k nonempty parts once."""
    _check(n, k, cap)
    if k > n:
        return
    a = [0] * n

    def rec(i: int, used: int):
        if i == n:
            if used == k:
                yield tuple(frozenset(v for v in range(n) if a[v] == b) for b in range(k))
            return
        if used + (n - i) < k:
            return
        for label in range(min(used + 1, k)):
            a[i] = label
            yield from rec(i + 1, max(used, label + 1))

    if n == 0:
        return
    a[0] = 0
    yield from rec(1, 1)


def _cut_matrix(g: WeightedMultigraph, rows: np.ndarray, k: int) -> tuple[np.ndarray, int]:
    """Per-part cut values (scaled to integers) for every labelling row."""
    edges, scale = g.integer_scaled()
    total = sum(c for _, _, c in edges)
    dtype = np.int64 if total < 2**62 else object
    cuts = np.zeros((len(rows), k), dtype=dtype)
    for u, v, c in edges:
        if c == 0:
            continue
        lu, lv = rows[:, u], rows[:, v]
        diff = lu != lv
        for j in range(k):
            cuts[:, j] += c * (diff & ((lu == j) | (lv == j)))
    return cuts, scale


def _scores(cuts: np.ndarray, obj: Objective) -> np.ndarray:
    if obj.kind == "minmax":
        return cuts.max(axis=1)
    if obj.kind == "minsum" or obj.p == 1:
        return cuts.sum(axis=1)
    return (cuts.astype(float) ** float(obj.p)).sum(axis=1)


def _evaluate(g: WeightedMultigraph, k: int, obj: Objective, cap: int):
    if k > g.n:
        raise Infeasible(f"k={k} exceeds n={g.n}")
    rows = rgs_array(g.n, k, cap)
    cuts, scale = _cut_matrix(g, rows, k)
    scores = _scores(cuts, obj)
    if obj.kind == "lp" and obj.p != 1:
        # float screening, then exact comparison among near-minimal rows
        best = scores.min()
        near = np.nonzero(scores <= best * (1 + 1e-9) + 1e-12)[0]
        keys = {int(i): obj.key([Fraction(int(c), scale) for c in cuts[i]]) for i in near}
        kbest = min(keys.values())
        opt_rows = [i for i, key in keys.items() if key == kbest]
        value = obj.value([Fraction(int(c), scale) for c in cuts[opt_rows[0]]])
    else:
        best = scores.min()
        opt_rows = np.nonzero(scores == best)[0].tolist()
        value = Fraction(int(best), scale)
    return rows, opt_rows, value


def _row_parts(row: np.ndarray, k: int) -> Parts:
    return canonical(frozenset(int(v) for v in np.nonzero(row == j)[0]) for j in range(k))


def _sort_key(parts: Parts):
    return tuple(tuple(sorted(p)) for p in parts)


def brute_opt(
    g: WeightedMultigraph,
    k: int,
    obj: Objective = MINMAX,
    cap: int = DEFAULT_CAP,
    max_witnesses: int | None = 16,
) -> OracleResult:
    """Exact optimum over all k-partitions, with the lexicographically smallest witness first."""
    rows, opt_rows, value = _evaluate(g, k, obj, cap)
    witnesses = sorted((_row_parts(rows[i], k) for i in opt_rows), key=_sort_key)
    if max_witnesses is not None:
        witnesses = witnesses[:max_witnesses]
    return OracleResult(value, witnesses, len(rows))


def all_optima(g: WeightedMultigraph, k: int, obj: Objective = MINMAX, cap: int = DEFAULT_CAP) -> list[Parts]:
    return brute_opt(g, k, obj, cap, max_witnesses=None).witnesses


def brute_global_min_cut(g: WeightedMultigraph) -> Fraction:
    """Minimum weight over all nonempty proper vertex subsets (n >= 2)."""
    return brute_opt(g, 2, MINMAX).opt_value
