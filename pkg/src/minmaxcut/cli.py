"""Command-line front end: solve, generate, verify, bench.

Exit codes: 0 success, 2 infeasible, 1 input or usage error (also used for
failed verification).  Results go to standard output; logs to standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .baselines import minmax_2k_approx
from .driver import approx_scheme, exact_fpt
from .families import NiceDecomposition, check_nice
from .graph import GraphError, Objective, parse_graph, partition_cost, partition_json, serialize_graph
from .instances import GadgetSpec, clique_gadget, parse_weight_range, quotient_graph, random_corpus
from .oracle import OracleError, brute_opt
from .structures import parse_decomposition, verify_decomposition

log = logging.getLogger("minmaxcut")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("minmaxcut").joinpath("schemas", f"{name}.schema.json").read_text())


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# -- solve -------------------------------------------------------------------------------


def cmd_solve(args) -> int:
    obj = Objective.parse(args.objective)
    if args.algorithm != "dp":
        for flag, value in (("--lambda", args.lam), ("--decomposition", args.decomposition), ("--dump-tables", args.dump_tables)):
            if value is not None:
                raise UsageError(f"{flag} only applies to --algorithm dp")
    if args.algorithm != "scheme":
        if args.emit_trace is not None:
            raise UsageError("--emit-trace only applies to --algorithm scheme")
        if args.retries != 1:
            raise UsageError("--retries only applies to --algorithm scheme")
    if args.algorithm == "scheme" and obj.kind != "minmax":
        raise UsageError("the scheme approximates minmax only")
    g = parse_graph(_read_text(args.input))
    k = args.k
    base = {"k": k, "objective": str(obj), "algorithm": args.algorithm}

    def infeasible(reason: str, **extra) -> int:
        _emit({"feasible": False, **base, **extra, "reason": reason})
        return EXIT_INFEASIBLE

    if k > g.n:
        return infeasible(f"k={k} exceeds n={g.n}")
    if args.algorithm == "brute":
        res = brute_opt(g, k, obj, cap=args.brute_cap)
        parts = res.witnesses[0]
        out = partition_json(g, parts, k, obj)
    elif args.algorithm == "baseline2k":
        if not g.is_connected():
            raise GraphError("the cut-tree baseline needs a connected graph")
        out = partition_json(g, minmax_2k_approx(g, k), k, obj)
    elif args.algorithm == "dp":
        td = parse_decomposition(_read_text(args.decomposition)) if args.decomposition else None
        sink = [] if args.dump_tables else None
        sol = exact_fpt(
            g,
            k,
            args.lam,
            obj,
            td=td,
            seed=args.seed,
            tree_retry=args.tree_retry,
            table_sink=sink,
            audit=args.audit,
        )
        if sink is not None:
            Path(args.dump_tables).write_text(json.dumps(sink, sort_keys=True))
        if not sol.feasible:
            return infeasible(f"no {k}-partition with every part cut at most lambda", **{"lambda": args.lam})
        out = partition_json(g, sol.partition, k, obj)
        out["lambda"] = args.lam
    else:
        eps = args.epsilon
        if not 0 < eps < 1:
            raise UsageError("--epsilon must lie in (0, 1)")
        res = approx_scheme(g, k, eps, seed=args.seed, retries=args.retries)
        if args.emit_trace:
            Path(args.emit_trace).write_text(json.dumps(res.certificate, sort_keys=True, indent=1))
        out = partition_json(g, res.partition, k, obj)
        out.update(epsilon=eps, seed=args.seed)
    out["algorithm"] = args.algorithm
    _emit(out)
    return EXIT_OK


# -- generate ---------------------------------------------------------------------------------


def cmd_generate(args) -> int:
    out = Path(args.output)
    if args.kind == "gadget":
        base = parse_graph(_read_text(args.input))
        spec = GadgetSpec(base, args.h)
        out.parent.mkdir(parents=True, exist_ok=True)
        if not args.quotient_only:
            gadget, _ = clique_gadget(base, args.h)
            out.with_suffix(".graph").write_text(serialize_graph(gadget))
        out.with_suffix(".quotient.graph").write_text(serialize_graph(quotient_graph(spec)))
        out.with_suffix(".json").write_text(spec.to_json() + "\n")
        _emit(json.loads(spec.to_json()))
        return EXIT_OK
    lo, hi = parse_weight_range(args.weights)
    n_lo, n_hi = parse_weight_range(args.n)
    out.mkdir(parents=True, exist_ok=True)
    graphs = random_corpus(args.count, (n_lo, n_hi), args.density, (lo, hi), seed=args.seed)
    for i, g in enumerate(graphs):
        stem = out / f"random_{i:03d}"
        stem.with_suffix(".graph").write_text(serialize_graph(g))
        side = {"index": i, "n": g.n, "m": g.m, "density": args.density, "weights": [lo, hi], "seed": args.seed}
        stem.with_suffix(".json").write_text(json.dumps(side, sort_keys=True) + "\n")
    _emit({"written": len(graphs), "directory": str(out)})
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------------


def _partition_checks(g, data: dict, k: int | None):
    import jsonschema

    try:
        jsonschema.validate(data, load_schema("partition"))
        yield "schema", None
    except jsonschema.ValidationError as exc:
        yield "schema", exc.message
        return
    parts = [list(p) for p in data["parts"]]
    flat = [v for p in parts for v in p]
    yield "range", None if all(0 <= v < g.n for v in flat) else "vertex out of range"
    yield "disjointness", None if len(flat) == len(set(flat)) else "a vertex lies in two parts"
    yield "coverage", None if set(flat) == set(range(g.n)) else "parts do not cover the vertex set"
    want = k if k is not None else data["k"]
    yield "part count", None if len(parts) == want else f"expected {want} parts, found {len(parts)}"
    if len(flat) == len(set(flat)) and set(flat) == set(range(g.n)):
        obj = Objective.parse(data["objective"])
        fresh = partition_json(g, [frozenset(p) for p in parts], len(parts), obj)
        ok = fresh["per_part_cut"] == data["per_part_cut"] and fresh["cost"] == data["cost"]
        yield "cost", None if ok else f"recomputed cost {fresh['cost']} differs from {data['cost']}"


def _decomposition_checks(g, td):
    report = verify_decomposition(g, td)
    yield "valid", None if report.valid else report.violation
    if report.valid:
        yield "compact", None if report.compact else report.violation


def _nice_checks(g, td, node: int, triple: NiceDecomposition, k: int):
    if node not in td.bags:
        yield "node", f"no bag with id {node}"
        return
    problems = check_nice(g, td, node, triple, k)
    names = ("partition", "(i)", "(ii)", "(iii)", "(iv)")
    for name in names:
        hit = [p for p in problems if p.startswith(name) or (name == "partition" and "not a partition" in p)]
        yield f"nice {name}", hit[0] if hit else None


def cmd_verify(args) -> int:
    g = parse_graph(_read_text(args.input))
    if args.kind == "partition":
        checks = _partition_checks(g, json.loads(_read_text(args.partition)), args.k)
    elif args.kind == "decomposition":
        checks = _decomposition_checks(g, parse_decomposition(_read_text(args.decomposition)))
    else:
        td = parse_decomposition(_read_text(args.decomposition))
        triple = NiceDecomposition.from_json(json.loads(_read_text(args.triple)))
        checks = _nice_checks(g, td, args.node, triple, args.k)
    status = EXIT_OK
    for name, problem in checks:
        if problem is None:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}: {problem}")
            status = EXIT_ERROR
            break
    return status


# -- bench -------------------------------------------------------------------------------------

BENCH_COLUMNS = ["instance", "algorithm", "k", "cost", "brute", "ratio", "seconds"]


def _bench_row(job):
    name, text, algorithm, k, eps, seed = job
    g = parse_graph(text)
    start = time.perf_counter()
    if algorithm == "brute":
        parts = brute_opt(g, k).witnesses[0]
    elif algorithm == "baseline2k":
        parts = minmax_2k_approx(g, k)
    elif algorithm == "dp":
        parts = exact_fpt(g, k, seed=seed).partition
    else:
        parts = approx_scheme(g, k, eps, seed=seed).partition
    seconds = time.perf_counter() - start
    cost = partition_cost(g, parts)
    try:
        brute = brute_opt(g, k).opt_value
        ratio = float(cost / brute) if brute else (1.0 if cost == 0 else float("inf"))
    except OracleError:
        brute, ratio = None, None
    return {
        "instance": name,
        "algorithm": algorithm,
        "k": k,
        "cost": str(cost),
        "brute": "" if brute is None else str(brute),
        "ratio": "" if ratio is None else f"{ratio:.6f}",
        "seconds": f"{seconds:.4f}",
    }


def cmd_bench(args) -> int:
    if args.corpus:
        files = sorted(Path(args.corpus).glob("*.graph"))
        corpus = [(f.stem, f.read_text()) for f in files]
    else:
        graphs = random_corpus(args.count, parse_weight_range(args.n), args.density, parse_weight_range(args.weights), seed=args.seed)
        corpus = [(f"random_{i:03d}", serialize_graph(g)) for i, g in enumerate(graphs)]
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for a in algorithms:
        if a not in ("brute", "dp", "scheme", "baseline2k"):
            raise UsageError(f"unknown algorithm {a!r}")
    jobs = [(name, text, a, args.k, args.epsilon, args.seed) for name, text in corpus for a in algorithms]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_row, jobs))
    else:
        rows = [_bench_row(j) for j in jobs]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minmaxcut", description="Minmax k-cut solvers and tooling.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--algorithm", choices=["brute", "dp", "scheme", "baseline2k"], default="dp")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--objective", default="minmax")
    s.add_argument("--lambda", dest="lam", type=int, default=None)
    s.add_argument("--epsilon", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--input", default="-")
    s.add_argument("--emit-trace", default=None, metavar="PATH")
    s.add_argument("--retries", type=int, default=1)
    s.add_argument("--decomposition", default=None, metavar="PATH")
    s.add_argument("--dump-tables", default=None, metavar="PATH")
    s.add_argument("--tree-retry", type=int, default=0)
    s.add_argument("--audit", action="store_true")
    s.add_argument("--brute-cap", type=int, default=12)
    s.set_defaults(func=cmd_solve)

    gen = sub.add_parser("generate", help="write instances")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gg = gsub.add_parser("gadget")
    gg.add_argument("--h", type=int, required=True)
    gg.add_argument("--input", default="-")
    gg.add_argument("--output", required=True, help="output path stem")
    gg.add_argument("--quotient-only", action="store_true")
    gr = gsub.add_parser("random")
    gr.add_argument("--n", default="6..8", help="vertex count or range a..b")
    gr.add_argument("--density", type=float, default=0.5)
    gr.add_argument("--count", type=int, default=10)
    gr.add_argument("--weights", default="1..1")
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--output", required=True, help="output directory")
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="check files against a graph")
    vsub = ver.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    vp = vsub.add_parser("partition")
    vp.add_argument("--input", required=True)
    vp.add_argument("--partition", required=True)
    vp.add_argument("--k", type=int, default=None)
    vd = vsub.add_parser("decomposition")
    vd.add_argument("--input", required=True)
    vd.add_argument("--decomposition", required=True)
    vn = vsub.add_parser("nice")
    vn.add_argument("--input", required=True)
    vn.add_argument("--decomposition", required=True)
    vn.add_argument("--node", type=int, required=True)
    vn.add_argument("--triple", required=True)
    vn.add_argument("--k", type=int, required=True)
    ver.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run an algorithm matrix over a corpus and write CSV")
    b.add_argument("--corpus", default=None, help="directory of .graph files")
    b.add_argument("--algorithms", default="baseline2k,dp,scheme")
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--epsilon", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=5)
    b.add_argument("--n", default="5..7")
    b.add_argument("--density", type=float, default=0.5)
    b.add_argument("--weights", default="1..1")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--output", default=None)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"minmaxcut: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (GraphError, OracleError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"minmaxcut: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
