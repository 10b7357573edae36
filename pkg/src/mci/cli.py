"""Command-line front end: ``mci solve | eval | gen | verify | params | bench``.

Exit status: 0 success, 1 usage, 2 parse/validation, 3 solver guard,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import GraphFormatError, PreconditionError, SolverGuardError
from .generators import gen_random_dag, gen_single_source_tree, gen_x3c_planted
from .graph import Dag, classify, count_pairs, format_graph, parse_graph
from .solvers import DEFAULT_MAX_CANDIDATES, SolveOutcome, brute_force, solve
from .structure import (
    format_solution,
    max_matching,
    minimal_representatives,
    neighborhood_classes,
    parse_solution,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3, 4

STRATEGIES = ("auto", "oracle", "st", "v-minus-b", "matching")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    budget: int | None = None
    strategy: str = "auto"
    seed: int = 0
    format: str = "human"
    out: Path | None = None


def record(**fields) -> str:
    """One flat ``key=value`` line; values never contain spaces."""
    return " ".join(f"{k}={v}" for k, v in fields.items())


def _edges_field(edges) -> str:
    return ",".join(f"{u}>{v}" for u, v in edges) or "-"


def _load_graph(path: Path) -> Dag:
    return parse_graph(Path(path).read_text())


def _params(g: Dag) -> dict:
    cls = classify(g)
    p = {
        "n": g.n,
        "m": g.m,
        "S": len(cls.sources),
        "T": len(cls.sinks),
        "Q": len(cls.isolated),
        "nu": max_matching(g),
    }
    if cls.isolated:
        p["S0"] = p["T0"] = "NA"
    else:
        p["S0"] = len(minimal_representatives(g, "source").members)
        p["T0"] = len(minimal_representatives(g, "sink").members)
    p["l"] = neighborhood_classes(g, "source").class_count
    p["m_classes"] = neighborhood_classes(g, "sink").class_count
    p["threshold"] = cls.threshold
    return p


# -- commands ------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, max_candidates: int | None) -> int:
    g = _load_graph(cfg.input)
    start = time.perf_counter()
    out = solve(g, cfg.budget, cfg.strategy, max_candidates)
    elapsed = time.perf_counter() - start
    threshold = classify(g).threshold
    if cfg.format == "records":
        print(record(
            instance=cfg.input.name, n=g.n, B=cfg.budget, threshold=threshold,
            strategy=out.strategy, value=out.value, upper=g.n * g.n,
            guessed_k=-1 if out.guessed_k is None else out.guessed_k,
            explored=out.explored, time_ms=f"{elapsed * 1000:.3f}",
            edges=_edges_field(out.solution.added),
        ))
    else:
        print(f"graph: n={g.n} m={g.m}  budget B={cfg.budget}  threshold max(|S|,|T|)+|Q|={threshold}")
        print(f"strategy: {out.strategy}")
        print(f"value: {out.value} (of n^2={g.n * g.n})")
        print(f"added edges ({out.solution.budget_used}):")
        for u, v in out.solution.added:
            print(f"  {u} -> {v}")
        print(f"guessed k: {'-' if out.guessed_k is None else out.guessed_k}")
        print(f"explored: {out.explored}")
        print(f"time: {elapsed:.3f}s")
    if cfg.out is not None:
        cfg.out.write_text(format_solution(out.solution, out.guessed_k))
    return EXIT_OK


def cmd_eval(graph_path: Path, solution_path: Path | None) -> int:
    g = _load_graph(graph_path)
    h = g
    if solution_path is not None:
        h = g.with_edges(parse_solution(Path(solution_path).read_text()).edges)
    print(count_pairs(h))
    return EXIT_OK


def cmd_verify(graph_path: Path, solution_path: Path, budget: int | None = None) -> int:
    g = _load_graph(graph_path)
    sol = parse_solution(Path(solution_path).read_text())
    problems = []
    seen = set()
    for u, v in sol.edges:
        if not (0 <= u < g.n and 0 <= v < g.n):
            problems.append(f"edge ({u}, {v}) has an endpoint outside [0, {g.n})")
        elif u == v:
            problems.append(f"edge ({u}, {v}) is a self-loop")
        elif g.has_edge(u, v):
            problems.append(f"edge ({u}, {v}) duplicates existing edge")
        elif (u, v) in seen:
            problems.append(f"edge ({u}, {v}) is listed twice")
        seen.add((u, v))
    if budget is not None and len(sol.edges) > budget:
        problems.append(f"budget exceeded: {len(sol.edges)} edges > B={budget}")
    if not problems and sol.value is not None:
        actual = count_pairs(g.with_edges(sol.edges))
        if actual != sol.value:
            problems.append(f"value mismatch: claimed {sol.value}, recomputed {actual}")
    for p in problems:
        print(f"FAIL {p}")
    if problems:
        return EXIT_VERIFY
    print(f"OK {len(sol.edges)} edges")
    return EXIT_OK


def cmd_params(graph_path: Path, fmt: str = "human") -> int:
    g = _load_graph(graph_path)
    p = _params(g)
    if fmt == "records":
        print(record(**p))
        return EXIT_OK
    names = {
        "n": "vertices n", "m": "edges m", "S": "sources |S|", "T": "sinks |T|",
        "Q": "isolated |Q|", "nu": "matching number", "S0": "|S0|", "T0": "|T0|",
        "l": "source classes l", "m_classes": "sink classes m",
        "threshold": "max(|S|,|T|)+|Q|",
    }
    for key, label in names.items():
        print(f"{label:>18}: {p[key]}")
    return EXIT_OK


def cmd_gen(args) -> int:
    labels = None
    header = []
    if args.kind == "x3c":
        if args.q is None or args.m is None:
            raise UsageError("gen --kind x3c needs --q and --m")
        inst, red = gen_x3c_planted(args.q, args.m, args.planted == "yes", args.seed)
        g = red.graph
        header.append(f"# x3c q={inst.q} m={inst.m} planted={args.planted} budget={red.budget} target={red.target}")
        header.append("# subsets " + " ".join("{" + ",".join(map(str, y)) + "}" for y in inst.subsets))
        labels = red.labels
    elif args.kind == "random":
        if args.n is None:
            raise UsageError("gen --kind random needs --n")
        g = gen_random_dag(args.n, args.p, args.seed)
    else:
        if args.n is None:
            raise UsageError("gen --kind tree needs --n")
        g = gen_single_source_tree(args.n, args.seed)
    text = "\n".join(header + [format_graph(g)]) if header else format_graph(g)
    if args.out:
        Path(args.out).write_text(text)
        if labels is not None:
            Path(str(args.out) + ".labels").write_text(
                "".join(f"{i} {role} {name}\n" for i, (role, name) in enumerate(labels))
            )
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- bench ---------------------------------------------------------------------------


def _catalog_instances(cat: dict) -> list[tuple[str, Dag]]:
    out = []
    for i, entry in enumerate(cat.get("instances", [])):
        kind = entry.get("kind", "random")
        name = entry.get("id")
        if kind == "random":
            g = gen_random_dag(entry["n"], entry.get("p", 0.3), entry.get("seed", 0))
            name = name or f"random-n{entry['n']}-s{entry.get('seed', 0)}"
        elif kind == "tree":
            g = gen_single_source_tree(entry["n"], entry.get("seed", 0))
            name = name or f"tree-n{entry['n']}-s{entry.get('seed', 0)}"
        elif kind == "x3c":
            planted = entry.get("planted", True) in (True, "yes")
            _, red = gen_x3c_planted(entry["q"], entry["m"], planted, entry.get("seed", 0))
            g = red.graph
            name = name or f"x3c-q{entry['q']}-m{entry['m']}-s{entry.get('seed', 0)}"
        elif kind == "file":
            g = _load_graph(Path(entry["path"]))
            name = name or Path(entry["path"]).name
        else:
            raise UsageError(f"instance {i}: unknown kind {kind!r}")
        out.append((name, g))
    bulk = cat.get("random")
    if bulk:
        rng = random.Random(bulk.get("seed", 0))
        probs = bulk.get("p", [0.3])
        for j in range(bulk.get("count", 0)):
            n = rng.randint(bulk.get("n_min", 1), bulk.get("n_max", 6))
            p = rng.choice(probs)
            seed = rng.randrange(2**31)
            out.append((f"random-{j}-n{n}-s{seed}", gen_random_dag(n, p, seed)))
    return out


def _bench_rows(args) -> list[str]:
    name, g, budgets, strategies, cap, timing = args
    cls = classify(g)
    base = dict(instance=name, n=g.n, S=len(cls.sources), T=len(cls.sinks), Q=len(cls.isolated), nu=max_matching(g))
    rows = []
    for B in budgets:
        oracle_value = None
        results: list[tuple[str, SolveOutcome | None, str, float]] = []
        for strat in strategies:
            start = time.perf_counter()
            try:
                out = brute_force(g, B, cap) if strat == "oracle" else solve(g, B, strat, cap)
                status = "ok"
            except SolverGuardError:
                out, status = None, "guard-tripped"
            except PreconditionError:
                out, status = None, "precondition"
            elapsed = time.perf_counter() - start
            if strat == "oracle" and out is not None:
                oracle_value = out.value
            results.append((strat, out, status, elapsed))
        for strat, out, status, elapsed in results:
            agree = "NA"
            if out is not None and oracle_value is not None:
                agree = int(out.value == oracle_value)
            fields = dict(base, B=B, strategy=strat, status=status,
                          value=out.value if out else "NA", upper=g.n * g.n,
                          explored=out.explored if out else "NA", oracle_agree=agree)
            if timing:
                fields["time_ms"] = f"{elapsed * 1000:.3f}"
            rows.append(record(**fields))
    return rows


def cmd_bench(catalog_path: Path, jobs: int = 1, timing: bool = True, out=None) -> int:
    cat = json.loads(Path(catalog_path).read_text())
    instances = _catalog_instances(cat)
    strategies = cat.get("strategies", "all")
    if strategies == "all":
        strategies = ["oracle", "st", "v-minus-b", "matching"]
    for s in strategies:
        if s not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r} in catalog")
    budgets = cat.get("budgets", [0, 1, 2, 3])
    cap = cat.get("max_candidates", DEFAULT_MAX_CANDIDATES)
    work = [(name, g, budgets, strategies, cap, timing) for name, g in instances]
    stream = out or sys.stdout
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_bench_rows, work))
    else:
        batches = [_bench_rows(w) for w in work]
    for rows in batches:
        for row in rows:
            print(row, file=stream)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mci", description="Exact solvers for maximum connectivity improvement on DAGs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--input", type=Path, required=True)
    s.add_argument("--budget", type=int, required=True)
    s.add_argument("--strategy", choices=STRATEGIES, default="auto")
    s.add_argument("--format", choices=("human", "records"), default="human")
    s.add_argument("--out", type=Path, help="write the solution file here")
    s.add_argument("--max-candidates", type=int, default=DEFAULT_MAX_CANDIDATES)

    e = sub.add_parser("eval", help="print f of a graph, optionally augmented by a solution")
    e.add_argument("--input", type=Path, required=True)
    e.add_argument("--solution", type=Path)

    v = sub.add_parser("verify", help="check a solution file against a graph")
    v.add_argument("--input", type=Path, required=True)
    v.add_argument("--solution", type=Path, required=True)
    v.add_argument("--budget", type=int)

    q = sub.add_parser("params", help="report structural parameters")
    q.add_argument("--input", type=Path, required=True)
    q.add_argument("--format", choices=("human", "records"), default="human")

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", choices=("x3c", "random", "tree"), required=True)
    g.add_argument("--q", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--planted", choices=("yes", "no"), default="yes")
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float, default=0.3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path)

    b = sub.add_parser("bench", help="run a catalog and emit one record per row")
    b.add_argument("--catalog", type=Path, required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--no-time", action="store_true", help="omit wall time so output is reproducible")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            if args.budget < 0:
                raise UsageError(f"--budget must be non-negative, got {args.budget}")
            cfg = RunConfig("solve", args.input, args.budget, args.strategy, format=args.format, out=args.out)
            return cmd_solve(cfg, args.max_candidates)
        if args.command == "eval":
            return cmd_eval(args.input, args.solution)
        if args.command == "verify":
            return cmd_verify(args.input, args.solution, args.budget)
        if args.command == "params":
            return cmd_params(args.input, args.format)
        if args.command == "gen":
            return cmd_gen(args)
        return cmd_bench(args.catalog, args.jobs, not args.no_time)
    except UsageError as exc:
        print(f"mci: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"mci: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverGuardError as exc:
        print(f"mci: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except PreconditionError as exc:
        print(f"mci: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
