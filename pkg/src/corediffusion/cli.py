"""Command-line front end.

Exit codes: 0 success / Terminated, 1 oracle mismatch (compare), 2 bad input,
3 iteration cap reached, 4 saturated regime, 5 infeasible load, 6 empty core.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import engine, oracle
from .artifacts import parse_eps, read_node_table, write_run
from .balancer import LoadProblem, balance
from .engine import DiffusionConfig, Status
from .errors import (
    ConvergenceFailure,
    EmptyCore,
    GenerationFailed,
    InfeasibleLoad,
    InvalidParameter,
    ParseError,
)
from .experiment import ExperimentSpec, make_graph, run_experiment
from .graph import SeedPolicy, is_connected, load_edge_list, save_edge_list, select_seed
from .localfn import build_core_view, get_combiner, run_gossip

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_SATURATED = 4
EXIT_INFEASIBLE = 5
EXIT_EMPTY_CORE = 6

STATUS_EXIT = {
    Status.TERMINATED: EXIT_OK,
    Status.ITERATION_CAP: EXIT_CAP,
    Status.SATURATED: EXIT_SATURATED,
}

COMPARE_TOL = 1e-9


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _load_graph(path):
    try:
        return load_edge_list(path)
    except OSError as exc:
        raise CliError(f"cannot read graph {path}: {exc.strerror}") from None


def _run_config(args, g) -> tuple[DiffusionConfig, dict]:
    eps = parse_eps(args.eps, g.n)
    policy = SeedPolicy.parse(args.seed_policy)
    seed = select_seed(g, policy)
    delta = parse_eps(args.delta_term, g.n) if args.delta_term is not None else None
    cfg = DiffusionConfig({seed: args.seed_charge}, eps, delta, args.max_iters)
    echo = {
        "graph": str(args.graph),
        "n": g.n,
        "edges": g.edge_count,
        "eps": args.eps,
        "eps_value": eps,
        "seed_policy": str(policy),
        "seed_node": seed,
        "seed_charge": args.seed_charge,
        "delta_term": cfg.resolved_delta(g.n),
        "max_iters": cfg.resolved_max_iters(g.n),
    }
    return cfg, echo


def cmd_gen(args) -> int:
    params = {k: getattr(args, k) for k in ("d", "m", "p") if getattr(args, k) is not None}
    g = make_graph(args.family, args.n, params, args.seed)
    stats = {"n": g.n, "edges": g.edge_count, "d_max": g.d_max, "connected": is_connected(g)}
    if args.output:
        save_edge_list(g, args.output)
        _emit(stats)
    else:
        sys.stdout.write(f"# nodes: {g.n}\n" + "".join(f"{u} {v}\n" for u, v in g.edges()))
        print(json.dumps(stats, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    g = _load_graph(args.graph)
    cfg, echo = _run_config(args, g)
    trace, summary = engine.run(g, cfg)
    paths = write_run(args.output, trace, summary, echo)
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit({
        "status": summary.status.value,
        "iterations": summary.iterations,
        "core_size": len(summary.core),
        "periphery_size": len(summary.periphery),
        "saturated": summary.saturated,
        "artifacts": {k: str(v) for k, v in paths.items()},
    })
    return STATUS_EXIT[summary.status]


def cmd_experiment(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    agg = run_experiment(spec, args.output, workers=args.jobs)
    with open(agg, newline="") as fh:
        rows = list(csv.DictReader(fh))
    failed = [r for r in rows if r["status"].startswith("Error")]
    _emit({"aggregate": str(agg), "runs": len(rows), "errors": len(failed)})
    return EXIT_OK


def compare_with_lazy_walk(g, seed: int, steps: int) -> list[float]:
    """Max component gap between the eps=0 engine and the dense lazy walk, per step."""
    if steps < 1:
        raise InvalidParameter("steps must be >= 1")
    cfg = DiffusionConfig({seed: 1.0}, 0.0, allow_zero_eps=True)
    state = cfg.initial_state(g.n)
    walk = oracle.lazy_walk(g, state.x, steps)
    gaps = []
    for ref in walk:
        state = engine.step(g, state)
        gaps.append(oracle.compare_states(state.x, ref, COMPARE_TOL)[1])
    return gaps


def cmd_compare(args) -> int:
    g = _load_graph(args.graph)
    seed = select_seed(g, SeedPolicy.parse(args.seed_policy))
    gaps = compare_with_lazy_walk(g, seed, args.steps)
    for t, gap in enumerate(gaps, start=1):
        print(f"{t}\t{gap:.3e}")
    worst = max(gaps)
    ok = worst <= COMPARE_TOL
    print(f"max_diff={worst:.3e} tol={COMPARE_TOL:g} {'OK' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_balance(args) -> int:
    g = _load_graph(args.graph)
    table = read_node_table(args.loads, ("load", "capacity"), g.n)
    problem = LoadProblem(table["load"], table["capacity"])
    delta = parse_eps(args.delta_term, g.n) if args.delta_term is not None else None
    summary, report = balance(g, problem, delta, args.max_iters)
    x = summary.final_state.x
    if args.output:
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "load", "capacity", "final"])
            for i in range(g.n):
                w.writerow([i, repr(problem.loads[i]), repr(problem.capacities[i]), repr(float(x[i]))])
    _emit({
        "status": summary.status.value,
        "iterations": summary.iterations,
        "max_excess": report.max_excess,
        "total_load": report.total_load,
        "total_final": report.total_final,
        "overloaded": [
            {"node": o.node, "load": o.load, "capacity": o.capacity,
             "final": o.final, "shed": o.shed}
            for o in report.overloaded
        ],
    })
    return STATUS_EXIT[summary.status]


def _initial_values(spec: str, n: int) -> np.ndarray:
    if spec == "index":
        return np.arange(n, dtype=np.float64)
    if spec.startswith("random:"):
        return np.random.default_rng(int(spec.split(":", 1)[1])).random(n)
    path, _, column = spec.partition("::")
    return np.array(read_node_table(path, (column or "value",), n)[column or "value"])


def cmd_fuse(args) -> int:
    g = _load_graph(args.graph)
    cfg, echo = _run_config(args, g)
    _, summary = engine.run(g, cfg)
    values = _initial_values(args.values, g.n)
    view = build_core_view(g, summary, values)
    combiner = get_combiner(args.combiner)
    try:
        result, rounds = run_gossip(view, combiner, args.tol, args.max_rounds)
        code = EXIT_OK
    except ConvergenceFailure as exc:
        result, rounds, code = exc.values, exc.rounds, EXIT_CAP
    direct = {"max": float(view.y.max()), "min": float(view.y.min()), "mean": float(view.y.mean())}
    _emit({
        "combiner": combiner.name,
        "core": list(view.nodes),
        "components": view.components,
        "rounds": rounds,
        "values": {str(k): v for k, v in zip(view.nodes, result.tolist())},
        "direct": direct,
        "run": {"status": summary.status.value, "iterations": summary.iterations, **echo},
    })
    return code


def _add_run_options(p) -> None:
    p.add_argument("graph", type=Path, help="edge-list file")
    p.add_argument("--eps", required=True, help="threshold: number or k/n")
    p.add_argument("--seed-policy", default="max",
                   help="max | min | random:SEED | explicit:NODE | NODE (default max)")
    p.add_argument("--seed-charge", type=float, default=1.0)
    p.add_argument("--delta-term", default=None, help="L1 termination tolerance (default 1/n)")
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap (default 100n)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corediffusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph as an edge list")
    p.add_argument("family", choices=("cycle", "regular", "powerlaw", "erdos"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, help="degree (regular)")
    p.add_argument("--m", type=int, help="attachments per new node (powerlaw)")
    p.add_argument("--p", type=float, help="edge probability (erdos)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="grow cores from a seed and write trace/summary")
    _add_run_options(p)
    p.add_argument("-o", "--output", type=Path, default=Path("run"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run a JSON experiment spec")
    p.add_argument("spec", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", help="eps=0 engine vs dense lazy random walk")
    p.add_argument("graph", type=Path)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seed-policy", default="max")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("balance", help="balance loads from a node,load,capacity CSV")
    p.add_argument("graph", type=Path)
    p.add_argument("loads", type=Path)
    p.add_argument("--delta-term", default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("-o", "--output", type=Path, help="final allocation CSV")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("fuse", help="compute a function over the discovered core")
    _add_run_options(p)
    p.add_argument("--combiner", default="max", help="max | min | average_metropolis")
    p.add_argument("--values", default="index",
                   help="index | random:SEED | FILE.csv[::COLUMN] (default column 'value')")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-rounds", type=int, default=100_000)
    p.set_defaults(func=cmd_fuse)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleLoad as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EmptyCore as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CORE
    except (CliError, InvalidParameter, ParseError, GenerationFailed, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "code", EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
