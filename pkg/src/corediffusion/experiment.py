"""Parameter sweeps over graph families, thresholds and seed policies.

An experiment spec is JSON::

    {
      "graphs": [
        {"family": "regular", "n": 1000, "d": 10},
        {"family": "powerlaw", "n": 1000, "m": 5,
         "seed_policies": ["max_degree", "min_degree"]},
        {"family": "cycle", "n": 1000}
      ],
      "eps": ["10/n", "100/n"],
      "seed_policy": "max_degree",
      "repetitions": 1,
      "rng_seed": 0,
      "output_dir": "results"
    }

Optional keys: ``seed_charge`` (1.0), ``delta_term`` (number or ``k/n``;
default ``1/n``), ``max_iters`` (default ``100*n``).
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import engine
from .artifacts import config_hash, parse_eps
from .errors import InvalidParameter
from .graph import (
    Graph,
    SeedPolicy,
    gen_cycle,
    gen_erdos_renyi,
    gen_powerlaw,
    gen_random_regular,
    select_seed,
)

FAMILIES = {
    "cycle": ((), lambda n, p, s: gen_cycle(n)),
    "regular": (("d",), lambda n, p, s: gen_random_regular(n, int(p["d"]), s)),
    "powerlaw": (("m",), lambda n, p, s: gen_powerlaw(n, int(p["m"]), s)),
    "erdos": (("p",), lambda n, p, s: gen_erdos_renyi(n, float(p["p"]), s)),
}

AGGREGATE_COLUMNS = (
    "family", "n", "params", "seed_policy", "eps_label", "eps", "rep", "graph_seed",
    "seed_node", "status", "expected_saturated", "iterations", "core_size",
    "periphery_size", "final_l1_delta", "curve", "wall_time",
)


def make_graph(family: str, n: int, params: dict, rng_seed: int) -> Graph:
    if family not in FAMILIES:
        raise InvalidParameter(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    required, build = FAMILIES[family]
    missing = [k for k in required if k not in params]
    if missing:
        raise InvalidParameter(f"family {family!r} needs parameters {missing}")
    return build(int(n), params, rng_seed)


@dataclass(frozen=True)
class GraphSpec:
    family: str
    n: int
    params: dict = field(default_factory=dict)
    seed_policies: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentSpec:
    graphs: tuple[GraphSpec, ...]
    eps: tuple[str, ...]
    seed_policy: str = "max_degree"
    seed_charge: float = 1.0
    delta_term: str | float | None = None
    max_iters: int | None = None
    repetitions: int = 1
    rng_seed: int = 0
    output_dir: str = "results"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise InvalidParameter("experiment spec must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidParameter(f"unknown spec keys {sorted(unknown)}")
        graphs = []
        for g in data.get("graphs") or ():
            g = dict(g)
            try:
                family, n = g.pop("family"), int(g.pop("n"))
            except KeyError as exc:
                raise InvalidParameter(f"graph entry missing {exc}") from None
            policies = tuple(g.pop("seed_policies", ()))
            graphs.append(GraphSpec(family, n, g, policies))
        eps = data.get("eps") or ()
        if isinstance(eps, (str, int, float)):
            eps = [eps]
        spec = cls(
            graphs=tuple(graphs),
            eps=tuple(str(e) for e in eps),
            **{k: v for k, v in data.items() if k not in ("graphs", "eps")},
        )
        spec.validate()
        return spec

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidParameter(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        if not self.graphs:
            raise InvalidParameter("experiment spec lists no graphs")
        if not self.eps:
            raise InvalidParameter("experiment spec lists no thresholds")
        if self.repetitions < 1:
            raise InvalidParameter("repetitions must be >= 1")
        if not self.seed_charge > 0:
            raise InvalidParameter("seed_charge must be positive")
        for g in self.graphs:
            if g.family not in FAMILIES:
                raise InvalidParameter(f"unknown family {g.family!r}")
            missing = [k for k in FAMILIES[g.family][0] if k not in g.params]
            if missing:
                raise InvalidParameter(f"family {g.family!r} needs parameters {missing}")
            for e in self.eps:
                parse_eps(e, g.n)
            for p in g.seed_policies or (self.seed_policy,):
                _policy(p, 0)
        if self.delta_term is not None:
            parse_eps(self.delta_term, 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("output_dir")  # where results go is not part of what was run
        d["graphs"] = [
            {"family": g.family, "n": g.n, **g.params,
             **({"seed_policies": list(g.seed_policies)} if g.seed_policies else {})}
            for g in self.graphs
        ]
        d["eps"] = list(self.eps)
        return d

    def jobs(self) -> list[dict]:
        """One job per (graph, seed policy, threshold, repetition), in spec order."""
        out = []
        for gi, g in enumerate(self.graphs):
            for policy in g.seed_policies or (self.seed_policy,):
                for eps_label in self.eps:
                    for rep in range(self.repetitions):
                        out.append(dict(
                            index=len(out), graph=gi, family=g.family, n=g.n,
                            params=dict(g.params), seed_policy=policy, eps_label=eps_label,
                            rep=rep, graph_seed=self.rng_seed + rep,
                            seed_charge=self.seed_charge, delta_term=self.delta_term,
                            max_iters=self.max_iters,
                        ))
        return out


def _policy(text: str, rng_seed: int) -> SeedPolicy:
    # bare "random" draws its seed node from the repetition's seed
    if text.strip().lower() == "random":
        return SeedPolicy.random(rng_seed)
    return SeedPolicy.parse(text)


def _curve_name(job: dict) -> str:
    label = job["eps_label"].replace("/", "_over_")
    policy = job["seed_policy"].replace(":", "-")
    return f"g{job['graph']}_{job['family']}_n{job['n']}_{policy}_eps{label}_rep{job['rep']}.csv"


def run_job(job: dict, curve_dir: Path | None = None) -> dict:
    t0 = time.perf_counter()
    g = make_graph(job["family"], job["n"], job["params"], job["graph_seed"])
    eps = parse_eps(job["eps_label"], g.n)
    seed = select_seed(g, _policy(job["seed_policy"], job["graph_seed"]))
    delta = parse_eps(job["delta_term"], g.n) if job["delta_term"] is not None else None
    cfg = engine.DiffusionConfig({seed: job["seed_charge"]}, eps, delta, job["max_iters"])
    trace, summary = engine.run(g, cfg)
    row = {
        "family": job["family"],
        "n": g.n,
        "params": json.dumps(job["params"], sort_keys=True),
        "seed_policy": job["seed_policy"],
        "eps_label": job["eps_label"],
        "eps": repr(eps),
        "rep": job["rep"],
        "graph_seed": job["graph_seed"],
        "seed_node": seed,
        "status": summary.status.value,
        "expected_saturated": g.n * eps <= job["seed_charge"],
        "iterations": summary.iterations,
        "core_size": len(summary.core),
        "periphery_size": len(summary.periphery),
        "final_l1_delta": repr(trace[-1].l1_delta),
        "curve": _curve_name(job),
    }
    if curve_dir is not None:
        with open(curve_dir / row["curve"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "l1_delta", "core_size", "max_edge_delta"])
            for r in trace:
                w.writerow([r.t, repr(r.l1_delta), r.core_size, repr(r.max_edge_delta)])
    row["wall_time"] = f"{time.perf_counter() - t0:.6f}"
    return row


def _safe_run(job, curve_dir):
    try:
        return run_job(job, curve_dir)
    except Exception as exc:  # recorded in the aggregate, the sweep carries on
        return {
            "family": job["family"], "n": job["n"],
            "params": json.dumps(job["params"], sort_keys=True),
            "seed_policy": job["seed_policy"], "eps_label": job["eps_label"],
            "rep": job["rep"], "graph_seed": job["graph_seed"],
            "status": f"Error: {type(exc).__name__}: {exc}",
        }


def run_experiment(spec: ExperimentSpec, output_dir=None, workers: int = 1) -> Path:
    """Run every job and write ``aggregate.csv``, ``curves/*.csv`` and
    ``experiment.json``; returns the aggregate path."""
    out = Path(output_dir if output_dir is not None else spec.output_dir)
    curve_dir = out / "curves"
    curve_dir.mkdir(parents=True, exist_ok=True)
    jobs = spec.jobs()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_safe_run, jobs, [curve_dir] * len(jobs)))
    else:
        rows = [_safe_run(j, curve_dir) for j in jobs]
    agg = out / "aggregate.csv"
    with open(agg, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS, restval="")
        w.writeheader()
        w.writerows(rows)
    echo = spec.to_dict()
    (out / "experiment.json").write_text(
        json.dumps({"spec": echo, "spec_hash": config_hash(echo), "runs": len(rows)},
                   indent=2, sort_keys=True) + "\n"
    )
    return agg
