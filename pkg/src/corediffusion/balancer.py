"""Load balancing on top of the diffusion: loads are charges, capacities are
per-node thresholds, and overloaded nodes shed to nearby spare capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import InfeasibleLoad, InvalidParameter
from .graph import Graph, component_labels


@dataclass(frozen=True)
class LoadProblem:
    loads: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        loads = np.asarray(self.loads, dtype=np.float64)
        caps = np.asarray(self.capacities, dtype=np.float64)
        if loads.shape != caps.shape or loads.ndim != 1:
            raise InvalidParameter("loads and capacities must be equal-length vectors")
        if np.any(loads < 0):
            raise InvalidParameter("loads must be non-negative")
        if not np.all(caps > 0):
            raise InvalidParameter("capacities must be positive")
        object.__setattr__(self, "loads", loads)
        object.__setattr__(self, "capacities", caps)


@dataclass(frozen=True)
class Overload:
    node: int
    load: float
    capacity: float
    final: float

    @property
    def shed(self) -> float:
        return self.load - self.final


@dataclass
class BalanceReport:
    overloaded: list[Overload]
    max_excess: float        # max_i (x_i - c_i) at the end, over all nodes
    total_load: float
    total_final: float


def feasibility(problem: LoadProblem, graph: Graph | None = None) -> bool:
    """Strictly less total load than total capacity; with a graph, also per
    connected component, since load cannot cross components."""
    if not math.fsum(problem.loads) < math.fsum(problem.capacities):
        return False
    if graph is None:
        return True
    labels = component_labels(graph)
    k = int(labels.max()) + 1
    load = np.bincount(labels, weights=problem.loads, minlength=k)
    cap = np.bincount(labels, weights=problem.capacities, minlength=k)
    return bool(np.all(load < cap))


def balance(graph: Graph, problem: LoadProblem, delta_term: float | None = None,
            max_iters: int | None = None, observer=None):
    if problem.loads.shape != (graph.n,):
        raise InvalidParameter(f"problem has {len(problem.loads)} nodes, graph has {graph.n}")
    if not feasibility(problem, graph):
        raise InfeasibleLoad(
            f"total load {math.fsum(problem.loads):g} does not fit under total "
            f"capacity {math.fsum(problem.capacities):g} (checked per component)"
        )
    state = engine.ChargeState(problem.loads.copy(), problem.capacities)
    _, summary = engine.iterate(
        graph,
        state,
        delta_term if delta_term is not None else 1.0 / graph.n,
        max_iters if max_iters is not None else 100 * graph.n,
        observer,
    )
    x = summary.final_state.x
    over = [
        Overload(int(i), float(problem.loads[i]), float(problem.capacities[i]), float(x[i]))
        for i in np.flatnonzero(problem.loads > problem.capacities)
    ]
    report = BalanceReport(
        overloaded=over,
        max_excess=float(np.max(x - problem.capacities)),
        total_load=math.fsum(problem.loads),
        total_final=math.fsum(x),
    )
    return summary, report
