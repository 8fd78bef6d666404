"""Decomposable functions evaluated over a discovered core by local exchange.

Only core nodes take part; each round every node combines the values of its
closed neighbourhood inside the core-induced subgraph.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .engine import RunSummary
from .errors import ConvergenceFailure, EmptyCore, InvalidParameter
from .graph import Graph, component_labels, connected_components


@dataclass(frozen=True)
class Combiner:
    """A gossip update rule.

    ``reduce`` maps the values of a closed neighbourhood to the node's new
    value. ``None`` marks the Metropolis-weighted average, which needs the
    degrees and is handled separately.
    """

    name: str
    reduce: Callable[[Sequence[float]], float] | None = None
    idempotent: bool = False

    @classmethod
    def custom(cls, name: str, fn: Callable[[Sequence[float]], float]) -> "Combiner":
        return cls(name, fn)


MAX = Combiner("max", max, idempotent=True)
MIN = Combiner("min", min, idempotent=True)
AVERAGE_METROPOLIS = Combiner("average_metropolis")

COMBINERS = {c.name: c for c in (MAX, MIN, AVERAGE_METROPOLIS)}


def get_combiner(name: str) -> Combiner:
    try:
        return COMBINERS[name]
    except KeyError:
        raise InvalidParameter(f"unknown combiner {name!r}; choose from {sorted(COMBINERS)}") from None


@dataclass(frozen=True)
class CoreView:
    graph: Graph                 # core-induced subgraph, relabelled 0..k-1
    nodes: tuple[int, ...]       # local index -> original node
    y: np.ndarray

    @property
    def components(self) -> int:
        return len(connected_components(self.graph))

    @property
    def connected(self) -> bool:
        return self.components == 1

    def values_by_node(self) -> dict[int, float]:
        return dict(zip(self.nodes, self.y.tolist()))


def build_core_view(graph: Graph, summary: RunSummary, initial_values) -> CoreView:
    if not summary.core:
        raise EmptyCore("run produced an empty core")
    values = np.asarray(initial_values, dtype=np.float64)
    if values.shape != (graph.n,):
        raise InvalidParameter(f"need one initial value per node ({graph.n}), got {values.shape}")
    sub, nodes = graph.induced(summary.core)
    return CoreView(sub, nodes, values[list(nodes)].copy())


def metropolis_edge_weights(graph: Graph) -> np.ndarray:
    """``1 / (1 + max(d_i, d_j))`` for each row of ``graph.edge_array``."""
    e = graph.edge_array
    deg = graph.degrees
    return 1.0 / (1.0 + np.maximum(deg[e[:, 0]], deg[e[:, 1]]))


def gossip_round(view: CoreView, combiner: Combiner) -> CoreView:
    y = view.y
    if combiner.reduce is None:
        # each edge carries an antisymmetric flow, so the total is preserved
        e = view.graph.edge_array
        new = y.copy()
        if len(e):
            flow = metropolis_edge_weights(view.graph) * (y[e[:, 1]] - y[e[:, 0]])
            delta = np.zeros_like(y)
            np.add.at(delta, e[:, 0], flow)
            np.add.at(delta, e[:, 1], -flow)
            new = y + delta
        return replace(view, y=new)
    vals = y.tolist()
    new = [
        combiner.reduce([vals[i]] + [vals[j] for j in nb])
        for i, nb in enumerate(view.graph.adjacency)
    ]
    return replace(view, y=np.array(new, dtype=np.float64))


def _spread_per_component(view: CoreView) -> float:
    labels = component_labels(view.graph)
    return max(float(np.ptp(view.y[labels == c])) for c in np.unique(labels))


def run_gossip(view: CoreView, combiner: Combiner, tol: float = 1e-6, max_rounds: int = 100_000):
    """Iterate gossip rounds until settled; returns ``(values, rounds)``.

    Rounds that leave every value unchanged are not counted. Idempotent
    combiners (max, min) stop at the first unchanged round. The Metropolis
    average stops once the values within every component span less than
    ``tol``, which puts each of them within ``tol`` of the component mean.
    A custom combiner stops when no value moves by ``tol`` or more.
    """
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    rounds = 0
    while True:
        if combiner.reduce is None and _spread_per_component(view) < tol:
            return view.y, rounds
        nxt = gossip_round(view, combiner)
        change = float(np.max(np.abs(nxt.y - view.y))) if len(view.y) else 0.0
        if change == 0.0:
            return view.y, rounds
        rounds += 1
        view = nxt
        if combiner.reduce is not None and not combiner.idempotent and change < tol:
            return view.y, rounds
        if rounds >= max_rounds:
            raise ConvergenceFailure(
                f"{combiner.name} gossip did not settle in {max_rounds} rounds",
                values=view.y, rounds=rounds,
            )
