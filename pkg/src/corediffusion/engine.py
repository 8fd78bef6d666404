"""Thresholded charge diffusion: grow a bounded core around seed nodes.

Every node holds a non-negative charge ``x_i`` and a threshold ``eps_i``.
A node is *active* (core) when ``x_i > eps_i``; an active node keeps
``eps_i`` plus half of its excess and spreads the other half evenly over
its neighbours. Inactive nodes keep everything they hold. The update is
fully synchronous: activity is decided from the previous state only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameter, InvalidState
from .graph import Graph, component_labels, connected_components

CONSERVATION_RTOL = 1e-12


class NodeClass(enum.Enum):
    CORE = "core"
    PERIPHERAL = "peripheral"
    UNTOUCHED = "untouched"


class Status(enum.Enum):
    TERMINATED = "Terminated"
    ITERATION_CAP = "IterationCapReached"
    SATURATED = "SaturatedRegime"


@dataclass
class ChargeState:
    x: np.ndarray
    eps: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.eps = np.broadcast_to(np.asarray(self.eps, dtype=np.float64), self.x.shape).copy()

    @property
    def total(self) -> float:
        return math.fsum(self.x)

    def copy(self) -> "ChargeState":
        return ChargeState(self.x.copy(), self.eps.copy(), self.t)


@dataclass(frozen=True)
class DiffusionConfig:
    """Inputs of a core-building run.

    ``eps`` is either a scalar (uniform threshold) or a per-node sequence.
    ``delta_term`` and ``max_iters`` default to ``1/n`` and ``100*n`` once the
    graph is known. ``allow_zero_eps`` unlocks ``eps == 0`` for comparisons
    against the lazy random walk; such runs never reach a fixed point.
    """

    seeds: Mapping[int, float]
    eps: float | Sequence[float]
    delta_term: float | None = None
    max_iters: int | None = None
    allow_zero_eps: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise InvalidParameter("at least one seed is required")
        if any(not c > 0 for c in self.seeds.values()):
            raise InvalidParameter("seed charges must be positive")
        eps = np.atleast_1d(np.asarray(self.eps, dtype=np.float64))
        if self.allow_zero_eps:
            if np.any(eps < 0) or not np.all(np.isfinite(eps)):
                raise InvalidParameter("thresholds must be non-negative")
        elif not np.all(eps > 0) or not np.all(np.isfinite(eps)):
            raise InvalidParameter("thresholds must be positive")
        if self.delta_term is not None and not self.delta_term > 0:
            raise InvalidParameter("delta_term must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise InvalidParameter("max_iters must be >= 1")

    def initial_state(self, n: int) -> ChargeState:
        x = np.zeros(n)
        for node, charge in self.seeds.items():
            if not 0 <= node < n:
                raise InvalidParameter(f"seed {node} out of range for n={n}")
            x[node] = charge
        eps = np.asarray(self.eps, dtype=np.float64)
        if eps.ndim and len(eps) != n:
            raise InvalidParameter(f"threshold vector has length {len(eps)}, graph has {n} nodes")
        return ChargeState(x, eps)

    def resolved_delta(self, n: int) -> float:
        return self.delta_term if self.delta_term is not None else 1.0 / n

    def resolved_max_iters(self, n: int) -> int:
        return self.max_iters if self.max_iters is not None else 100 * n


@dataclass(frozen=True)
class TraceRecord:
    t: int
    total_charge: float
    l1_delta: float
    core_size: int
    periphery_size: int
    untouched_size: int
    max_edge_delta: float

    FIELDS = (
        "t", "total_charge", "l1_delta", "core_size",
        "periphery_size", "untouched_size", "max_edge_delta",
    )

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


@dataclass
class RunSummary:
    status: Status
    iterations: int
    core: frozenset[int]
    periphery: frozenset[int]
    final_state: ChargeState
    initial_total: float
    saturated: bool = False
    warnings: list[str] = field(default_factory=list)


def indicator(state: ChargeState) -> np.ndarray:
    """1 where the node is active (``x_i > eps_i``, strictly), else 0."""
    return (state.x > state.eps).astype(np.int8)


def step(graph: Graph, state: ChargeState) -> ChargeState:
    x, eps = state.x, state.eps
    if x.shape != (graph.n,) or eps.shape != (graph.n,):
        raise InvalidState(f"state has shape {x.shape}, graph has {graph.n} nodes")
    deg = graph.degrees
    # an isolated active node has nowhere to send and keeps everything
    active = (x > eps) & (deg > 0)
    excess = np.where(active, x - eps, 0.0)
    retained = np.where(active, eps + excess / 2, x)
    share = np.zeros(graph.n)
    share[active] = excess[active] / (2 * deg[active])
    incoming = graph.csr @ share
    return ChargeState(retained + incoming, eps, state.t + 1)


def classify(state: ChargeState) -> list[NodeClass]:
    out = []
    for xi, ei in zip(state.x.tolist(), state.eps.tolist()):
        if xi > ei:
            out.append(NodeClass.CORE)
        elif xi > 0:
            out.append(NodeClass.PERIPHERAL)
        else:
            out.append(NodeClass.UNTOUCHED)
    return out


def core_of(state: ChargeState) -> frozenset[int]:
    return frozenset(np.flatnonzero(state.x > state.eps).tolist())


def saturated_components(graph: Graph, state: ChargeState) -> list[int]:
    """Components whose charge is at least their summed thresholds.

    In such a component not every node can end at or below its threshold, so
    an exact fixed point with all excess shed does not exist.
    """
    labels = component_labels(graph)
    k = int(labels.max()) + 1
    charge = np.bincount(labels, weights=state.x, minlength=k)
    cap = np.bincount(labels, weights=state.eps, minlength=k)
    return [c for c in range(k) if charge[c] > 0 and charge[c] >= cap[c]]


def _record(graph: Graph, old: ChargeState, new: ChargeState) -> TraceRecord:
    diff = np.abs(new.x - old.x)
    core = int(np.count_nonzero(new.x > new.eps))
    touched = int(np.count_nonzero(new.x > 0))
    edges = graph.edge_array
    max_edge = float((diff[edges[:, 0]] + diff[edges[:, 1]]).max()) if len(edges) else 0.0
    return TraceRecord(
        t=new.t,
        total_charge=new.total,
        l1_delta=float(diff.sum()),
        core_size=core,
        periphery_size=touched - core,
        untouched_size=graph.n - touched,
        max_edge_delta=max_edge,
    )


Observer = Callable[[ChargeState, ChargeState], None]


def iterate(
    graph: Graph,
    state: ChargeState,
    delta_term: float,
    max_iters: int,
    observer: Observer | None = None,
) -> tuple[list[TraceRecord], RunSummary]:
    """Step from ``state`` until the L1 change drops below ``delta_term`` or
    ``max_iters`` steps were taken. ``observer(old, new)`` sees every step."""
    if not delta_term > 0:
        raise InvalidParameter("delta_term must be positive")
    if max_iters < 1:
        raise InvalidParameter("max_iters must be >= 1")
    initial_total = state.total
    saturated = bool(saturated_components(graph, state))
    trace: list[TraceRecord] = []
    status = None
    for _ in range(max_iters):
        new = step(graph, state)
        rec = _record(graph, state, new)
        trace.append(rec)
        if observer is not None:
            observer(state, new)
        state = new
        if rec.l1_delta < delta_term:
            status = Status.TERMINATED
            break
    if status is None:
        status = Status.SATURATED if saturated else Status.ITERATION_CAP
    warnings = []
    if saturated:
        warnings.append(
            "total charge reaches the summed thresholds of its component; "
            "no fixed point with every node at or below threshold exists"
        )
    classes = classify(state)
    summary = RunSummary(
        status=status,
        iterations=len(trace),
        core=frozenset(i for i, c in enumerate(classes) if c is NodeClass.CORE),
        periphery=frozenset(i for i, c in enumerate(classes) if c is NodeClass.PERIPHERAL),
        final_state=state,
        initial_total=initial_total,
        saturated=saturated,
        warnings=warnings,
    )
    return trace, summary


def run(
    graph: Graph, config: DiffusionConfig, observer: Observer | None = None
) -> tuple[list[TraceRecord], RunSummary]:
    """Grow cores from ``config.seeds`` until delta-termination or the cap."""
    state = config.initial_state(graph.n)
    return iterate(
        graph,
        state,
        config.resolved_delta(graph.n),
        config.resolved_max_iters(graph.n),
        observer,
    )


# -- invariant checks --------------------------------------------------------------


def check_conservation(trace: Sequence[TraceRecord], rtol: float = CONSERVATION_RTOL) -> bool:
    if not trace:
        raise InvalidParameter("empty trace")
    ref = trace[0].total_charge
    return all(abs(r.total_charge - ref) <= rtol * abs(ref) for r in trace)


def core_connectivity(graph: Graph, core, seeds) -> bool:
    """True iff every component of the core-induced subgraph holds a seed.

    With a single seed this means the core is one connected piece containing
    it; with several seeds, cores that have not merged may stay separate.
    """
    core = set(core)
    if not core:
        return True
    seeds = set(seeds) & core
    return all(comp & seeds for comp in connected_components(graph, core))


def neighbourhood(graph: Graph, nodes) -> set[int]:
    """Nodes adjacent to ``nodes`` but not in it (the 1-vertex boundary)."""
    nodes = set(nodes)
    return {v for u in nodes for v in graph.adjacency[u]} - nodes


class InvariantMonitor:
    """Observer collecting violations of the structural guarantees of a run.

    Checked after every step: non-negativity, conservation, core monotonicity,
    core charges above threshold and at most the total, boundary charges in
    ``[0, eps)``, exact zeros beyond the boundary (nodes charged initially are
    exempt), and core connectivity relative to the seeds.
    ``max_core`` optionally bounds the core size.
    """

    def __init__(self, graph: Graph, seeds, max_core: float | None = None,
                 rtol: float = CONSERVATION_RTOL):
        self.graph = graph
        self.seeds = set(seeds)
        self.max_core = max_core
        self.rtol = rtol
        self.violations: list[str] = []
        self.steps = 0
        self._total = None
        self._core: frozenset[int] | None = None

    def _fail(self, t, msg):
        self.violations.append(f"t={t}: {msg}")

    def __call__(self, old: ChargeState, new: ChargeState):
        self.steps += 1
        t = new.t
        if self._total is None:
            self._total = old.total
            self._core = core_of(old)
            self._support = set(np.flatnonzero(old.x).tolist())
        x, eps = new.x, new.eps
        if x.min() < 0:
            self._fail(t, f"negative charge {x.min()}")
        if abs(new.total - self._total) > self.rtol * abs(self._total):
            self._fail(t, f"total charge drifted to {new.total!r} from {self._total!r}")
        core = core_of(new)
        if not self._core <= core:
            self._fail(t, f"nodes left the core: {sorted(self._core - core)}")
        self._core = core
        if core and x[list(core)].max() > self._total:
            self._fail(t, "a core node holds more than the total charge")
        if self.max_core is not None and len(core) > self.max_core:
            self._fail(t, f"core size {len(core)} exceeds {self.max_core}")
        boundary = neighbourhood(self.graph, core)
        for i in boundary:
            if not 0 <= x[i] < eps[i]:
                self._fail(t, f"boundary node {i} has charge {x[i]} outside [0, {eps[i]})")
        outside = np.ones(self.graph.n, dtype=bool)
        outside[list(core | boundary | self._support)] = False
        if np.any(x[outside] != 0):
            bad = np.flatnonzero(outside & (x != 0))[:5].tolist()
            self._fail(t, f"non-zero charge beyond the core boundary at {bad}")
        if not core_connectivity(self.graph, core, self.seeds):
            self._fail(t, "core-induced subgraph has a component without a seed")

    @property
    def ok(self) -> bool:
        return not self.violations
