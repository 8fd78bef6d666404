"""Independent reference implementations, used for differential testing.

Nothing here shares code with :mod:`corediffusion.engine`: the threshold
update is a literal loop transcription and the lazy walk is a dense matrix.
"""

from __future__ import annotations

import numpy as np

from .engine import ChargeState
from .errors import InvalidParameter, InvalidState
from .graph import Graph


def reference_step(graph: Graph, state: ChargeState) -> ChargeState:
    n = graph.n
    x = [float(v) for v in state.x]
    eps = [float(v) for v in state.eps]
    if len(x) != n or len(eps) != n:
        raise InvalidState(f"state has {len(x)} entries, graph has {n} nodes")
    deg = [len(a) for a in graph.adjacency]
    z = [1 if x[i] > eps[i] and deg[i] > 0 else 0 for i in range(n)]
    new = []
    for i in range(n):
        keep = eps[i] * z[i] + (x[i] - eps[i]) / 2 * z[i] + x[i] * (1 - z[i])
        recv = 0.0
        for j in graph.adjacency[i]:
            if z[j]:
                recv += (x[j] - eps[j]) / (2 * deg[j])
        new.append(keep + recv)
    return ChargeState(np.array(new), np.array(eps), state.t + 1)


def lazy_walk_matrix(graph: Graph) -> np.ndarray:
    """Column-stochastic ``M`` with ``M[i, i] = 1/2`` and ``M[i, j] = 1/(2 d_j)``.

    Isolated nodes get ``M[i, i] = 1`` so they keep their mass.
    """
    n = graph.n
    M = np.zeros((n, n))
    for j, nb in enumerate(graph.adjacency):
        if not nb:
            M[j, j] = 1.0
            continue
        M[j, j] = 0.5
        for i in nb:
            M[i, j] = 0.5 / len(nb)
    return M


def lazy_walk_step(graph: Graph, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (graph.n,):
        raise InvalidParameter(f"vector length {v.shape} does not match n={graph.n}")
    return lazy_walk_matrix(graph) @ v


def lazy_walk(graph: Graph, v, steps: int) -> list[np.ndarray]:
    """The iterates ``v_1..v_steps`` (matrix built once)."""
    M = lazy_walk_matrix(graph)
    out = []
    v = np.asarray(v, dtype=np.float64)
    for _ in range(steps):
        v = M @ v
        out.append(v)
    return out


def compare_states(a, b, tol: float) -> tuple[bool, float]:
    a = np.asarray(getattr(a, "x", a), dtype=np.float64)
    b = np.asarray(getattr(b, "x", b), dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidParameter(f"length mismatch: {a.shape} vs {b.shape}")
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    return diff <= tol, diff
