"""Undirected simple graphs, the synthetic families used in the experiments,
edge-list I/O and seed selection."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import GenerationFailed, InvalidParameter, ParseError

REGULAR_RETRY_CAP = 100


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``adjacency[i]`` is the ascending tuple of neighbours of ``i``.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidParameter("graph needs at least one node")
        if len(self.adjacency) != self.node_count:
            raise InvalidParameter("adjacency length does not match node_count")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise InvalidParameter("graph needs at least one node")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameter(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InvalidParameter(f"self-loop at node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def n(self) -> int:
        return self.node_count

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @property
    def d_max(self) -> int:
        return int(self.degrees.max())

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, in lexicographic order."""
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    @cached_property
    def edge_array(self) -> np.ndarray:
        e = self.edges()
        return np.array(e, dtype=np.int64).reshape(len(e), 2)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """0/1 adjacency matrix with column indices sorted ascending in each row."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (v for nb in self.adjacency for v in nb), dtype=np.int64, count=int(indptr[-1])
        )
        data = np.ones(len(indices), dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def validate(self) -> None:
        """Raise InvalidParameter unless the graph is symmetric and simple."""
        for i, nb in enumerate(self.adjacency):
            if list(nb) != sorted(set(nb)):
                raise InvalidParameter(f"adjacency of {i} not sorted/unique")
            for j in nb:
                if j == i:
                    raise InvalidParameter(f"self-loop at {i}")
                if not 0 <= j < self.n:
                    raise InvalidParameter(f"neighbour {j} of {i} out of range")
                if i not in self.adjacency[j]:
                    raise InvalidParameter(f"asymmetric edge {i}->{j}")

    def induced(self, nodes: Iterable[int]) -> tuple["Graph", tuple[int, ...]]:
        """Induced subgraph relabelled to ``0..k-1`` plus the local->global map."""
        keep = tuple(sorted(set(nodes)))
        local = {g: i for i, g in enumerate(keep)}
        adj = tuple(
            tuple(local[v] for v in self.adjacency[g] if v in local) for g in keep
        )
        return Graph(len(keep), adj), keep


# -- connectivity ---------------------------------------------------------------


def connected_components(graph: Graph, nodes: Iterable[int] | None = None) -> list[set[int]]:
    """Components of ``graph`` (optionally restricted to the subgraph on ``nodes``),
    ordered by their smallest node."""
    allowed = set(range(graph.n)) if nodes is None else set(nodes)
    seen: set[int] = set()
    comps = []
    for s in sorted(allowed):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in graph.adjacency[u]:
                if v in allowed and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(comp)
    return comps


def is_connected(graph: Graph) -> bool:
    return len(connected_components(graph)) == 1


def component_labels(graph: Graph) -> np.ndarray:
    labels = np.empty(graph.n, dtype=np.int64)
    for k, comp in enumerate(connected_components(graph)):
        labels[list(comp)] = k
    return labels


def eccentricities(graph: Graph) -> list[int]:
    """BFS eccentricity of every node within its own component."""
    out = []
    for s in range(graph.n):
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in graph.adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        out.append(max(dist.values()))
    return out


def diameter(graph: Graph) -> int:
    """Largest eccentricity; for a disconnected graph, the max over components."""
    return max(eccentricities(graph))


# -- generators -----------------------------------------------------------------


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParameter(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def gen_path(n: int) -> Graph:
    if n < 1:
        raise InvalidParameter(f"path needs n >= 1, got {n}")
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def gen_complete(n: int) -> Graph:
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def gen_star(leaves: int) -> Graph:
    """Star with centre 0 and leaves ``1..leaves``."""
    return Graph.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def _pair_stubs(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]] | None:
    # Shuffle-and-pair; valid pairs are kept and leftover stubs re-paired until
    # either everything is matched or no valid pair remains.
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while len(stubs):
        rng.shuffle(stubs)
        leftover = []
        for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            u, v = (a, b) if a < b else (b, a)
            if u != v and (u, v) not in edges:
                edges.add((u, v))
            else:
                leftover += [a, b]
        if not leftover:
            break
        if not _has_valid_pair(leftover, edges):
            return None
        stubs = np.array(leftover, dtype=np.int64)
    return edges


def _has_valid_pair(stubs: list[int], edges: set[tuple[int, int]]) -> bool:
    distinct = sorted(set(stubs))
    for i, u in enumerate(distinct):
        for v in distinct[i + 1:]:
            if (u, v) not in edges:
                return True
    return False


def gen_random_regular(n: int, d: int, rng_seed: int) -> Graph:
    """Connected simple d-regular graph via stub pairing with rejection."""
    if d < 1 or d >= n:
        raise InvalidParameter(f"need 1 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise InvalidParameter(f"n*d must be even, got n={n}, d={d}")
    rng = np.random.default_rng(rng_seed)
    for _ in range(REGULAR_RETRY_CAP):
        edges = _pair_stubs(n, d, rng)
        if edges is None:
            continue
        g = Graph.from_edges(n, sorted(edges))
        if is_connected(g):
            return g
    raise GenerationFailed(
        f"no connected simple {d}-regular graph on {n} nodes after {REGULAR_RETRY_CAP} attempts"
    )


def gen_powerlaw(n: int, m: int, rng_seed: int) -> Graph:
    """Preferential attachment grown from an (m+1)-clique; each new node links
    to ``m`` distinct existing nodes chosen proportionally to degree."""
    # the seed clique alone (m + 1 == n) involves no attachment at all
    if m < 1 or m + 1 >= n:
        raise InvalidParameter(f"need 1 <= m <= n - 2, got n={n}, m={m}")
    rng = np.random.default_rng(rng_seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # every node appears once per incident edge end
    ends = [v for e in edges for v in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, new))
            ends += [t, new]
    return Graph.from_edges(n, edges)


def gen_erdos_renyi(n: int, p: float, rng_seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


# -- edge-list I/O ---------------------------------------------------------------


def parse_edge_list(text: str) -> Graph:
    """Parse ``u v`` lines; ``#`` lines are comments.

    A ``# nodes: N`` comment (as written by :func:`save_edge_list`) fixes the
    node count so isolated trailing nodes survive a round trip. Repeated edges
    (in either orientation) are merged.
    """
    declared = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("nodes:"):
                try:
                    declared = int(body[len("nodes:"):])
                except ValueError:
                    raise ParseError(f"bad node count {body!r}", lineno) from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node in {line!r}", lineno) from None
        if u < 0 or v < 0 or (declared is not None and max(u, v) >= declared):
            raise ParseError(f"node index out of range in {line!r}", lineno)
        if u == v:
            raise ParseError(f"self-loop at node {u}", lineno)
        pairs.append((u, v))
    n = declared if declared is not None else 1 + max((max(p) for p in pairs), default=-1)
    if n < 1:
        raise ParseError("edge list defines no nodes")
    return Graph.from_edges(n, pairs)


def load_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def save_edge_list(graph: Graph, path) -> None:
    lines = [f"# nodes: {graph.n}"] + [f"{u} {v}" for u, v in graph.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


# -- seed selection --------------------------------------------------------------


@dataclass(frozen=True)
class SeedPolicy:
    kind: str  # "max_degree" | "min_degree" | "random" | "explicit"
    value: int | None = None

    KINDS = ("max_degree", "min_degree", "random", "explicit")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameter(f"unknown seed policy {self.kind!r}")
        if self.kind in ("random", "explicit") and self.value is None:
            raise InvalidParameter(f"seed policy {self.kind!r} needs a value")

    @classmethod
    def max_degree(cls):
        return cls("max_degree")

    @classmethod
    def min_degree(cls):
        return cls("min_degree")

    @classmethod
    def random(cls, rng_seed: int):
        return cls("random", rng_seed)

    @classmethod
    def explicit(cls, node: int):
        return cls("explicit", node)

    @classmethod
    def parse(cls, text: str) -> "SeedPolicy":
        """Accepts ``max``, ``min``, ``random:SEED``, ``explicit:NODE`` or a bare node index."""
        text = text.strip().lower()
        aliases = {"max": "max_degree", "min": "min_degree"}
        if text.isdigit():
            return cls.explicit(int(text))
        kind, _, arg = text.partition(":")
        kind = aliases.get(kind, kind)
        if kind in ("random", "explicit"):
            try:
                return cls(kind, int(arg))
            except ValueError:
                raise InvalidParameter(f"seed policy {text!r} needs an integer argument") from None
        return cls(kind)

    def __str__(self):
        return self.kind if self.value is None else f"{self.kind}:{self.value}"


def select_seed(graph: Graph, policy: SeedPolicy) -> int:
    if policy.kind == "max_degree":
        return int(np.argmax(graph.degrees))  # argmax returns the first maximum
    if policy.kind == "min_degree":
        return int(np.argmin(graph.degrees))
    if policy.kind == "random":
        return int(np.random.default_rng(policy.value).integers(graph.n))
    if not 0 <= policy.value < graph.n:
        raise InvalidParameter(f"explicit seed {policy.value} out of range for n={graph.n}")
    return int(policy.value)
