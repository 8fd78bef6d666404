from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from corediffusion.graph import Graph

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def cliques_joined_by_path(clique: int, path: int) -> Graph:
    """Two ``clique``-cliques whose last/first nodes are joined by ``path`` path nodes.

    Nodes ``0..clique-1`` form clique A, the next ``path`` nodes the path, the
    final ``clique`` nodes clique B.
    """
    edges = []
    a = list(range(clique))
    p = list(range(clique, clique + path))
    b = list(range(clique + path, 2 * clique + path))
    for block in (a, b):
        edges += [(u, v) for i, u in enumerate(block) for v in block[i + 1:]]
    chain = [a[-1]] + p + [b[0]]
    edges += list(zip(chain, chain[1:]))
    return Graph.from_edges(2 * clique + path, edges)


def exact_run(adjacency, x0, eps, delta_term, max_iters=10_000):
    """Rational-arithmetic transcription of the update, run to L1 termination."""
    n = len(adjacency)
    x = [Fraction(v) for v in x0]
    eps = [Fraction(e) for e in eps]
    deg = [len(a) for a in adjacency]
    for t in range(1, max_iters + 1):
        z = [x[i] > eps[i] and deg[i] > 0 for i in range(n)]
        new = []
        for i in range(n):
            keep = eps[i] + (x[i] - eps[i]) / 2 if z[i] else x[i]
            recv = sum(((x[j] - eps[j]) / (2 * deg[j]) for j in adjacency[i] if z[j]), Fraction(0))
            new.append(keep + recv)
        delta = sum(abs(a - b) for a, b in zip(new, x))
        x = new
        if delta < Fraction(delta_term):
            return t, x
    return max_iters, x


@st.composite
def graphs(draw, min_n=1, max_n=25):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if pairs:
        chosen = draw(st.lists(st.sampled_from(pairs), max_size=3 * n, unique=True))
    else:
        chosen = []
    return Graph.from_edges(n, chosen)


@st.composite
def graphs_with_state(draw, max_n=25):
    g = draw(graphs(max_n=max_n))
    charge = st.one_of(st.just(0.0), st.floats(0.0, 5.0, allow_nan=False))
    x = np.array(draw(st.lists(charge, min_size=g.n, max_size=g.n)))
    eps = np.array(draw(st.lists(st.floats(1e-3, 2.0), min_size=g.n, max_size=g.n)))
    return g, x, eps


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])
