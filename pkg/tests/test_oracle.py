import math

import numpy as np
import pytest
from hypothesis import given, settings

from corediffusion.engine import ChargeState, DiffusionConfig, step
from corediffusion.errors import InvalidParameter, InvalidState
from corediffusion.graph import gen_cycle, gen_random_regular
from corediffusion.oracle import compare_states, lazy_walk, lazy_walk_step, reference_step

from conftest import graphs, graphs_with_state


def test_reference_step_path(path3):
    s = reference_step(path3, ChargeState([0.0, 1.0, 0.0], 0.4))
    assert s.x == pytest.approx([0.15, 0.7, 0.15], abs=1e-15)


def test_reference_step_zero_state():
    g = gen_cycle(7)
    assert reference_step(g, ChargeState(np.zeros(7), 0.2)).x.tolist() == [0.0] * 7


def test_reference_step_dimension_mismatch(path3):
    with pytest.raises(InvalidState):
        reference_step(path3, ChargeState([1.0], 0.1))


@settings(max_examples=100, deadline=None)
@given(graphs_with_state())
def test_engine_matches_reference(case):
    g, x, eps = case
    a = step(g, ChargeState(x, eps)).x
    b = reference_step(g, ChargeState(x, eps)).x
    assert compare_states(a, b, 1e-12)[0]


def test_lazy_walk_path(path3):
    assert lazy_walk_step(path3, [0, 1, 0]).tolist() == [0.25, 0.5, 0.25]


def test_lazy_walk_uniform_is_stationary_on_regular():
    g = gen_random_regular(30, 4, 2)
    v = np.full(30, 1 / 30)
    assert np.allclose(lazy_walk_step(g, v), v, atol=1e-15)


def test_lazy_walk_cycle4_two_steps():
    g = gen_cycle(4)
    v = lazy_walk_step(g, lazy_walk_step(g, [1, 0, 0, 0]))
    assert v.tolist() == [0.375, 0.25, 0.125, 0.25]


def test_lazy_walk_length_mismatch(path3):
    with pytest.raises(InvalidParameter):
        lazy_walk_step(path3, [1.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_lazy_walk_conserves_mass(g):
    v = np.random.default_rng(g.n).random(g.n)
    w = lazy_walk_step(g, v)
    assert abs(math.fsum(w) - math.fsum(v)) <= 1e-12 * math.fsum(v)


@settings(max_examples=30, deadline=None)
@given(graphs(min_n=2, max_n=20))
def test_zero_threshold_engine_is_lazy_walk(g):
    cfg = DiffusionConfig({0: 1.0}, 0.0, allow_zero_eps=True)
    state = cfg.initial_state(g.n)
    for ref in lazy_walk(g, state.x, 50):
        state = step(g, state)
        assert compare_states(state, ref, 1e-9)[0]


def test_compare_states():
    assert compare_states([0, 1], [0, 1], 0.0) == (True, 0.0)
    ok, diff = compare_states([0, 1], [0, 1 + 1e-9], 1e-8)
    assert ok and diff == pytest.approx(1e-9, rel=1e-6)
    ok, diff = compare_states([0, 1], [0, 1.1], 1e-8)
    assert not ok and diff == pytest.approx(0.1)
    with pytest.raises(InvalidParameter):
        compare_states([0, 1], [0], 1.0)
