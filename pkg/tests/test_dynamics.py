import math

import numpy as np
import pytest

from maxdi.dynamics import (
    DEFAULT_STEPS,
    DynamicsConfig,
    gen_barabasi_albert,
    gen_grid,
    gen_ring_of_cliques,
    glauber_flip_probability,
    simulate,
)
from maxdi.extraction import mi_matrix
from maxdi.graph_core import Graph, GraphError, Partition
from maxdi.structural_entropy import decoding_info


def test_ring_of_cliques_counts():
    g = gen_ring_of_cliques(6, 5)
    assert (g.n, g.m) == (30, 66)
    small = gen_ring_of_cliques(3, 2)
    assert (small.n, small.m) == (6, 6)
    cliques = Partition([range(5 * i, 5 * i + 5) for i in range(6)])
    assert decoding_info(g, cliques) == pytest.approx(2.35, abs=0.005)
    with pytest.raises(GraphError):
        gen_ring_of_cliques(2, 5)


def test_grid_counts():
    g = gen_grid(5, 6)
    assert (g.n, g.m) == (30, 49)
    square = gen_grid(2, 2)
    assert square.m == 4 and np.all(square.degrees == 2)
    with pytest.raises(GraphError):
        gen_grid(1, 2)


@pytest.mark.parametrize("seed", range(5))
def test_barabasi_albert(seed):
    g = gen_barabasi_albert(30, 1, seed)
    assert g.m == 29
    assert g.degrees.sum() == 2 * g.m
    assert g == gen_barabasi_albert(30, 1, seed)
    g2 = gen_barabasi_albert(40, 2, seed)
    assert g2.m == 1 + 2 * (40 - 2)


@pytest.mark.parametrize("model", ["KIM", "IGM", "BM"])
def test_simulators_deterministic_and_spin_valued(model):
    g = gen_ring_of_cliques(3, 3)
    cfg = DynamicsConfig(model=model, steps=60, seed=4)
    a, b = simulate(g, cfg), simulate(g, cfg)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (9, 60)
    assert set(np.unique(a.values)) <= {-1.0, 1.0}
    assert not np.array_equal(a.values, simulate(g, DynamicsConfig(model=model, steps=60, seed=5)).values)


def test_default_length():
    assert DynamicsConfig(model="kim").steps == DEFAULT_STEPS == 2001
    with pytest.raises(ValueError):
        DynamicsConfig(model="XYZ")


def test_kim_zero_coupling_is_fair():
    g = gen_ring_of_cliques(3, 3)
    T = 4000
    ts = simulate(g, DynamicsConfig(model="KIM", steps=T, seed=1, coupling=0.0))
    assert np.mean(np.abs(ts.values.mean(axis=1))) < 3 / math.sqrt(T)


def test_kim_transition_probability():
    w = 0.7
    g = Graph(2, [(0, 1, w)])
    ts = simulate(g, DynamicsConfig(model="KIM", steps=40_000, seed=2))
    s = ts.values
    prev_up = s[0, :-1] > 0
    observed = np.mean(s[1, 1:][prev_up] > 0)
    expected = math.exp(w) / (math.exp(w) + math.exp(-w))
    assert observed == pytest.approx(expected, abs=0.01)


def test_kim_within_clique_mi_exceeds_across():
    g = gen_ring_of_cliques(6, 5)
    mi = mi_matrix(simulate(g, DynamicsConfig(model="KIM", seed=0)))
    block = np.arange(30) // 5
    same = block[:, None] == block[None, :]
    off = ~np.eye(30, dtype=bool)
    assert mi[same & off].mean() > mi[~same].mean()


def test_glauber_infinite_temperature():
    for spin in (-1, 1):
        for field in (-5.0, 0.0, 3.0):
            assert glauber_flip_probability(spin, field, 0.0) == 0.5
    assert glauber_flip_probability(1, 2.0, 1.0) == pytest.approx(1 / (1 + math.exp(4.0)))
    assert glauber_flip_probability(-1, 1e6, 1.0) == pytest.approx(1.0)


def test_bm_no_spread_is_independent():
    g = gen_ring_of_cliques(3, 3)
    ts = simulate(g, DynamicsConfig(model="BM", steps=20_000, seed=3, p_spread=0.0))
    mi = mi_matrix(ts)
    assert mi.max() < 0.01


def test_bm_forced_spread_on_edge():
    g = Graph(2, [(0, 1)])
    s = simulate(g, DynamicsConfig(model="BM", steps=500, seed=6, p_spread=1.0)).values
    active = s > 0
    assert np.all(active[1, 1:][active[0, :-1]])
    assert np.all(active[0, 1:][active[1, :-1]])
