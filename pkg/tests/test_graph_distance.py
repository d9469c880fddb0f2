import math

import pytest

from maxdi.graph_core import Graph, GraphError
from maxdi.graph_distance import (
    HimConfig,
    _im_from_frequencies,
    auto_gamma,
    distance_report,
    hamming_distance,
    him_distance,
    ipsen_mikhailov,
    laplacian_frequencies,
    weighted_hamming_distance,
)

from conftest import complete, random_graph


def test_hamming_examples():
    k5 = complete(5)
    assert hamming_distance(k5, k5) == 0.0
    assert hamming_distance(Graph(5), k5) == 1.0
    minus = Graph(5, [e for e in k5.edges() if (e[0], e[1]) != (0, 1)])
    assert hamming_distance(k5, minus) == pytest.approx(0.1)


def test_hamming_ignores_weights():
    a = Graph(3, [(0, 1, 5.0), (1, 2, 0.1)])
    b = Graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert hamming_distance(a, b) == 0.0
    assert weighted_hamming_distance(a, b) > 0


def test_size_mismatch():
    with pytest.raises(GraphError):
        hamming_distance(Graph(3), Graph(4))
    with pytest.raises(GraphError):
        ipsen_mikhailov(Graph(3), Graph(4))


@pytest.mark.parametrize("n", [2, 5, 10, 30])
def test_auto_gamma_normalises(n):
    im = ipsen_mikhailov(Graph(n), complete(n))
    assert im == pytest.approx(1.0, abs=1e-6)
    assert him_distance(Graph(n), complete(n), HimConfig(xi=1.0)) == pytest.approx(1.0, abs=1e-6)


def test_identity_and_isospectral():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    relabeled = Graph(4, [(3, 2), (2, 0), (0, 1)])  # same path, permuted vertices
    assert ipsen_mikhailov(g, g) == 0.0
    assert ipsen_mikhailov(g, relabeled) == pytest.approx(0.0, abs=1e-9)
    assert hamming_distance(g, relabeled) > 0
    assert him_distance(g, g) == 0.0


def test_frequencies_drop_zero_mode():
    om = laplacian_frequencies(complete(4))
    assert om == pytest.approx([2.0, 2.0, 2.0])


def test_him_xi_zero_is_hamming(rng):
    for _ in range(10):
        a, b = random_graph(rng, 8, p=0.4), random_graph(rng, 8, p=0.4)
        assert him_distance(a, b, HimConfig(xi=0.0)) == hamming_distance(a, b)


def test_random_pairs_bounded_and_symmetric(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        a = random_graph(rng, n, p=float(rng.random()))
        b = random_graph(rng, n, p=float(rng.random()))
        for f in (hamming_distance, ipsen_mikhailov, him_distance):
            d = f(a, b)
            assert -1e-12 <= d <= 1 + 1e-9
            assert d == pytest.approx(f(b, a), abs=1e-9)


def test_quadrature_tolerance_stable(rng):
    for _ in range(20):
        n = int(rng.integers(3, 15))
        a, b = random_graph(rng, n, p=0.3), random_graph(rng, n, p=0.6)
        gamma = auto_gamma(n)
        o1, o2 = laplacian_frequencies(a), laplacian_frequencies(b)
        coarse = _im_from_frequencies(o1, o2, gamma, tol=1e-8)
        fine = _im_from_frequencies(o1, o2, gamma, tol=5e-9)
        assert abs(coarse - fine) < 1e-6


def test_report_fields():
    rep = distance_report(Graph(4), complete(4), weighted=True)
    assert set(rep) == {"hamming", "im", "him", "xi", "gamma", "him_sensitivity", "weighted_hamming"}
    assert rep["xi"] == 1.0
    assert rep["gamma"] == pytest.approx(auto_gamma(4))
    assert set(rep["him_sensitivity"]) == {"0.5", "1.0", "2.0"}
    assert rep["him_sensitivity"]["1.0"] == rep["him"]


def test_config_validation():
    with pytest.raises(ValueError):
        HimConfig(xi=-1)
    with pytest.raises(ValueError):
        HimConfig(gamma=0.0)
    fixed = ipsen_mikhailov(Graph(4), complete(4), HimConfig(gamma=0.5))
    assert 0 < fixed and math.isfinite(fixed)
