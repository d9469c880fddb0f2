import numpy as np
import pytest

from maxdi.graph_core import Graph, Partition


def two_triangles(bridge=True):
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
    if bridge:
        edges.append((2, 3))
    return Graph(6, edges)


def complete(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_graph(rng, n, p=0.5, weighted=True, connected=False):
    """Erdos-Renyi graph; with ``connected`` a random spanning tree is laid first."""
    edges = {}
    if connected:
        order = rng.permutation(n)
        for k in range(1, n):
            a, b = int(order[k]), int(order[rng.integers(0, k)])
            edges[(min(a, b), max(a, b))] = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = 1.0
    if weighted:
        edges = {k: float(rng.uniform(0.1, 3.0)) for k in edges}
    return Graph(n, [(a, b, w) for (a, b), w in edges.items()])


def random_partition(rng, n):
    k = int(rng.integers(1, n + 1))
    labels = rng.integers(0, k, size=n)
    return Partition.from_labels(labels.tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
