"""Synthetic ground-truth graphs and the spin dynamics run on them.

All simulators return a spin :class:`TimeSeriesMatrix` (``n x T``, entries
±1) and are deterministic for a given seed.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .extraction import TimeSeriesMatrix
from .graph_core import Graph, GraphError

DEFAULT_STEPS = 2001
BM_SPONTANEOUS = 0.01

# BM and IGM follow their usual textbook forms; reports carry this note.
MODEL_CAVEATS = {
    "BM": "branching-model dynamics reconstructed from the standard cascade form; magnitudes are indicative",
    "IGM": "Glauber dynamics reconstructed from the standard form; magnitudes are indicative",
}


def gen_ring_of_cliques(cliques: int, size: int) -> Graph:
    """``cliques`` copies of K_size, clique i's vertex 1 wired to clique i+1's vertex 0."""
    if cliques < 3 or size < 2:
        raise GraphError("ring of cliques needs at least 3 cliques of size >= 2")
    edges = []
    for c in range(cliques):
        base = c * size
        edges += [(base + a, base + b) for a in range(size) for b in range(a + 1, size)]
        edges.append((base + 1, ((c + 1) % cliques) * size))
    return Graph(cliques * size, edges)


def gen_grid(rows: int, cols: int) -> Graph:
    if rows < 2 or cols < 2:
        raise GraphError("grid needs at least 2 rows and 2 columns")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def gen_barabasi_albert(n: int, m_attach: int, seed: int) -> Graph:
    """Preferential attachment grown from a complete seed graph on ``m_attach`` vertices.

    Each new vertex links to ``m_attach`` distinct existing vertices chosen with
    probability proportional to degree (uniformly while all degrees are zero),
    so ``m_attach=1`` yields a tree with ``n-1`` edges.
    """
    if not 1 <= m_attach < n:
        raise GraphError("need 1 <= m_attach < n")
    rng = np.random.default_rng(seed)
    edges = [(a, b) for a in range(m_attach) for b in range(a + 1, m_attach)]
    deg = np.zeros(n)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    for new in range(m_attach, n):
        weights = deg[:new]
        probs = weights / weights.sum() if weights.sum() > 0 else np.full(new, 1.0 / new)
        targets = rng.choice(new, size=m_attach, replace=False, p=probs)
        for t in sorted(int(x) for x in targets):
            edges.append((t, new))
            deg[t] += 1
            deg[new] += 1
    return Graph(n, edges)


@dataclass(frozen=True)
class DynamicsConfig:
    model: str = "KIM"
    steps: int = DEFAULT_STEPS
    seed: int = 0
    beta: float = 1.0
    p_spread: float = 0.3
    coupling: float = 1.0

    def __post_init__(self):
        model = self.model.upper()
        if model not in ("KIM", "BM", "IGM"):
            raise ValueError(f"unknown dynamics model {self.model!r}")
        object.__setattr__(self, "model", model)
        if self.steps < 2:
            raise ValueError("need at least 2 time steps")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not 0.0 <= self.p_spread <= 1.0:
            raise ValueError("p_spread must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


def _coupling_matrix(g: Graph, coupling: float) -> np.ndarray:
    return coupling * g.to_dense()


def simulate_kim(g: Graph, cfg: DynamicsConfig) -> TimeSeriesMatrix:
    """Synchronous kinetic Ising: P(s_i(t+1)=+1) = 1 / (1 + exp(-2 H_i(t)))."""
    rng = np.random.default_rng(cfg.seed)
    W = _coupling_matrix(g, cfg.coupling)
    s = np.empty((g.n, cfg.steps))
    s[:, 0] = rng.choice([-1.0, 1.0], size=g.n)
    for t in range(1, cfg.steps):
        H = W @ s[:, t - 1]
        p_up = 0.5 * (1.0 + np.tanh(H))
        s[:, t] = np.where(rng.random(g.n) < p_up, 1.0, -1.0)
    return TimeSeriesMatrix(s, "spin")


def simulate_igm(g: Graph, cfg: DynamicsConfig) -> TimeSeriesMatrix:
    """Asynchronous Glauber dynamics, one sweep (n single-spin updates) per record."""
    rng = np.random.default_rng(cfg.seed)
    adj = g._adjacency_lists()
    n = g.n
    state = rng.choice([-1.0, 1.0], size=n)
    out = np.empty((n, cfg.steps))
    out[:, 0] = state
    for t in range(1, cfg.steps):
        picks = rng.integers(0, n, size=n)
        draws = rng.random(n)
        for i, u in zip(picks, draws):
            h = cfg.coupling * sum(w * state[j] for j, w in adj[i].items())
            if u < glauber_flip_probability(state[i], h, cfg.beta):
                state[i] = -state[i]
        out[:, t] = state
    return TimeSeriesMatrix(out, "spin")


def glauber_flip_probability(spin: float, field: float, beta: float) -> float:
    x = 2.0 * beta * spin * field
    # 1 / (1 + e^x) without overflow
    return float(0.5 * (1.0 - np.tanh(x / 2.0)))


def simulate_bm(g: Graph, cfg: DynamicsConfig) -> TimeSeriesMatrix:
    """Branching cascade: each active vertex activates each neighbour with ``p_spread``.

    Activity lasts one step; inactive vertices also switch on spontaneously with
    probability 0.01. Active is encoded +1, inactive -1.
    """
    rng = np.random.default_rng(cfg.seed)
    A = g.to_dense() > 0
    n = g.n
    active = rng.random(n) < 0.5
    out = np.empty((n, cfg.steps))
    out[:, 0] = np.where(active, 1.0, -1.0)
    for t in range(1, cfg.steps):
        # one Bernoulli trial per (active source, neighbour) edge
        trials = (rng.random((n, n)) < cfg.p_spread) & A & active[:, None]
        nxt = trials.any(axis=0) | (rng.random(n) < BM_SPONTANEOUS)
        active = nxt
        out[:, t] = np.where(active, 1.0, -1.0)
    return TimeSeriesMatrix(out, "spin")


SIMULATORS = {"KIM": simulate_kim, "IGM": simulate_igm, "BM": simulate_bm}


def simulate(g: Graph, cfg: DynamicsConfig) -> TimeSeriesMatrix:
    return SIMULATORS[cfg.model](g, cfg)
