"""Weighted undirected graphs, vertex partitions, and edge-list I/O.

Everything downstream works on weighted degrees: for an unweighted graph
(all weights 1) the weighted degree is the ordinary degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse


class GraphError(ValueError):
    """Invalid graph, vertex id, or partition."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        self.line = line
        self.reason = reason
        super().__init__(f"line {lineno}: {reason}: {line!r}")


class Graph:
    """Immutable undirected weighted graph on vertices ``0..n-1``.

    Each unordered pair is stored once with ``u < v``. ``labels`` maps the
    dense ids back to the ids seen on input (identity by default).
    """

    __slots__ = ("_n", "_u", "_v", "_w", "_deg", "_adj", "_labels")

    def __init__(self, n: int, edges: Iterable[tuple] = (), labels: Sequence[int] | None = None):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        seen: dict[tuple[int, int], float] = {}
        for e in edges:
            if len(e) == 2:
                a, b = e
                w = 1.0
            else:
                a, b, w = e
            a, b, w = int(a), int(b), float(w)
            if a == b:
                raise GraphError(f"self-loop on vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge ({a}, {b}) out of range for n={n}")
            if not w > 0 or not np.isfinite(w):
                raise GraphError(f"edge ({a}, {b}) has non-positive weight {w}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen[key] = w
        keys = sorted(seen)
        self._n = n
        self._u = np.array([k[0] for k in keys], dtype=np.int64)
        self._v = np.array([k[1] for k in keys], dtype=np.int64)
        self._w = np.array([seen[k] for k in keys], dtype=float)
        deg = np.zeros(n)
        np.add.at(deg, self._u, self._w)
        np.add.at(deg, self._v, self._w)
        self._deg = deg
        self._deg.flags.writeable = False
        self._adj = None
        if labels is None:
            self._labels = tuple(range(n))
        else:
            if len(labels) != n:
                raise GraphError("labels must have one entry per vertex")
            self._labels = tuple(int(x) for x in labels)

    @classmethod
    def from_adjacency(cls, a, labels=None) -> "Graph":
        """Build from a symmetric matrix; nonzero upper-triangle entries become edges."""
        if sparse.issparse(a):
            a = sparse.triu(a, k=1).tocoo()
            edges = zip(a.row, a.col, a.data)
            return cls(a.shape[0], [(i, j, w) for i, j, w in edges if w != 0], labels)
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("adjacency must be square")
        if not np.allclose(a, a.T, atol=1e-9, rtol=0):
            raise GraphError("adjacency must be symmetric")
        iu, ju = np.nonzero(np.triu(a, k=1))
        return cls(a.shape[0], zip(iu, ju, a[iu, ju]), labels)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._w)

    @property
    def labels(self) -> tuple[int, ...]:
        return self._labels

    @property
    def degrees(self) -> np.ndarray:
        return self._deg

    @property
    def volume(self) -> float:
        return float(self._deg.sum())

    @property
    def total_weight(self) -> float:
        return float(self._w.sum())

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self._u.tolist(), self._v.tolist(), self._w.tolist()))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._u, self._v, self._w

    def neighbors(self, v: int) -> dict[int, float]:
        self._check_vertex(v)
        return self._adjacency_lists()[v]

    def _adjacency_lists(self) -> list[dict[int, float]]:
        if self._adj is None:
            adj: list[dict[int, float]] = [{} for _ in range(self._n)]
            for a, b, w in self.edges():
                adj[a][b] = w
                adj[b][a] = w
            self._adj = adj
        return self._adj

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self._n, self._n))
        a[self._u, self._v] = self._w
        a[self._v, self._u] = self._w
        return a

    def to_sparse(self) -> sparse.csr_matrix:
        rows = np.concatenate([self._u, self._v])
        cols = np.concatenate([self._v, self._u])
        data = np.concatenate([self._w, self._w])
        return sparse.csr_matrix((data, (rows, cols)), shape=(self._n, self._n))

    def binarized(self) -> "Graph":
        return Graph(self._n, zip(self._u, self._v), self._labels)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self._n:
            raise GraphError(f"vertex {v} out of range for n={self._n}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._n == other._n
            and np.array_equal(self._u, other._u)
            and np.array_equal(self._v, other._v)
            and np.array_equal(self._w, other._w)
        )

    def __hash__(self):
        return hash((self._n, self._u.tobytes(), self._v.tobytes(), self._w.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


@dataclass(frozen=True)
class Partition:
    """Disjoint, non-empty blocks covering ``0..n-1``.

    Blocks are stored as sorted tuples, ordered by their smallest member.
    """

    blocks: tuple[tuple[int, ...], ...]
    block_of: tuple[int, ...] = field(repr=False)

    def __init__(self, blocks: Iterable[Iterable[int]], n: int | None = None):
        cleaned = [tuple(sorted(int(v) for v in b)) for b in blocks]
        if any(len(b) == 0 for b in cleaned):
            raise GraphError("partition blocks must be non-empty")
        cleaned.sort(key=lambda b: b[0])
        members = [v for b in cleaned for v in b]
        size = len(members) if n is None else n
        if sorted(members) != list(range(size)):
            raise GraphError("blocks must be disjoint and cover every vertex exactly once")
        block_of = [0] * size
        for j, b in enumerate(cleaned):
            for v in b:
                block_of[v] = j
        object.__setattr__(self, "blocks", tuple(cleaned))
        object.__setattr__(self, "block_of", tuple(block_of))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls([[v] for v in range(n)], n)

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls([range(n)], n)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        return cls(groups.values(), len(labels))

    @property
    def n(self) -> int:
        return len(self.block_of)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def weighted_degree(g: Graph, v: int) -> float:
    g._check_vertex(v)
    return float(g.degrees[v])


def block_volume_and_cut(g: Graph, block: Iterable[int]) -> tuple[float, float]:
    """Return ``(vol, cut)`` for a vertex set.

    ``vol`` sums weighted degrees over the block; ``cut`` is the total weight
    of edges with exactly one endpoint inside it.
    """
    members = np.fromiter((int(v) for v in block), dtype=np.int64)
    if members.size == 0:
        raise GraphError("block must be non-empty")
    if members.min() < 0 or members.max() >= g.n:
        raise GraphError("block contains a vertex outside the graph")
    inside = np.zeros(g.n, dtype=bool)
    inside[members] = True
    u, v, w = g.edge_arrays()
    crossing = inside[u] != inside[v]
    vol = float(g.degrees[inside].sum())
    return vol, float(w[crossing].sum())


def block_volumes_and_cuts(g: Graph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``block_volume_and_cut`` for every block of ``p``."""
    if p.n != g.n:
        raise GraphError(f"partition covers {p.n} vertices, graph has {g.n}")
    lab = np.asarray(p.block_of, dtype=np.int64)
    L = len(p)
    vol = np.bincount(lab, weights=g.degrees, minlength=L)
    u, v, w = g.edge_arrays()
    internal = np.bincount(lab[u], weights=np.where(lab[u] == lab[v], w, 0.0), minlength=L)
    return vol, vol - 2.0 * internal


# --- edge-list text -------------------------------------------------------

def _parse_header(line: str) -> int | None:
    body = line.lstrip("#").strip()
    if body.startswith("n="):
        try:
            return int(body[2:])
        except ValueError:
            return None
    return None


def load_graph(source: str) -> Graph:
    """Parse ``u,v[,w]`` lines into a :class:`Graph`.

    A ``# n=<count>`` comment fixes the vertex count and keeps ids as given
    (so isolated vertices survive a round trip). Without it, the distinct ids
    are remapped to ``0..n-1`` in increasing order and kept in ``labels``.
    """
    declared_n = None
    raw: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            hn = _parse_header(stripped)
            if hn is not None:
                declared_n = hn
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) not in (2, 3):
            raise EdgeListParseError(lineno, line, "expected 'u,v' or 'u,v,w'")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, line, "vertex ids must be integers") from None
        try:
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise EdgeListParseError(lineno, line, "weight is not a number") from None
        if a < 0 or b < 0:
            raise EdgeListParseError(lineno, line, "negative vertex id")
        if a == b:
            raise EdgeListParseError(lineno, line, "self-loop")
        if not (w > 0 and np.isfinite(w)):
            raise EdgeListParseError(lineno, line, "weight must be positive")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise EdgeListParseError(lineno, line, "duplicate edge")
        seen.add(key)
        raw.append((a, b, w))

    if declared_n is not None:
        for a, b, _ in raw:
            if max(a, b) >= declared_n:
                raise GraphError(f"edge ({a}, {b}) exceeds declared n={declared_n}")
        return Graph(declared_n, raw)
    ids = sorted({x for a, b, _ in raw for x in (a, b)})
    index = {x: i for i, x in enumerate(ids)}
    return Graph(len(ids), [(index[a], index[b], w) for a, b, w in raw], labels=ids)


def save_graph(g: Graph) -> str:
    """Canonical edge-list text: ``u<v`` sorted lines, original labels."""
    lab = g.labels
    dense = lab == tuple(range(g.n))
    lines = [f"# n={g.n}"] if dense else []
    rows = sorted(
        (min(lab[a], lab[b]), max(lab[a], lab[b]), w) for a, b, w in g.edges()
    )
    for a, b, w in rows:
        lines.append(f"{a},{b},{w!r}")
    return "\n".join(lines) + "\n"


def canonicalize_edge_list(source: str) -> str:
    """Canonical form of edge-list text, without going through :class:`Graph`."""
    declared_n = None
    rows = []
    for line in source.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            hn = _parse_header(s)
            if hn is not None:
                declared_n = hn
            continue
        parts = [p.strip() for p in s.split(",")]
        a, b = int(parts[0]), int(parts[1])
        w = float(parts[2]) if len(parts) == 3 else 1.0
        rows.append((min(a, b), max(a, b), w))
    rows.sort()
    ids = sorted({x for a, b, _ in rows for x in (a, b)})
    header = []
    if declared_n is not None:
        header = [f"# n={declared_n}"]
    elif ids == list(range(len(ids))):
        header = [f"# n={len(ids)}"]
    return "\n".join(header + [f"{a},{b},{w!r}" for a, b, w in rows]) + "\n"
