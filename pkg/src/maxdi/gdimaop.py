"""Greedy decoding-information maximisation and the end-to-end clustering driver.

The partitioner starts from singletons (or from prior-knowledge blocks) and
repeatedly merges the pair of edge-adjacent blocks whose merge raises DI the
most, stopping once no merge raises it by more than ``MERGE_TOL``.  Merging
two blocks with no edge between them never helps, so only adjacent pairs are
kept in the heap.
"""
from __future__ import annotations

import heapq
import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .graph_core import Graph, GraphError, Partition
from .structural_entropy import EntropyReport, _single_term, merge_delta_from_stats

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-12
UNASSIGNED = -1


@dataclass(frozen=True)
class PriorKnowledge:
    """Initial cluster ids per vertex; ``UNASSIGNED`` (-1) vertices start alone."""

    labels: tuple[int, ...]

    def __init__(self, labels: Sequence[int]):
        out = []
        for x in labels:
            if isinstance(x, bool) or int(x) != x:
                raise GraphError(f"prior-knowledge label {x!r} is not an integer")
            x = int(x)
            if x < UNASSIGNED:
                raise GraphError(f"prior-knowledge label {x} is negative")
            out.append(x)
        object.__setattr__(self, "labels", tuple(out))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return len({x for x in self.labels if x != UNASSIGNED})

    def to_partition(self) -> Partition:
        groups: dict[int, list[int]] = {}
        blocks = []
        for v, lab in enumerate(self.labels):
            if lab == UNASSIGNED:
                blocks.append([v])
            else:
                groups.setdefault(lab, []).append(v)
        return Partition(blocks + list(groups.values()), len(self.labels))

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels)})


@dataclass(frozen=True)
class ClusterLabels:
    labels: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(set(self.labels))

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "k": self.k}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class MergeResult:
    partition: Partition
    merges: int
    di_trace: list[float] = field(default_factory=list)
    delta_trace: list[float] = field(default_factory=list)


def greedy_merge(g: Graph, initial: Partition) -> MergeResult:
    """Run the agglomerative loop from ``initial`` and record the DI after every merge."""
    if initial.n != g.n:
        raise GraphError(f"initial partition covers {initial.n} vertices, graph has {g.n}")
    vol_g = g.volume
    if vol_g == 0:
        warnings.warn("graph has no edges; returning the initial partition", RuntimeWarning, stacklevel=2)
        return MergeResult(initial, 0, [0.0])

    deg = g.degrees
    members: dict[int, list[int]] = {}
    vol: dict[int, float] = {}
    cut: dict[int, float] = {}
    first: dict[int, int] = {}
    for bid, block in enumerate(initial.blocks):
        members[bid] = list(block)
        vol[bid] = float(sum(deg[v] for v in block))
        first[bid] = block[0]
    block_of = list(initial.block_of)

    # link[a][b]: total edge weight joining blocks a and b
    link: dict[int, dict[int, float]] = {b: {} for b in members}
    internal = dict.fromkeys(members, 0.0)
    for a, b, w in g.edges():
        ba, bb = block_of[a], block_of[b]
        if ba == bb:
            internal[ba] += w
        else:
            link[ba][bb] = link[ba].get(bb, 0.0) + w
            link[bb][ba] = link[bb].get(ba, 0.0) + w
    for bid in members:
        cut[bid] = vol[bid] - 2.0 * internal[bid]

    def delta(a: int, b: int) -> float:
        return merge_delta_from_stats(vol[a], cut[a], vol[b], cut[b], link[a][b], vol_g)

    def push(a: int, b: int) -> None:
        d = delta(a, b)
        if d < -MERGE_TOL:
            fa, fb = first[a], first[b]
            if fa > fb:
                fa, fb = fb, fa
            # rounding lets exactly-symmetric pairs tie on floating noise
            heapq.heappush(heap, (round(d, 12), fa, fb, d, a, b))

    heap: list = []
    for a in link:
        for b in link[a]:
            if a < b:
                push(a, b)

    di = sum(_single_term(vol[b], cut[b], vol_g) for b in members)
    result = MergeResult(initial, 0, [di])
    next_id = len(members)
    while heap:
        _, _, _, d, a, b = heapq.heappop(heap)
        if a not in members or b not in members:
            continue
        c = next_id
        next_id += 1
        w_ab = link[a][b]
        members[c] = members.pop(a) + members.pop(b)
        vol[c] = vol.pop(a) + vol.pop(b)
        cut[c] = cut.pop(a) + cut.pop(b) - 2.0 * w_ab
        first[c] = min(first.pop(a), first.pop(b))
        merged: dict[int, float] = {}
        for old in (a, b):
            for nb, w in link.pop(old).items():
                if nb in (a, b):
                    continue
                merged[nb] = merged.get(nb, 0.0) + w
                del link[nb][old]
        link[c] = merged
        for nb, w in merged.items():
            link[nb][c] = w
            push(c, nb)
        di -= d
        result.merges += 1
        result.di_trace.append(di)
        result.delta_trace.append(d)
        logger.debug("merge %d: delta=%.6g di=%.6g blocks=%d", result.merges, d, di, len(members))

    result.partition = Partition(members.values(), g.n)
    return result


def gdimaop(g: Graph) -> Partition:
    return greedy_merge(g, Partition.singletons(g.n)).partition


def pk_gdimaop(g: Graph, pk: PriorKnowledge) -> Partition:
    if len(pk) != g.n:
        raise GraphError(f"prior knowledge has {len(pk)} labels, graph has {g.n} vertices")
    return greedy_merge(g, pk.to_partition()).partition


def map_to_labels(p: Partition) -> ClusterLabels:
    # Partition keeps blocks ordered by smallest member
    return ClusterLabels(tuple(p.block_of))


class StageError(RuntimeError):
    """A pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


def cmdi(data, config, pk: PriorKnowledge | None = None):
    """Extract a graph from ``data``, partition it, and label every point.

    ``config`` is an :class:`~maxdi.extraction.ExtractionConfig`; ``data`` is an
    ``n x d`` point array or a :class:`~maxdi.extraction.TimeSeriesMatrix`.
    Returns ``(ClusterLabels, EntropyReport)``.
    """
    from .extraction import extract

    try:
        g, _ = extract(data, config)
    except Exception as exc:
        raise StageError("extract", exc) from exc
    try:
        part = gdimaop(g) if pk is None else pk_gdimaop(g, pk)
    except Exception as exc:
        raise StageError("partition", exc) from exc
    return map_to_labels(part), EntropyReport.evaluate(g, part)
