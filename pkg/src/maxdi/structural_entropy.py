"""Structural information of graphs and partitions, in bits.

``h1`` is the entropy of the stationary random-walk distribution; ``h2_partition``
is the residual uncertainty when each vertex is encoded through its block.
Their difference, ``decoding_info``, is the quantity the partitioner maximises.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph_core import Graph, GraphError, Partition, block_volumes_and_cuts

MAX_BRUTE_FORCE_N = 12


def f_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"f_entropy is defined on [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x)


def _plogp(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = -x[pos] * np.log2(x[pos])
    return out


def h1(g: Graph) -> float:
    vol = g.volume
    if vol == 0:
        return 0.0
    return float(_plogp(g.degrees / vol).sum())


def h2_partition(g: Graph, p: Partition) -> float:
    """Two-level structural information of ``g`` under partition ``p``.

    Uses the boundary-weighted form: each block contributes its internal
    degree entropy scaled by vol_j/vol(G), plus (g_j/vol_j)·f(vol_j/vol(G)).
    """
    vol_g = g.volume
    if vol_g == 0:
        return 0.0
    vols, cuts = block_volumes_and_cuts(g, p)
    lab = np.asarray(p.block_of)
    deg = g.degrees
    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(vols[lab] > 0, deg / vols[lab], 0.0)
        inner = np.bincount(lab, weights=_plogp(share), minlength=len(p))
        boundary = np.where(vols > 0, cuts / vols, 0.0) * _plogp(vols / vol_g)
    return float(np.sum(vols / vol_g * inner + boundary))


def block_terms(g: Graph, p: Partition) -> np.ndarray:
    """Per-block decoding information ``-(vol_j - g_j)/vol(G) * log2(vol_j/vol(G))``."""
    if g.volume == 0:
        return np.zeros(len(p))
    vols, cuts = block_volumes_and_cuts(g, p)
    # summing the block volumes keeps vol_j / vol(G) exactly 1 for the whole-graph block
    return _di_terms(vols, cuts, float(vols.sum()))


def _di_terms(vols, cuts, vol_g):
    vols = np.asarray(vols, dtype=float)
    inside = np.maximum(vols - np.asarray(cuts, dtype=float), 0.0)
    share = np.minimum(vols / vol_g, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(vols > 0, -inside / vol_g * np.log2(share), 0.0)
    return t + 0.0  # no -0.0


def decoding_info(g: Graph, p: Partition) -> float:
    return float(block_terms(g, p).sum())


def _single_term(vol: float, cut: float, vol_g: float) -> float:
    if vol <= 0:
        return 0.0
    return -(vol - cut) / vol_g * math.log2(vol / vol_g)


def merge_delta_from_stats(
    vol_i: float, cut_i: float, vol_j: float, cut_j: float, w_ij: float, vol_g: float
) -> float:
    """Merge gain from block statistics; ``w_ij`` is the weight joining the blocks."""
    vol_ij = vol_i + vol_j
    cut_ij = cut_i + cut_j - 2.0 * w_ij
    return (
        _single_term(vol_i, cut_i, vol_g)
        + _single_term(vol_j, cut_j, vol_g)
        - _single_term(vol_ij, cut_ij, vol_g)
    )


def merge_delta(g: Graph, p: Partition, i: int, j: int) -> float:
    """Δ = D_i + D_j − D_ij. Merging blocks i and j changes total DI by −Δ."""
    if i == j:
        raise GraphError("merge_delta needs two distinct blocks")
    L = len(p)
    if not (0 <= i < L and 0 <= j < L):
        raise GraphError(f"block index out of range for {L} blocks")
    vol_g = g.volume
    if vol_g == 0:
        return 0.0
    vols, cuts = block_volumes_and_cuts(g, p)
    lab = np.asarray(p.block_of)
    u, v, w = g.edge_arrays()
    lu, lv = lab[u], lab[v]
    joining = ((lu == i) & (lv == j)) | ((lu == j) & (lv == i))
    w_ij = float(w[joining].sum())
    return merge_delta_from_stats(vols[i], cuts[i], vols[j], cuts[j], w_ij, vol_g)


def di_ratio(g: Graph, p: Partition) -> float:
    base = h1(g)
    if base <= 0:
        warnings.warn("h1 is zero; DI-R reported as 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return decoding_info(g, p) / base


@dataclass(frozen=True)
class EntropyReport:
    h1: float
    h2p: float
    di: float
    di_ratio: float
    partition_size: int

    @classmethod
    def evaluate(cls, g: Graph, p: Partition) -> "EntropyReport":
        base = h1(g)
        di = decoding_info(g, p)
        return cls(
            h1=base,
            h2p=h2_partition(g, p),
            di=di,
            di_ratio=di / base if base > 0 else 0.0,
            partition_size=len(p),
        )

    def to_dict(self) -> dict:
        return {"h1": self.h1, "h2p": self.h2p, "di": self.di, "di_r": self.di_ratio, "L": self.partition_size}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --- exhaustive oracle -----------------------------------------------------

def restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of ``n`` items as label arrays, in lexicographic order.

    Row ``r`` assigns item ``k`` to block ``rgs[r, k]``; blocks are numbered by
    first appearance, so each partition appears exactly once.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        # child k of a row with max label m takes label k for k in 0..m+1
        counts = top.astype(np.int64) + 2
        parent = np.repeat(np.arange(len(rows)), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        new_col = offsets.astype(np.int8)
        rows = np.hstack([rows[parent], new_col[:, None]])
        top = np.maximum(top[parent], new_col)
    return rows


def brute_force_optimal_partition(g: Graph, *, chunk: int = 200_000) -> tuple[Partition, float]:
    """Exact maximum-DI partition by enumerating every set partition.

    Ties within 1e-12 resolve to the lexicographically smallest label string.
    """
    n = g.n
    if n > MAX_BRUTE_FORCE_N:
        raise GraphError(f"brute force refused for n={n} > {MAX_BRUTE_FORCE_N}")
    vol_g = g.volume
    if n == 0:
        return Partition([], 0), 0.0
    if vol_g == 0:
        return Partition.singletons(n), 0.0
    all_rgs = restricted_growth_strings(n)
    deg = g.degrees
    u, v, w = g.edge_arrays()
    best_val = -np.inf
    best_row = None
    for start in range(0, len(all_rgs), chunk):
        lab = all_rgs[start:start + chunk].astype(np.int64)
        total = np.zeros(len(lab))
        same = lab[:, u] == lab[:, v]
        for b in range(n):
            in_b = lab == b
            vol = in_b.astype(float) @ deg
            internal = (same & in_b[:, u]).astype(float) @ w
            total += _di_terms(vol, vol - 2 * internal, vol_g)
        top = total.max()
        if top > best_val + 1e-12:
            # rows are in lexicographic order, so the first near-maximal row wins ties
            first = int(np.flatnonzero(total >= top - 1e-12)[0])
            best_val, best_row = float(total[first]), lab[first]
    return Partition.from_labels(best_row.tolist()), best_val
