"""Baseline clusterers and prior-knowledge sources.

Mini-batch k-means and DBSCAN come from scikit-learn; their labels are
normalised so the same clustering always produces the same label vector.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from sklearn.cluster import DBSCAN, MiniBatchKMeans

from .gdimaop import UNASSIGNED, ClusterLabels, PriorKnowledge
from .graph_core import GraphError


class PKParseError(GraphError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    algo: str = "kmeans"
    k: int = 2
    batch: int = 1024
    iters: int = 100
    eps: float = 0.5
    min_pts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.algo not in ("kmeans", "dbscan"):
            raise ValueError(f"unknown baseline {self.algo!r}")
        if self.algo == "kmeans" and (self.k < 1 or self.batch < 1 or self.iters < 1):
            raise ValueError("kmeans needs k, batch and iters >= 1")
        if self.algo == "dbscan" and (self.eps <= 0 or self.min_pts < 1):
            raise ValueError("dbscan needs eps > 0 and min_pts >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def _relabel_by_first_appearance(labels, keep=()) -> list[int]:
    mapping: dict[int, int] = {}
    out = []
    for x in labels:
        x = int(x)
        if x in keep:
            out.append(x)
            continue
        if x not in mapping:
            mapping[x] = len(mapping)
        out.append(mapping[x])
    return out


def minibatch_kmeans(points, cfg: BaselineConfig) -> ClusterLabels:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if cfg.k > len(x):
        raise GraphError(f"k={cfg.k} exceeds the number of points ({len(x)})")
    model = MiniBatchKMeans(
        n_clusters=cfg.k,
        batch_size=cfg.batch,
        max_iter=cfg.iters,
        init="k-means++",
        n_init=1,
        random_state=cfg.seed,
        # plain mini-batch Lloyd updates; random centre reassignment would break n == k
        reassignment_ratio=0.0,
    )
    return ClusterLabels(tuple(_relabel_by_first_appearance(model.fit_predict(x))))


def dbscan(points, cfg: BaselineConfig) -> PriorKnowledge:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    labels = DBSCAN(eps=cfg.eps, min_samples=cfg.min_pts).fit_predict(x)
    return PriorKnowledge(_relabel_by_first_appearance(labels, keep=(UNASSIGNED,)))


def labels_to_pk(labels: ClusterLabels) -> PriorKnowledge:
    return PriorKnowledge(labels.labels)


def parse_pk(text: str, n: int | None = None) -> PriorKnowledge:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PKParseError(f"prior-knowledge file is not JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("labels"), list):
        raise PKParseError('prior-knowledge JSON must look like {"labels": [...]}')
    raw = payload["labels"]
    for x in raw:
        if isinstance(x, bool) or not isinstance(x, int):
            raise PKParseError(f"non-integer prior-knowledge label {x!r}")
    if n is not None and len(raw) != n:
        raise PKParseError(f"prior knowledge has {len(raw)} labels, expected {n}")
    try:
        return PriorKnowledge(raw)
    except GraphError as exc:
        raise PKParseError(str(exc)) from exc


def load_pk(path: str | Path, n: int | None = None) -> PriorKnowledge:
    return parse_pk(Path(path).read_text(encoding="utf-8"), n)
