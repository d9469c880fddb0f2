import json

import numpy as np
import pytest

from maxdi.baselines import (
    BaselineConfig,
    PKParseError,
    dbscan,
    labels_to_pk,
    load_pk,
    minibatch_kmeans,
    parse_pk,
)
from maxdi.extraction import ExtractionConfig, extract
from maxdi.gdimaop import UNASSIGNED, PriorKnowledge, pk_gdimaop
from maxdi.graph_core import GraphError


def blobs(rng, size=20, gap=50.0):
    return np.vstack([rng.normal(0, 0.5, (size, 2)), rng.normal(0, 0.5, (size, 2)) + gap])


def test_kmeans_separates_blobs(rng):
    labels = minibatch_kmeans(blobs(rng), BaselineConfig(k=2))
    assert labels.labels == (0,) * 20 + (1,) * 20


def test_kmeans_single_cluster(rng):
    assert set(minibatch_kmeans(blobs(rng), BaselineConfig(k=1)).labels) == {0}


def test_kmeans_one_point_per_cluster(rng):
    pts = rng.normal(size=(6, 2))
    assert minibatch_kmeans(pts, BaselineConfig(k=6)).k == 6


def test_kmeans_too_many_clusters(rng):
    with pytest.raises(GraphError):
        minibatch_kmeans(rng.normal(size=(3, 2)), BaselineConfig(k=4))


def test_kmeans_deterministic(rng):
    pts = rng.normal(size=(100, 3))
    cfg = BaselineConfig(k=5, batch=16, seed=9)
    assert minibatch_kmeans(pts, cfg) == minibatch_kmeans(pts, cfg)


def test_dbscan_noise_point(rng):
    pts = np.vstack([blobs(rng, size=10), [[500.0, -500.0]]])
    pk = dbscan(pts, BaselineConfig(algo="dbscan", eps=3.0, min_pts=3))
    assert pk.n_clusters == 2
    assert pk.labels[-1] == UNASSIGNED
    assert pk.labels[:-1] == (0,) * 10 + (1,) * 10


def test_dbscan_extremes(rng):
    pts = blobs(rng, size=5)
    assert set(dbscan(pts, BaselineConfig(algo="dbscan", eps=1e9, min_pts=1)).labels) == {0}
    assert set(dbscan(pts, BaselineConfig(algo="dbscan", eps=1.0, min_pts=11)).labels) == {UNASSIGNED}


def test_dbscan_deterministic(rng):
    pts = rng.normal(size=(60, 2))
    cfg = BaselineConfig(algo="dbscan", eps=0.4, min_pts=3)
    assert dbscan(pts, cfg) == dbscan(pts, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(algo="spectral")
    with pytest.raises(ValueError):
        BaselineConfig(k=0)
    with pytest.raises(ValueError):
        BaselineConfig(algo="dbscan", eps=0)


def test_parse_pk_examples():
    assert parse_pk('{"labels":[0,0,1]}').n_clusters == 2
    assert parse_pk('{"labels":[-1,-1]}').labels == (UNASSIGNED, UNASSIGNED)
    with pytest.raises(PKParseError, match="expected 3"):
        parse_pk('{"labels":[0]}', n=3)
    with pytest.raises(PKParseError):
        parse_pk('{"labels":[0, 1.5]}')
    with pytest.raises(PKParseError):
        parse_pk('{"labels":[true]}')
    with pytest.raises(PKParseError):
        parse_pk('{"labels":[-3]}')
    with pytest.raises(PKParseError):
        parse_pk("[0, 1]")
    with pytest.raises(PKParseError):
        parse_pk("not json")


def test_load_pk_round_trip(tmp_path):
    pk = PriorKnowledge([0, -1, 2, 2])
    path = tmp_path / "pk.json"
    path.write_text(pk.to_json())
    assert load_pk(path, n=4) == pk


def test_relabeling_dbscan_clusters_does_not_change_result(rng):
    pts = np.vstack([blobs(rng, size=8), [[500.0, -500.0]]])
    g, _ = extract(pts, ExtractionConfig(metric="knn", k_neighbors=3))
    pk = dbscan(pts, BaselineConfig(algo="dbscan", eps=3.0, min_pts=3))
    swapped = PriorKnowledge([{0: 1, 1: 0}.get(x, x) for x in pk.labels])
    assert pk_gdimaop(g, pk) == pk_gdimaop(g, swapped)


def test_kmeans_as_prior_knowledge(rng):
    pts = blobs(rng, size=8)
    g, _ = extract(pts, ExtractionConfig(metric="knn", k_neighbors=3))
    pk = labels_to_pk(minibatch_kmeans(pts, BaselineConfig(k=4)))
    p = pk_gdimaop(g, pk)
    # prior blocks are never split
    for block in pk.to_partition():
        assert len({p.block_of[v] for v in block}) == 1
    assert json.loads(pk.to_json())["labels"] == list(pk.labels)
