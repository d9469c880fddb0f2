import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from maxdi.cli import main
from maxdi.graph_core import load_graph
from maxdi.graph_distance import hamming_distance


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.mark.parametrize(
    "flags, n, m",
    [
        (["--kind", "ring-of-cliques", "--cliques", 6, "--size", 5], 30, 66),
        (["--kind", "grid", "--rows", 5, "--cols", 6], 30, 49),
        (["--kind", "ba", "--n", 30, "--m", 1, "--seed", 7], 30, 29),
    ],
)
def test_synth_counts(capsys, tmp_path, flags, n, m):
    res = run_json(capsys, "synth", *flags, "--out", tmp_path)
    assert (res["n"], res["m"]) == (n, m)
    g = load_graph((tmp_path / "graph.csv").read_text())
    assert (g.n, g.m) == (n, m)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["result"] == res
    assert "timings" not in report["manifest"]
    assert "timings" in json.loads((tmp_path / "manifest.json").read_text())


def test_full_pipeline(capsys, tmp_path):
    gt_dir, part_dir = tmp_path / "gt", tmp_path / "part"
    run_json(capsys, "synth", "--kind", "ring-of-cliques", "--out", gt_dir)
    gt = gt_dir / "graph.csv"
    res = run_json(capsys, "partition", "--graph", gt, "--algo", "gdimaop", "--out", part_dir)
    assert res["report"]["di"] == pytest.approx(2.35, abs=0.01)
    assert res["labels"]["k"] == 6
    assert json.loads((part_dir / "labels.json").read_text()) == res["labels"]

    sim = tmp_path / "sim"
    res = run_json(capsys, "simulate", "--graph", gt, "--model", "KIM", "--steps", 400, "--out", sim)
    assert res["steps"] == 400 and "caveat" not in res
    ext = tmp_path / "ext"
    res = run_json(capsys, "extract", "--input", sim / "series.csv", "--kind", "series",
                   "--method", "mle", "--epochs", 50, "--out", ext)
    assert res["resolved"]["threshold"] > 0 and res["resolved"]["alpha"] == 0.1

    dist = run_json(capsys, "distance", "--g1", gt, "--g2", ext / "graph.csv", "--xi", 0)
    expected = hamming_distance(load_graph(gt.read_text()), load_graph((ext / "graph.csv").read_text()))
    assert dist["him"] == expected == dist["hamming"]
    assert dist["gamma"] > 0


def test_simulate_reports_caveat(capsys, tmp_path):
    run_json(capsys, "synth", "--kind", "grid", "--rows", 2, "--cols", 3, "--out", tmp_path)
    res = run_json(capsys, "simulate", "--graph", tmp_path / "graph.csv", "--model", "BM", "--steps", 20)
    assert "reconstructed" in res["caveat"]


def test_evaluate_singletons(capsys, tmp_path):
    run_json(capsys, "synth", "--kind", "ring-of-cliques", "--cliques", 3, "--size", 3, "--out", tmp_path)
    labels = tmp_path / "pk.json"
    labels.write_text(json.dumps({"labels": [-1] * 9}))
    res = run_json(capsys, "evaluate", "--graph", tmp_path / "graph.csv", "--labels", labels)
    assert res["di_r"] == 0.0 and res["di"] == 0.0 and res["L"] == 9


def test_partition_with_pk(capsys, tmp_path):
    run_json(capsys, "synth", "--kind", "ring-of-cliques", "--cliques", 4, "--size", 4, "--out", tmp_path)
    pk = tmp_path / "pk.json"
    pk.write_text(json.dumps({"labels": [v // 4 for v in range(16)]}))
    res = run_json(capsys, "partition", "--graph", tmp_path / "graph.csv", "--algo", "pk-gdimaop", "--pk", pk)
    assert res["merges"] == 0 and res["labels"]["k"] == 4


def blob_csv(path, seed=0):
    rng = np.random.default_rng(seed)
    pts = np.vstack([rng.normal(0, 0.5, (6, 2)), rng.normal(0, 0.5, (6, 2)) + 40])
    path.write_text("".join(f"{float(x)!r},{float(y)!r}\n" for x, y in pts))
    return path


def test_cluster_with_baseline(capsys, tmp_path):
    from maxdi.baselines import BaselineConfig, labels_to_pk, minibatch_kmeans
    from maxdi.extraction import ExtractionConfig, extract
    from maxdi.gdimaop import map_to_labels, pk_gdimaop

    pts = blob_csv(tmp_path / "pts.csv")
    res = run_json(capsys, "cluster", "--input", pts, "--metric", "k-nn", "--k", 3,
                   "--baseline", "kmeans", "--pk-k", 4, "--out", tmp_path / "c")
    assert res["resolved"]["k_neighbors"] == 3
    assert (tmp_path / "c" / "graph.csv").exists()
    assert 0 <= res["report"]["di_r"] < 1

    data = np.loadtxt(pts, delimiter=",")
    g, _ = extract(data, ExtractionConfig(metric="knn", k_neighbors=3))
    pk = labels_to_pk(minibatch_kmeans(data, BaselineConfig(k=4)))
    assert res["labels"] == map_to_labels(pk_gdimaop(g, pk)).to_dict()
    for block in pk.to_partition():
        assert len({res["labels"]["labels"][v] for v in block}) == 1


def test_failure_exit_code_and_rollback(capsys, tmp_path):
    pts = blob_csv(tmp_path / "pts.csv")
    out = tmp_path / "fail"
    code, _, err = run(capsys, "cluster", "--input", pts, "--metric", "k-nn", "--k", 50, "--out", out)
    assert code == 1
    assert err.startswith("error [extract]:")
    assert not out.exists()

    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,x\n")
    code, _, err = run(capsys, "partition", "--graph", bad)
    assert code == 1 and "error [load]" in err and "line 2" in err


def test_failure_keeps_unrelated_files(capsys, tmp_path):
    (tmp_path / "keep.txt").write_text("x")
    code, _, _ = run(capsys, "evaluate", "--graph", tmp_path / "missing.csv",
                     "--labels", tmp_path / "none.json", "--out", tmp_path)
    assert code == 1
    assert sorted(p.name for p in tmp_path.iterdir()) == ["keep.txt"]


def write_config(path, graphs, metrics, seeds=(0,), steps=300):
    path.write_text(json.dumps({
        "graphs": graphs, "models": ["KIM"], "metrics": metrics,
        "seeds": list(seeds), "steps": steps, "extraction": {"epochs": 30},
    }))
    return path


SWEEP_GRAPHS = [
    {"kind": "ring-of-cliques", "cliques": 3, "size": 4},
    {"kind": "grid", "rows": 3, "cols": 4},
    {"kind": "ba", "n": 12, "m": 1, "seed": 1},
]


def test_experiment_table(capsys, tmp_path):
    cfg = write_config(tmp_path / "cfg.json", SWEEP_GRAPHS, ["eps-ne", "k-nn", "p-cor"])
    code, out, err = run(capsys, "experiment", "--config", cfg, "--out", tmp_path / "a")
    assert code == 0, err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    assert all(r["error"] == "" for r in rows)
    assert all(0 <= float(r["him"]) <= 1 and float(r["di"]) >= 0 for r in rows)
    assert (tmp_path / "a" / "results.csv").read_text() == out

    code, out2, _ = run(capsys, "experiment", "--config", cfg, "--out", tmp_path / "b", "--workers", 2)
    # the worker count changes the recorded command line, never the results
    assert out2 == out
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
    reports = [json.loads((tmp_path / d / "report.json").read_text()) for d in "ab"]
    assert reports[0]["result"] == reports[1]["result"]


def test_experiment_empty_and_failing_cells(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "--config", write_config(tmp_path / "e.json", [], ["k-nn"]))
    assert code == 0
    assert out.strip().split(",")[0] == "graph" and len(out.strip().splitlines()) == 1

    cfg = write_config(tmp_path / "f.json", SWEEP_GRAPHS[:1], ["k-nn", "no-such-metric"])
    code, out, _ = run(capsys, "experiment", "--config", cfg)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert rows[0]["error"] == "" and "no-such-metric" in rows[1]["error"]


def test_reports_byte_identical_across_runs(capsys, tmp_path):
    pts = blob_csv(tmp_path / "pts.csv")
    for name in ("a", "b"):
        run_json(capsys, "cluster", "--input", pts, "--metric", "gaus", "--out", tmp_path / name)
    for name in ("report.json", "labels.json", "graph.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "maxdi.cli", "synth", "--kind", "grid"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["m"] == 49
