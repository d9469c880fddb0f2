"""Command-line front end: ``maxdi <subcommand> ...``.

Every subcommand that takes ``--out DIR`` writes its artifacts there together
with ``manifest.json``; reports embed the manifest minus timings so reruns
can be diffed byte-for-byte.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import harness
from .baselines import BaselineConfig, dbscan, labels_to_pk, load_pk, minibatch_kmeans
from .dynamics import DEFAULT_STEPS, MODEL_CAVEATS, DynamicsConfig, simulate
from .extraction import ExtractionConfig, extract
from .gdimaop import PriorKnowledge, greedy_merge, map_to_labels
from .graph_core import Graph, Partition, load_graph, save_graph
from .graph_distance import AUTO, HimConfig, distance_report
from .structural_entropy import EntropyReport

logger = logging.getLogger("maxdi")


class StageFailure(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(message)


class Outputs:
    """Collects files for one run; removes whatever was written if the run fails."""

    def __init__(self, out: str | None):
        self.dir = Path(out) if out else None
        self.written: list[Path] = []
        self._created_dir = False

    def write(self, name: str, text: str) -> Path | None:
        if self.dir is None:
            return None
        if not self.dir.exists():
            self.dir.mkdir(parents=True)
            self._created_dir = True
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        return path

    def rollback(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
        if self._created_dir and self.dir is not None and not any(self.dir.iterdir()):
            self.dir.rmdir()


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(name, f"{type(exc).__name__}: {exc}") from exc


def _command(argv: list[str]) -> list[str]:
    # the output location is not part of a run's identity
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        out.append(tok)
    return out


def _manifest(args, config: dict, seeds=(), inputs=None) -> harness.RunManifest:
    return harness.RunManifest(
        command=_command(args._argv),
        config=config,
        seeds=[int(s) for s in seeds],
        inputs={k: harness.file_digest(v) for k, v in (inputs or {}).items()},
    )


def _read_graph(path) -> Graph:
    return load_graph(Path(path).read_text(encoding="utf-8"))


def _read_labels(path, n: int) -> Partition:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    labels = payload["labels"] if isinstance(payload, dict) else payload
    if len(labels) != n:
        raise ValueError(f"labels file has {len(labels)} entries, graph has {n} vertices")
    # -1 marks an unassigned vertex, which stands alone
    return PriorKnowledge(labels).to_partition()


def _load_data(args):
    if args.kind == "series":
        return harness.series_from_csv(args.input)
    return harness.read_matrix_csv(args.input)


def _extraction_config(args) -> ExtractionConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
    flags = {
        "method": args.method, "metric": args.metric, "minkowski_p": args.minkowski_p,
        "sigma": args.sigma, "threshold": args.threshold, "epsilon": args.epsilon,
        "k_neighbors": args.k, "alpha": args.alpha, "epochs": args.epochs, "seed": args.seed,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    if args.binarize:
        base["binarize"] = True
    return ExtractionConfig.from_dict(base)


# --- subcommands ---------------------------------------------------------------

def cmd_synth(args, out: Outputs) -> dict:
    params = {"kind": args.kind}
    if args.kind == "ring-of-cliques":
        params.update(cliques=args.cliques, size=args.size)
    elif args.kind == "grid":
        params.update(rows=args.rows, cols=args.cols)
    else:
        params.update(n=args.n, m=args.m, seed=args.seed)
    g = _stage("synth", harness.build_graph, params)
    out.write("graph.csv", save_graph(g))
    summary = {"graph": harness.graph_tag(params), "n": g.n, "m": g.m}
    return {"result": summary, "manifest": _manifest(args, params, seeds=[args.seed])}


def cmd_simulate(args, out: Outputs) -> dict:
    g = _stage("load", _read_graph, args.graph)
    cfg = _stage("simulate", DynamicsConfig, model=args.model, steps=args.steps, seed=args.seed,
                 beta=args.beta, p_spread=args.p_spread, coupling=args.coupling)
    ts = _stage("simulate", simulate, g, cfg)
    out.write("series.csv", harness.series_to_csv(ts))
    result = {"n": ts.n, "steps": ts.T, "model": cfg.model}
    if cfg.model in MODEL_CAVEATS:
        result["caveat"] = MODEL_CAVEATS[cfg.model]
    return {"result": result, "manifest": _manifest(args, cfg.to_dict(), [args.seed], {"graph": args.graph})}


def cmd_extract(args, out: Outputs) -> dict:
    data = _stage("load", _load_data, args)
    cfg = _stage("extract", _extraction_config, args)
    g, resolved = _stage("extract", extract, data, cfg)
    out.write("graph.csv", save_graph(g))
    result = {"n": g.n, "m": g.m, "resolved": resolved}
    return {"result": result, "manifest": _manifest(args, cfg.to_dict(), [cfg.seed], {"input": args.input})}


def _partition(g: Graph, args):
    if args.pk:
        pk = _stage("pk", load_pk, args.pk, g.n)
        initial = pk.to_partition()
    elif args.baseline:
        raise StageFailure("pk", "--baseline needs point data; use the cluster subcommand")
    else:
        initial = Partition.singletons(g.n)
    return _stage("partition", greedy_merge, g, initial)


def _partition_result(g: Graph, run) -> dict:
    rep = EntropyReport.evaluate(g, run.partition)
    labels = map_to_labels(run.partition)
    return {
        "labels": labels.to_dict(),
        "report": rep.to_dict(),
        "merges": run.merges,
        "di_trace": run.di_trace,
    }


def cmd_partition(args, out: Outputs) -> dict:
    g = _stage("load", _read_graph, args.graph)
    if args.algo == "pk-gdimaop" and not args.pk:
        raise StageFailure("partition", "pk-gdimaop needs --pk")
    run = _partition(g, args)
    res = _partition_result(g, run)
    out.write("labels.json", harness.dumps(res["labels"]))
    inputs = {"graph": args.graph}
    if args.pk:
        inputs["pk"] = args.pk
    return {"result": res, "manifest": _manifest(args, {"algo": args.algo}, [], inputs)}


def cmd_cluster(args, out: Outputs) -> dict:
    data = _stage("load", _load_data, args)
    cfg = _stage("extract", _extraction_config, args)
    g, resolved = _stage("extract", extract, data, cfg)
    points = data.values if hasattr(data, "values") else data
    config = {"extraction": cfg.to_dict()}
    if args.pk:
        initial = _stage("pk", load_pk, args.pk, g.n).to_partition()
    elif args.baseline:
        bcfg = _stage("pk", BaselineConfig, algo=args.baseline, k=args.pk_k, eps=args.pk_eps,
                      min_pts=args.pk_min_pts, seed=args.seed or 0)
        config["baseline"] = bcfg.to_dict()
        if bcfg.algo == "kmeans":
            pk = labels_to_pk(_stage("pk", minibatch_kmeans, points, bcfg))
        else:
            pk = _stage("pk", dbscan, points, bcfg)
        initial = pk.to_partition()
    else:
        initial = Partition.singletons(g.n)
    run = _stage("partition", greedy_merge, g, initial)
    res = _partition_result(g, run)
    res["resolved"] = resolved
    out.write("graph.csv", save_graph(g))
    out.write("labels.json", harness.dumps(res["labels"]))
    inputs = {"input": args.input}
    if args.pk:
        inputs["pk"] = args.pk
    return {"result": res, "manifest": _manifest(args, config, [cfg.seed], inputs)}


def cmd_distance(args, out: Outputs) -> dict:
    g1 = _stage("load", _read_graph, args.g1)
    g2 = _stage("load", _read_graph, args.g2)
    gamma = AUTO if args.gamma in (None, AUTO) else float(args.gamma)
    cfg = _stage("distance", HimConfig, xi=args.xi, gamma=gamma)
    res = _stage("distance", distance_report, g1, g2, cfg, weighted=args.weighted_hamming)
    settings = {"xi": args.xi, "gamma": args.gamma or AUTO, "weighted_hamming": args.weighted_hamming}
    return {"result": res, "manifest": _manifest(args, settings, [],
                                                  {"g1": args.g1, "g2": args.g2})}


def cmd_evaluate(args, out: Outputs) -> dict:
    g = _stage("load", _read_graph, args.graph)
    p = _stage("load", _read_labels, args.labels, g.n)
    rep = EntropyReport.evaluate(g, p)
    return {"result": rep.to_dict(), "manifest": _manifest(args, {}, [], {"graph": args.graph, "labels": args.labels})}


def cmd_experiment(args, out: Outputs) -> dict:
    config = _stage("load", lambda p: json.loads(Path(p).read_text(encoding="utf-8")), args.config)
    workers = args.workers if args.workers is not None else int(config.get("workers", 1))
    rows = _stage("experiment", harness.run_experiment, config, workers)
    out.write("results.csv", harness.rows_to_csv(rows))
    config_snapshot = {k: v for k, v in config.items() if k != "workers"}
    return {
        "result": {"rows": rows, "caveats": {m: c for m, c in MODEL_CAVEATS.items()
                                             if m in {r["model"] for r in rows}}},
        "manifest": _manifest(args, config_snapshot, config.get("seeds", [0]), {"config": args.config}),
        "print": harness.rows_to_csv(rows),
    }


# --- parser -------------------------------------------------------------------------

def _add_extraction_flags(p):
    p.add_argument("--input", required=True, help="points CSV or time-series CSV")
    p.add_argument("--kind", choices=["points", "series"], default="points",
                   help="series: rows are time steps, columns are nodes")
    p.add_argument("--config", help="JSON file of extraction settings; flags override it")
    p.add_argument("--method", choices=["mi", "mle", "proximity"])
    p.add_argument("--metric", help="euc, manh, mink, cheb, canb, maha, angu, p-cor, gaus, eps-ne, k-nn")
    p.add_argument("--minkowski-p", type=float, dest="minkowski_p")
    p.add_argument("--sigma", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--binarize", action="store_true", help="unit weights after thresholding")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxdi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("synth", cmd_synth, "generate a ground-truth graph")
    p.add_argument("--kind", required=True, choices=harness.GRAPH_KINDS)
    p.add_argument("--cliques", type=int, default=6)
    p.add_argument("--size", type=int, default=5)
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--cols", type=int, default=6)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--m", type=int, default=1)

    p = add("simulate", cmd_simulate, "run spin dynamics on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", default="KIM", choices=["KIM", "BM", "IGM", "kim", "bm", "igm"])
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--p-spread", type=float, default=0.3, dest="p_spread")
    p.add_argument("--coupling", type=float, default=1.0)

    p = add("extract", cmd_extract, "build a graph from points or time series")
    _add_extraction_flags(p)
    p.set_defaults(seed=None)

    p = add("partition", cmd_partition, "greedy DI-maximising partition of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--algo", choices=["gdimaop", "pk-gdimaop"], default="gdimaop")
    p.add_argument("--pk", help='prior-knowledge JSON {"labels": [...]}, -1 = unassigned')
    p.set_defaults(baseline=None)

    p = add("cluster", cmd_cluster, "extract + partition + label (full pipeline)")
    _add_extraction_flags(p)
    p.set_defaults(seed=None)
    p.add_argument("--pk", help="prior-knowledge JSON file")
    p.add_argument("--baseline", choices=["kmeans", "dbscan"], help="derive prior knowledge from a baseline")
    p.add_argument("--pk-k", type=int, default=2, dest="pk_k")
    p.add_argument("--pk-eps", type=float, default=0.5, dest="pk_eps")
    p.add_argument("--pk-min-pts", type=int, default=5, dest="pk_min_pts")

    p = add("distance", cmd_distance, "Hamming / Ipsen-Mikhailov / HIM between two graphs")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--gamma", default=None, help="Lorentzian width, or 'auto'")
    p.add_argument("--weighted-hamming", action="store_true", dest="weighted_hamming",
                   help="also report Hamming on max-normalised weights")

    p = add("evaluate", cmd_evaluate, "H1, H2, DI and DI-R of a graph under given labels")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True, help="labels or prior-knowledge JSON")

    p = add("experiment", cmd_experiment, "sweep graphs x dynamics x metrics")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Outputs(args.out)
    start = time.perf_counter()
    try:
        payload = args.func(args, out)
        manifest: harness.RunManifest = payload["manifest"]
        manifest.timings["total_s"] = round(time.perf_counter() - start, 6)
        report = {"command": args.cmd, "result": payload["result"], "manifest": manifest.stable_dict()}
        text = harness.dumps(report)
        out.write("report.json", text)
        out.write("manifest.json", harness.dumps(manifest.to_dict()))
    except StageFailure as exc:
        out.rollback()
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        out.rollback()
        print(f"error [{args.cmd}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if "print" in payload:
        sys.stdout.write(payload["print"])
    else:
        sys.stdout.write(harness.dumps(payload["result"]))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
