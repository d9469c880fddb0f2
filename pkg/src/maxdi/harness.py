"""Pipelines behind the CLI: graph construction, sweeps, manifests, file formats."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .dynamics import DynamicsConfig, gen_barabasi_albert, gen_grid, gen_ring_of_cliques, simulate
from .extraction import ExtractionConfig, TimeSeriesMatrix, canonical_metric, extract
from .gdimaop import greedy_merge
from .graph_core import Graph, Partition
from .graph_distance import HimConfig, distance_report
from .structural_entropy import EntropyReport, decoding_info

GRAPH_KINDS = ("ring-of-cliques", "grid", "ba")


def build_graph(params: dict[str, Any]) -> Graph:
    kind = params.get("kind")
    if kind == "ring-of-cliques":
        return gen_ring_of_cliques(int(params.get("cliques", 6)), int(params.get("size", 5)))
    if kind == "grid":
        return gen_grid(int(params.get("rows", 5)), int(params.get("cols", 6)))
    if kind == "ba":
        return gen_barabasi_albert(int(params.get("n", 30)), int(params.get("m", 1)), int(params.get("seed", 0)))
    raise ValueError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")


def graph_tag(params: dict[str, Any]) -> str:
    kind = params["kind"]
    if kind == "ring-of-cliques":
        return f"ring-of-cliques({params.get('cliques', 6)},{params.get('size', 5)})"
    if kind == "grid":
        return f"grid({params.get('rows', 5)}x{params.get('cols', 6)})"
    return f"ba({params.get('n', 30)},{params.get('m', 1)},seed={params.get('seed', 0)})"


def extraction_config_for(metric: str, overrides: dict[str, Any], seed: int) -> ExtractionConfig:
    """``metric`` may name a proximity metric or the ``mi`` / ``mle`` methods."""
    base = dict(overrides)
    base.setdefault("seed", seed)
    if metric.lower() in ("mi", "mle"):
        base["method"] = metric.lower()
    else:
        base["method"] = "proximity"
        base["metric"] = canonical_metric(metric)
    return ExtractionConfig.from_dict(base)


# --- file formats ----------------------------------------------------------------

def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Comma-separated reals, ``#`` comments allowed; always 2-D."""
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append([float(x) for x in s.split(",")])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: not a row of numbers: {line!r}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError(f"{path}: rows have differing lengths {sorted(width)}")
    return np.array(rows, dtype=float)


def format_float(x: float) -> str:
    return repr(float(x))


def write_matrix_csv(a: np.ndarray, fmt=None) -> str:
    buf = io.StringIO()
    for row in np.atleast_2d(a):
        buf.write(",".join(fmt(x) if fmt else format_float(x) for x in row))
        buf.write("\n")
    return buf.getvalue()


def series_to_csv(ts: TimeSeriesMatrix) -> str:
    """Rows are time steps, columns are nodes."""
    if ts.kind == "spin":
        return write_matrix_csv(ts.values.T, fmt=lambda x: str(int(x)))
    return write_matrix_csv(ts.values.T)


def series_from_csv(path: str | Path, kind: str | None = None) -> TimeSeriesMatrix:
    values = read_matrix_csv(path).T
    if kind is None:
        kind = "spin" if np.all(np.abs(values) == 1) else "real"
    return TimeSeriesMatrix(values, kind)


def dumps(obj: Any) -> str:
    """Stable JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def module_versions() -> dict[str, str]:
    import scipy
    import sklearn

    return {
        "maxdi": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "python": platform.python_version(),
    }


@dataclass
class RunManifest:
    command: list[str]
    config: dict[str, Any]
    seeds: list[int] = field(default_factory=list)
    inputs: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def stable_dict(self) -> dict[str, Any]:
        """Everything except timings; embedded in reports so reruns compare byte-for-byte."""
        return {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "versions": module_versions(),
        }

    def to_dict(self) -> dict[str, Any]:
        d = self.stable_dict()
        d["timings"] = self.timings
        return d


# --- experiment sweep ----------------------------------------------------------------

CSV_COLUMNS = [
    "graph", "model", "metric", "n_seeds", "him", "hamming", "im",
    "him_xi0.5", "him_xi1.0", "him_xi2.0",
    "di", "di_r", "clusters", "edges", "gt_di", "error",
]


def run_cell(graph_params: dict, model: str, metric: str, seed: int, settings: dict) -> dict:
    """GT graph -> dynamics -> extraction -> (HIM against GT, greedy DI of the extracted graph)."""
    gt = build_graph(graph_params)
    dyn = DynamicsConfig(model=model, seed=seed, **settings.get("dynamics", {}))
    ts = simulate(gt, dyn)
    cfg = extraction_config_for(metric, settings.get("extraction", {}), seed)
    g, resolved = extract(ts, cfg)
    dist = distance_report(gt, g, HimConfig(xi=settings.get("xi", 1.0)))
    run = greedy_merge(g, Partition.singletons(g.n))
    rep = EntropyReport.evaluate(g, run.partition)
    return {
        "him": dist["him"], "hamming": dist["hamming"], "im": dist["im"],
        "di": rep.di, "di_r": rep.di_ratio, "clusters": rep.partition_size,
        "edges": g.m, "resolved": resolved, "gamma": dist["gamma"],
        **{f"him_xi{k}": v for k, v in dist["him_sensitivity"].items()},
    }


def _run_cell_safe(args):
    graph_params, model, metric, seed, settings = args
    try:
        return run_cell(graph_params, model, metric, seed, settings)
    except Exception as exc:  # recorded in-row; the sweep continues
        return {"error": f"{type(exc).__name__}: {exc}"}


def _mean(values):
    return float(np.mean(values)) if values else math.nan


def run_experiment(config: dict[str, Any], workers: int = 1) -> list[dict[str, Any]]:
    """Sweep graphs x models x metrics, averaging each cell over the configured seeds."""
    graphs = config.get("graphs", [])
    models = config.get("models", [])
    metrics = config.get("metrics", [])
    seeds = [int(s) for s in config.get("seeds", [0])]
    settings = {
        "dynamics": config.get("dynamics", {}),
        "extraction": config.get("extraction", {}),
        "xi": float(config.get("xi", 1.0)),
    }
    if "steps" in config:
        settings["dynamics"] = {**settings["dynamics"], "steps": int(config["steps"])}

    cells = [(gs, mo, me) for gs in graphs for mo in models for me in metrics]
    jobs = [(gs, mo, me, s, settings) for gs, mo, me in cells for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_safe, jobs))
    else:
        results = [_run_cell_safe(j) for j in jobs]

    rows = []
    for c, (gs, mo, me) in enumerate(cells):
        chunk = results[c * len(seeds):(c + 1) * len(seeds)]
        ok = [r for r in chunk if "error" not in r]
        errors = sorted({r["error"] for r in chunk if "error" in r})
        gt = build_graph(gs)
        gt_di = decoding_info(gt, greedy_merge(gt, Partition.singletons(gt.n)).partition)
        row = {
            "graph": graph_tag(gs),
            "model": mo.upper(),
            "metric": me,
            "n_seeds": len(ok),
            "gt_di": gt_di,
            "error": "; ".join(errors),
        }
        for key in ("him", "hamming", "im", "him_xi0.5", "him_xi1.0", "him_xi2.0",
                    "di", "di_r", "clusters", "edges"):
            row[key] = _mean([r[key] for r in ok])
        row["resolved"] = [r.get("resolved") for r in ok]
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            format_float(r[c]) if isinstance(r[c], float) else r[c] for c in CSV_COLUMNS
        ])
    return buf.getvalue()


def command_line() -> list[str]:
    return [Path(sys.argv[0]).name] + sys.argv[1:]
