"""Graph extraction from raw observations.

Three families: pairwise mutual information of spin series, maximum-likelihood
couplings of a kinetic Ising model, and proximity metrics over point vectors
(turned into graphs via a Gaussian kernel + threshold, or via k-NN / ε-ball
neighbourhoods).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from scipy.spatial.distance import cdist

from .graph_core import Graph



class ExtractionError(ValueError):
    pass


class DivergenceError(ExtractionError):
    pass


class DegenerateInputWarning(UserWarning):
    """Input had zero variance somewhere and was regularised."""


METRIC_ALIASES = {
    "euc": "euc", "euclidean": "euc",
    "manh": "manh", "manhattan": "manh", "cityblock": "manh",
    "mink": "mink", "minkowski": "mink",
    "cheb": "cheb", "chebyshev": "cheb",
    "canb": "canb", "canberra": "canb",
    "maha": "maha", "mahalanobis": "maha",
    "angu": "angu", "angular": "angu",
    "p-cor": "pcor", "pcor": "pcor", "pearson": "pcor",
    "gaus": "gaus", "gaussian": "gaus",
    "ε-ne": "eps", "eps-ne": "eps", "eps": "eps", "epsilon": "eps",
    "k-nn": "knn", "knn": "knn",
}
DISTANCE_METRICS = ("euc", "manh", "mink", "cheb", "canb", "maha", "angu", "pcor")


def canonical_metric(name: str) -> str:
    key = name.strip().lower()
    if key not in METRIC_ALIASES:
        raise ExtractionError(f"unknown proximity metric {name!r}")
    return METRIC_ALIASES[key]


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """``values[i, t]`` is the state of node ``i`` at step ``t``."""

    values: np.ndarray
    kind: str = "spin"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ExtractionError("time series must be a 2-D n x T array")
        if self.kind not in ("spin", "real"):
            raise ExtractionError(f"unknown series kind {self.kind!r}")
        if self.kind == "spin" and not np.all(np.abs(v) == 1):
            raise ExtractionError("spin series may only contain +1 and -1")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def binarized(self) -> "TimeSeriesMatrix":
        return TimeSeriesMatrix(np.where(self.values >= 0, 1.0, -1.0), "spin")


@dataclass
class ExtractionConfig:
    """Extraction parameters. ``None`` means "resolve a default from the data"."""

    method: str = "proximity"  # mi | mle | proximity
    metric: str = "euc"
    minkowski_p: float = 3.0
    sigma: float | None = None
    threshold: float | None = None
    epsilon: float | None = None
    k_neighbors: int | None = None
    alpha: float = 0.1
    epochs: int = 200
    seed: int = 0
    binarize: bool = False

    def __post_init__(self):
        if self.method not in ("mi", "mle", "proximity"):
            raise ExtractionError(f"unknown extraction method {self.method!r}")
        if self.method == "proximity":
            self.metric = canonical_metric(self.metric)
        if self.minkowski_p < 1:
            raise ExtractionError("Minkowski order must be >= 1")
        if self.sigma is not None and self.sigma <= 0:
            raise ExtractionError("sigma must be positive")
        if self.threshold is not None and self.threshold < 0:
            raise ExtractionError("threshold must be nonnegative")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ExtractionError("epsilon must be positive")
        if self.k_neighbors is not None and self.k_neighbors < 1:
            raise ExtractionError("k_neighbors must be >= 1")
        if self.alpha <= 0 or self.epochs < 1:
            raise ExtractionError("alpha must be positive and epochs >= 1")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExtractionConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ExtractionError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# --- mutual information ----------------------------------------------------

def mi_matrix(ts: TimeSeriesMatrix) -> np.ndarray:
    """Plug-in mutual information (bits) between every pair of binary series."""
    if ts.kind != "spin":
        raise ExtractionError("mutual information needs a spin (+-1) series; binarize first")
    if ts.T < 2:
        raise ExtractionError("need at least two time steps")
    x = (ts.values > 0).astype(float)
    T = ts.T
    p1 = x.mean(axis=1)
    p0 = 1.0 - p1
    p11 = x @ x.T / T
    p10 = p1[:, None] - p11
    p01 = p1[None, :] - p11
    p00 = 1.0 - p11 - p10 - p01
    mi = np.zeros_like(p11)
    for pj, pa, pb in ((p11, p1, p1), (p10, p1, p0), (p01, p0, p1), (p00, p0, p0)):
        denom = np.outer(pa, pb)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where((pj > 0) & (denom > 0), pj * np.log2(pj / denom), 0.0)
        mi += term
    mi = np.maximum((mi + mi.T) / 2.0, 0.0)
    np.fill_diagonal(mi, 0.0)
    return mi


# --- kinetic Ising maximum likelihood ---------------------------------------

def kim_log_likelihood(W: np.ndarray, ts: TimeSeriesMatrix) -> float:
    """Natural-log likelihood of the observed transitions under couplings ``W``."""
    s = ts.values
    H = W @ s[:, :-1]
    nxt = s[:, 1:]
    # ln P = s'H - ln(2 cosh H)
    return float(np.sum(nxt * H - np.logaddexp(H, -H)))


def kim_gradient(W: np.ndarray, ts: TimeSeriesMatrix) -> np.ndarray:
    """d lnP / dW_ij = sum_t [s_i(t+1) - tanh(H_i(t))] s_j(t)."""
    s = ts.values
    prev, nxt = s[:, :-1], s[:, 1:]
    H = W @ prev
    return (nxt - np.tanh(H)) @ prev.T


def fit_kim_couplings(ts: TimeSeriesMatrix, alpha: float = 0.1, epochs: int = 200,
                      seed: int = 0, W0: np.ndarray | None = None) -> np.ndarray:
    """Gradient ascent on the kinetic Ising likelihood; returns the raw (asymmetric) W."""
    if ts.kind != "spin":
        raise ExtractionError("maximum-likelihood extraction needs a spin series")
    if ts.T < 2:
        raise ExtractionError("need at least two time steps")
    n = ts.n
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 0.1 / math.sqrt(n), size=(n, n)) if W0 is None else np.array(W0, float)
    step = alpha / (ts.T - 1)
    for epoch in range(epochs):
        W = W + step * kim_gradient(W, ts)
        if not np.all(np.isfinite(W)) or np.abs(W).max() > 1e6:
            raise DivergenceError(f"coupling fit diverged at epoch {epoch} with alpha={alpha}")
    return W


def esmbmle(ts: TimeSeriesMatrix, cfg: ExtractionConfig) -> np.ndarray:
    """Affinity ``(|W| + |W^T|) / 2`` from fitted kinetic Ising couplings."""
    W = fit_kim_couplings(ts, cfg.alpha, cfg.epochs, cfg.seed)
    A = (np.abs(W) + np.abs(W.T)) / 2.0
    np.fill_diagonal(A, 0.0)
    return A


# --- proximity metrics -------------------------------------------------------

def _pearson_distance(x: np.ndarray) -> np.ndarray:
    c = x - x.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(c, axis=1)
    # centring a constant row can leave rounding residue; treat it as exactly flat
    flat = norms <= 1e-12 * np.maximum(np.abs(x).max(axis=1), 1.0)
    if flat.any():
        warnings.warn(
            f"{int(flat.sum())} constant point vector(s); their correlation is taken as 0",
            DegenerateInputWarning, stacklevel=3,
        )
    z = c / np.where(flat, 1.0, norms)[:, None]
    z[flat] = 0.0
    corr = np.clip(z @ z.T, -1.0, 1.0)
    d = 1.0 - corr
    np.fill_diagonal(d, 0.0)
    return d


def _angular_distance(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    flat = norms == 0
    if flat.any():
        warnings.warn(
            f"{int(flat.sum())} zero point vector(s); angle to them taken as pi/2",
            DegenerateInputWarning, stacklevel=3,
        )
    z = x / np.where(flat, 1.0, norms)[:, None]
    # 2*atan2(|a-b|, |a+b|) is the angle between unit vectors without arccos's loss near 0
    diff = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=2)
    summ = np.linalg.norm(z[:, None, :] + z[None, :, :], axis=2)
    d = 2.0 * np.arctan2(diff, summ) / math.pi
    zero = np.flatnonzero(flat)
    d[zero, :] = 0.5
    d[:, zero] = 0.5
    np.fill_diagonal(d, 0.0)
    return d


def _mahalanobis(x: np.ndarray) -> np.ndarray:
    d = x.shape[1]
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    if np.any(np.diag(cov) == 0):
        warnings.warn("zero-variance feature under Mahalanobis; covariance regularised",
                      DegenerateInputWarning, stacklevel=3)
    ridge = 1e-6 * np.trace(cov) / d
    if ridge == 0:
        ridge = 1e-6
    VI = np.linalg.inv(cov + ridge * np.eye(d))
    return cdist(x, x, "mahalanobis", VI=VI)


def proximity_matrix(points, metric: str = "euc", *, minkowski_p: float = 3.0) -> np.ndarray:
    """Pairwise distances between rows of ``points`` under ``metric``.

    P-COR is ``1 - pearson``; ANGU is ``arccos(cosine) / pi``; MAHA uses the
    row-sample covariance with a small ridge so it stays invertible.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ExtractionError("need at least two points")
    metric = canonical_metric(metric)
    if metric in ("euc", "gaus", "eps", "knn"):
        d = cdist(x, x, "euclidean")
    elif metric == "manh":
        d = cdist(x, x, "cityblock")
    elif metric == "mink":
        if minkowski_p < 1:
            raise ExtractionError("Minkowski order must be >= 1")
        d = cdist(x, x, "minkowski", p=minkowski_p)
    elif metric == "cheb":
        d = cdist(x, x, "chebyshev")
    elif metric == "canb":
        d = cdist(x, x, "canberra")
    elif metric == "maha":
        d = _mahalanobis(x)
    elif metric == "angu":
        d = _angular_distance(x)
    elif metric == "pcor":
        d = _pearson_distance(x)
    else:  # pragma: no cover - canonical_metric covers every case
        raise ExtractionError(metric)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def gaussian_affinity(d: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ExtractionError("sigma must be positive")
    a = np.exp(-np.asarray(d, float) ** 2 / (2.0 * sigma ** 2))
    np.fill_diagonal(a, 0.0)
    return a


def median_heuristic_sigma(d: np.ndarray) -> float:
    off = d[np.triu_indices_from(d, k=1)]
    med = float(np.median(off)) if off.size else 1.0
    return med if med > 0 else 1.0


def _target_edges(n: int) -> int:
    # mean degree 2 ln n
    return max(1, min(n * (n - 1) // 2, int(round(n * math.log(n)))))


def default_threshold(a: np.ndarray) -> float:
    """Largest τ keeping about ``n ln n`` of the strongest pairs (mean degree ≈ 2 ln n)."""
    n = a.shape[0]
    vals = np.sort(a[np.triu_indices(n, k=1)])[::-1]
    m = _target_edges(n)
    if m >= len(vals):
        return 0.0
    return float(vals[m])


def default_epsilon(d: np.ndarray) -> float:
    n = d.shape[0]
    vals = np.sort(d[np.triu_indices(n, k=1)])
    m = _target_edges(n)
    return float(vals[min(m, len(vals)) - 1])


def default_k(n: int) -> int:
    return max(1, min(n - 1, int(round(math.log(n)))))


def threshold_to_graph(w: np.ndarray, tau: float, *, binarize: bool = False) -> Graph:
    """Keep pairs with affinity strictly above ``tau`` as weighted edges."""
    w = np.asarray(w, dtype=float)
    if tau < 0:
        raise ExtractionError("threshold must be nonnegative")
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ExtractionError("affinity must be square")
    if not np.allclose(w, w.T, atol=1e-9, rtol=0):
        raise ExtractionError("affinity must be symmetric")
    iu, ju = np.triu_indices(w.shape[0], k=1)
    vals = w[iu, ju]
    keep = vals > tau
    weights = np.ones(keep.sum()) if binarize else vals[keep]
    return Graph(w.shape[0], zip(iu[keep], ju[keep], weights))


def _distance_weight(d: float) -> float:
    return 1.0 / (1.0 + d)


def knn_graph(d: np.ndarray, k: int, *, binarize: bool = False) -> Graph:
    """Union-symmetrised k-nearest-neighbour graph with weights ``1/(1+d)``.

    Equidistant neighbours are taken in increasing vertex order.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if not 1 <= k < n:
        raise ExtractionError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    pairs: set[tuple[int, int]] = set()
    ids = np.arange(n)
    for i in range(n):
        others = ids[ids != i]
        order = np.lexsort((others, d[i, others]))
        for j in others[order[:k]]:
            pairs.add((min(i, j), max(i, j)))
    edges = [(i, j, 1.0 if binarize else _distance_weight(d[i, j])) for i, j in sorted(pairs)]
    return Graph(n, edges)


def eps_graph(d: np.ndarray, eps: float, *, binarize: bool = False) -> Graph:
    d = np.asarray(d, dtype=float)
    if eps <= 0:
        raise ExtractionError("epsilon must be positive")
    iu, ju = np.triu_indices(d.shape[0], k=1)
    keep = d[iu, ju] <= eps
    edges = [(i, j, 1.0 if binarize else _distance_weight(d[i, j]))
             for i, j in zip(iu[keep], ju[keep])]
    return Graph(d.shape[0], edges)


# --- dispatcher ----------------------------------------------------------------

def _as_points(data) -> np.ndarray:
    if isinstance(data, TimeSeriesMatrix):
        return data.values
    return np.asarray(data, dtype=float)


def _as_series(data) -> TimeSeriesMatrix:
    if isinstance(data, TimeSeriesMatrix):
        ts = data
    else:
        ts = TimeSeriesMatrix(np.asarray(data, dtype=float), "real")
    if ts.kind != "spin":
        ts = ts.binarized()
    return ts


def extract(data, cfg: ExtractionConfig) -> tuple[Graph, dict[str, Any]]:
    """Build a graph from ``data`` according to ``cfg``.

    Returns the graph and a dict of every resolved parameter (defaults filled
    in), plus any degeneracy flags raised along the way.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateInputWarning)
        g, resolved = _extract(data, cfg)
    flags = [str(w.message) for w in caught if issubclass(w.category, DegenerateInputWarning)]
    for w in caught:
        if not issubclass(w.category, DegenerateInputWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    resolved["flags"] = flags
    return g, resolved


def _extract(data, cfg: ExtractionConfig):
    resolved: dict[str, Any] = {"method": cfg.method, "binarize": cfg.binarize}
    if cfg.method in ("mi", "mle"):
        ts = _as_series(data)
        if cfg.method == "mi":
            a = mi_matrix(ts)
        else:
            a = esmbmle(ts, cfg)
            resolved.update(alpha=cfg.alpha, epochs=cfg.epochs, seed=cfg.seed)
        tau = default_threshold(a) if cfg.threshold is None else cfg.threshold
        resolved["threshold"] = tau
        return threshold_to_graph(a, tau, binarize=cfg.binarize), resolved

    points = _as_points(data)
    metric = cfg.metric
    resolved["metric"] = metric
    d = proximity_matrix(points, metric, minkowski_p=cfg.minkowski_p)
    if metric == "mink":
        resolved["minkowski_p"] = cfg.minkowski_p
    if metric == "knn":
        k = default_k(len(d)) if cfg.k_neighbors is None else cfg.k_neighbors
        resolved["k_neighbors"] = k
        return knn_graph(d, k, binarize=cfg.binarize), resolved
    if metric == "eps":
        eps = default_epsilon(d) if cfg.epsilon is None else cfg.epsilon
        resolved["epsilon"] = eps
        return eps_graph(d, eps, binarize=cfg.binarize), resolved
    sigma = median_heuristic_sigma(d) if cfg.sigma is None else cfg.sigma
    resolved["sigma"] = sigma
    a = gaussian_affinity(d, sigma)
    if metric == "gaus":
        # dense kernel graph unless a threshold is given explicitly
        tau = 0.0 if cfg.threshold is None else cfg.threshold
    else:
        tau = default_threshold(a) if cfg.threshold is None else cfg.threshold
    resolved["threshold"] = tau
    return threshold_to_graph(a, tau, binarize=cfg.binarize), resolved
