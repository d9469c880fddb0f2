"""Hamming, Ipsen-Mikhailov and HIM distances between graphs on the same vertices.

Graphs are compared by topology: any positive weight counts as an edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .graph_core import Graph, GraphError

AUTO = "auto"


@dataclass(frozen=True)
class HimConfig:
    xi: float = 1.0
    gamma: float | str = AUTO

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError("xi must be nonnegative")
        if self.gamma != AUTO and not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            raise ValueError("gamma must be positive or 'auto'")


def _check_pair(g1: Graph, g2: Graph) -> None:
    if g1.n != g2.n:
        raise GraphError(f"graphs have different vertex counts ({g1.n} vs {g2.n})")


def hamming_distance(g1: Graph, g2: Graph) -> float:
    _check_pair(g1, g2)
    n = g1.n
    if n < 2:
        return 0.0
    a = g1.to_dense() > 0
    b = g2.to_dense() > 0
    return float(np.sum(a != b)) / (n * (n - 1))


def weighted_hamming_distance(g1: Graph, g2: Graph) -> float:
    """Diagnostic variant: |a - b| on weights scaled by each graph's max weight."""
    _check_pair(g1, g2)
    n = g1.n
    if n < 2:
        return 0.0
    a, b = g1.to_dense(), g2.to_dense()
    a = a / a.max() if a.max() > 0 else a
    b = b / b.max() if b.max() > 0 else b
    return float(np.abs(a - b).sum()) / (n * (n - 1))


def laplacian_frequencies(g: Graph) -> np.ndarray:
    """Vibrational frequencies sqrt(lambda_k) of the binarised Laplacian, smallest mode dropped."""
    a = (g.to_dense() > 0).astype(float)
    lap = np.diag(a.sum(axis=1)) - a
    try:
        lam = np.linalg.eigvalsh(lap)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"Laplacian eigensolver failed: {exc}") from exc
    lam = np.clip(lam, 0.0, None)
    return np.sqrt(lam[1:])


def _normaliser(omegas: np.ndarray, gamma: float) -> float:
    # integral over [0, inf) of a Lorentzian centred at w_k is pi/2 + arctan(w_k/gamma)
    return 1.0 / float(np.sum(math.pi / 2 + np.arctan(omegas / gamma)))


def _density(omegas: np.ndarray, gamma: float):
    K = _normaliser(omegas, gamma)

    def rho(w):
        return K * float(np.sum(gamma / ((w - omegas) ** 2 + gamma ** 2)))

    return rho


def _im_from_frequencies(o1: np.ndarray, o2: np.ndarray, gamma: float, tol: float = 1e-8) -> float:
    if o1.size == 0 and o2.size == 0:
        return 0.0
    if np.array_equal(o1, o2):
        return 0.0
    r1, r2 = _density(o1, gamma), _density(o2, gamma)

    def sq(w):
        return (r1(w) - r2(w)) ** 2

    top = float(max(o1.max(initial=0.0), o2.max(initial=0.0))) + 10.0 * gamma
    # breakpoints at the peaks, thinned so no subinterval is much narrower than gamma
    points = []
    for w in np.unique(np.concatenate([o1, o2])):
        if 0 < w < top and (not points or w - points[-1] > gamma / 2):
            points.append(float(w))
    points = np.array(points)
    body, _ = integrate.quad(sq, 0.0, top, points=points if points.size else None,
                             epsabs=tol, epsrel=tol, limit=500)
    tail, _ = integrate.quad(sq, top, np.inf, epsabs=tol, epsrel=tol, limit=200)
    return math.sqrt(max(body + tail, 0.0))


@lru_cache(maxsize=128)
def auto_gamma(n: int, tol: float = 1e-13) -> float:
    """Width gamma for which IM(empty_n, complete_n) = 1, found by bisection.

    The bisection runs on exactly the computation ``ipsen_mikhailov`` performs and
    returns the bracket end whose IM does not exceed 1, so rounding never pushes
    the normalised pair above the bound.
    """
    if n < 2:
        raise GraphError("auto gamma needs n >= 2")
    empty = laplacian_frequencies(Graph(n))
    full = laplacian_frequencies(Graph(n, ((i, j) for i in range(n) for j in range(i + 1, n))))

    def excess(gamma):
        return _im_from_frequencies(empty, full, gamma) - 1.0

    # IM of this pair falls as gamma grows
    lo, hi = 0.01, 10.0
    while excess(hi) > 0:
        hi *= 2
    while excess(lo) <= 0:
        lo /= 2
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def resolve_gamma(cfg: HimConfig, n: int) -> float:
    return auto_gamma(n) if cfg.gamma == AUTO else float(cfg.gamma)


def ipsen_mikhailov(g1: Graph, g2: Graph, cfg: HimConfig = HimConfig()) -> float:
    _check_pair(g1, g2)
    if g1.n < 2:
        return 0.0
    gamma = resolve_gamma(cfg, g1.n)
    return _im_from_frequencies(laplacian_frequencies(g1), laplacian_frequencies(g2), gamma)


def him_distance(g1: Graph, g2: Graph, cfg: HimConfig = HimConfig()) -> float:
    h = hamming_distance(g1, g2)
    if cfg.xi == 0:
        return h
    return _combine(h, ipsen_mikhailov(g1, g2, cfg), cfg.xi)


SENSITIVITY_XIS = (0.5, 1.0, 2.0)


def _combine(h: float, im: float, xi: float) -> float:
    return math.sqrt(h * h + xi * im * im) / math.sqrt(1.0 + xi)


def distance_report(g1: Graph, g2: Graph, cfg: HimConfig = HimConfig(), *, weighted: bool = False) -> dict:
    """All distance components, plus HIM at a few xi values since no single xi is canonical."""
    gamma = resolve_gamma(cfg, g1.n) if g1.n >= 2 else None
    h = hamming_distance(g1, g2)
    im = ipsen_mikhailov(g1, g2, cfg)
    out = {
        "hamming": h,
        "im": im,
        "him": _combine(h, im, cfg.xi),
        "xi": cfg.xi,
        "gamma": gamma,
        "him_sensitivity": {repr(x): _combine(h, im, x) for x in SENSITIVITY_XIS},
    }
    if weighted:
        out["weighted_hamming"] = weighted_hamming_distance(g1, g2)
    return out
