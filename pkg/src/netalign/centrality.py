"""Node centrality measures and variance/KL-based measure selection.

Six measures are supported: degree, eigenvector, katz, betweenness,
pagerank, closeness. Measure selection scores each candidate by
exp(var_s + var_t - gamma * KL(p_s || p_t) - 1) on jointly min-max
normalized values and keeps the argmax.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graphs import Graph

MEASURES = ("degree", "eigenvector", "katz", "betweenness", "pagerank", "closeness")


class ConvergenceError(RuntimeError):
    """An iterative measure failed to converge within its iteration budget."""


class KatzDivergenceError(RuntimeError):
    """Katz iterates grew without bound (alpha at or above 1/lambda_max)."""


@dataclass(frozen=True)
class CentralityParams:
    eigenvector_tol: float = 1e-8
    eigenvector_max_iter: int = 1000
    katz_alpha: float = 0.1
    katz_beta: float = 1.0
    katz_tol: float = 1e-10
    katz_max_iter: int = 1000
    pagerank_alpha: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 1000


@dataclass
class CentralityVector:
    measure: str
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.measure} produced non-finite values")


def degree_centrality(g: Graph) -> np.ndarray:
    """Neighbor counts."""
    return g.degrees.astype(np.float64)


def eigenvector_centrality(g: Graph, params: CentralityParams | None = None) -> np.ndarray:
    """Entries of the dominant adjacency eigenvector, L2-normalized, absolute.

    Power iteration on I + A (same eigenvectors as A, but the shift makes the
    dominant eigenvalue strictly largest in magnitude, so bipartite graphs do
    not oscillate).
    """
    params = params or CentralityParams()
    if g.edge_count == 0:
        raise ValueError("eigenvector centrality requires at least one edge")
    a = g.adjacency_csr()
    n = g.node_count
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(params.eigenvector_max_iter):
        y = x + a @ x
        y /= np.linalg.norm(y)
        if np.linalg.norm(y - x) < params.eigenvector_tol:
            return np.abs(y)
        x = y
    raise ConvergenceError(
        f"eigenvector power iteration did not converge in {params.eigenvector_max_iter} steps"
    )


def katz_centrality(g: Graph, params: CentralityParams | None = None) -> np.ndarray:
    """Fixed point of c = alpha * A c + beta * 1.

    Diverges when alpha is at or above the reciprocal spectral radius; growth
    beyond a magnitude guard raises KatzDivergenceError.
    """
    params = params or CentralityParams()
    a = g.adjacency_csr()
    n = g.node_count
    beta = params.katz_beta
    c = np.full(n, beta)
    for _ in range(params.katz_max_iter):
        nxt = params.katz_alpha * (a @ c) + beta
        if np.max(np.abs(nxt)) > 1e12:
            raise KatzDivergenceError(
                f"katz iterates diverge at alpha={params.katz_alpha} (alpha >= 1/lambda_max)"
            )
        if np.max(np.abs(nxt - c)) < params.katz_tol:
            return nxt
        c = nxt
    raise ConvergenceError(f"katz iteration did not converge in {params.katz_max_iter} steps")


def _brandes_source(g: Graph, s: int) -> tuple[list[int], list[list[int]], list[int]]:
    """BFS from s returning finish order, predecessor lists, and path counts."""
    n = g.node_count
    dist = [-1] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[s] = 0
    sigma[s] = 1
    order: list[int] = []
    queue: deque[int] = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in g.neighbors[v]:
            w = int(w)
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma


def betweenness_centrality(g: Graph, exact: bool = False) -> np.ndarray:
    """Shortest-path betweenness over unordered node pairs, by Brandes' method.

    With exact=True the dependency accumulation runs in rational arithmetic
    and the result is the correctly rounded float of the true value; the
    default accumulates in float64.
    """
    n = g.node_count
    if exact:
        acc: list = [Fraction(0)] * n
        one = Fraction(1)
    else:
        acc = [0.0] * n
        one = 1.0
    for s in range(n):
        order, preds, sigma = _brandes_source(g, s)
        delta = [Fraction(0)] * n if exact else [0.0] * n
        for w in reversed(order):
            coeff = one + delta[w]
            for v in preds[w]:
                if exact:
                    delta[v] += Fraction(sigma[v], sigma[w]) * coeff
                else:
                    delta[v] += sigma[v] / sigma[w] * coeff
            if w != s:
                acc[w] += delta[w]
    if exact:
        return np.array([float(x / 2) for x in acc])
    return np.array(acc) / 2.0


def pagerank_centrality(g: Graph, params: CentralityParams | None = None) -> np.ndarray:
    """Power iteration with uniform teleport (1 - alpha) / n.

    Mass of degree-zero nodes is redistributed uniformly, so the vector sums
    to one at every step.
    """
    params = params or CentralityParams()
    n = g.node_count
    a = g.adjacency_csr()
    deg = g.degrees.astype(np.float64)
    dangling = deg == 0
    safe_deg = np.where(dangling, 1.0, deg)
    alpha = params.pagerank_alpha
    r = np.full(n, 1.0 / n)
    for _ in range(params.pagerank_max_iter):
        spread = a @ (r / safe_deg)
        loose = r[dangling].sum()
        nxt = alpha * (spread + loose / n) + (1.0 - alpha) / n
        if np.abs(nxt - r).sum() < params.pagerank_tol:
            return nxt
        r = nxt
    raise ConvergenceError(f"pagerank did not converge in {params.pagerank_max_iter} steps")


def closeness_centrality(g: Graph) -> np.ndarray:
    """Reciprocal mean shortest-path distance with component scaling.

    For a node reaching r nodes with distance sum D, the value is
    ((r - 1) / D) * ((r - 1) / (n - 1)); on a connected graph this reduces
    to (n - 1) / D. Isolated nodes get 0.
    """
    n = g.node_count
    out = np.zeros(n)
    if n == 1:
        return out
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue: deque[int] = deque([s])
        total = 0
        reached = 1
        while queue:
            v = queue.popleft()
            for w in g.neighbors[v]:
                w = int(w)
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    total += dist[w]
                    reached += 1
                    queue.append(w)
        if total > 0:
            out[s] = ((reached - 1) / total) * ((reached - 1) / (n - 1))
    return out


def compute_centrality(
    g: Graph, measure: str, params: CentralityParams | None = None
) -> CentralityVector:
    """Compute one named measure on a graph."""
    if measure == "degree":
        values = degree_centrality(g)
    elif measure == "eigenvector":
        values = eigenvector_centrality(g, params)
    elif measure == "katz":
        values = katz_centrality(g, params)
    elif measure == "betweenness":
        values = betweenness_centrality(g)
    elif measure == "pagerank":
        values = pagerank_centrality(g, params)
    elif measure == "closeness":
        values = closeness_centrality(g)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    return CentralityVector(measure, values)


@dataclass
class Histogram:
    lo: float
    hi: float
    mass: np.ndarray


def centrality_histogram(
    values: np.ndarray, lo: float, hi: float, bins: int = 10, delta: float = 1e-9
) -> Histogram:
    """Equal-width histogram over [lo, hi], smoothed and normalized to mass 1.

    Every bin receives additive smoothing delta before normalization, so the
    mass is strictly positive in each bin whenever delta > 0. Values exactly
    at hi fall in the last bin. Values outside [lo, hi] are an error.
    """
    values = np.asarray(values, dtype=np.float64)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if not (hi >= lo):
        raise ValueError(f"invalid range [{lo}, {hi}]")
    if values.size and (values.min() < lo or values.max() > hi):
        raise ValueError(f"values outside histogram range [{lo}, {hi}]")
    if hi == lo:
        counts = np.zeros(bins)
        counts[0] = values.size
    else:
        counts, _ = np.histogram(values, bins=bins, range=(lo, hi))
        counts = counts.astype(np.float64)
    mass = counts + delta
    mass /= mass.sum()
    return Histogram(lo, hi, mass)


def kl_divergence(p: Histogram, q: Histogram) -> float:
    """KL(p || q) over matching histograms."""
    if p.mass.shape != q.mass.shape:
        raise ValueError("histograms have different bin counts")
    if (p.lo, p.hi) != (q.lo, q.hi):
        raise ValueError("histograms cover different ranges")
    mask = p.mass > 0
    return float(np.sum(p.mass[mask] * np.log(p.mass[mask] / q.mass[mask])))


def selection_score_core(var_s: float, var_t: float, kl: float, gamma: float = 1.0) -> float:
    """exp(var_s + var_t - gamma * kl - 1)."""
    return float(np.exp(var_s + var_t - gamma * kl - 1.0))


def _joint_unit_scale(c_s: np.ndarray, c_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = min(c_s.min(), c_t.min())
    hi = max(c_s.max(), c_t.max())
    if hi == lo:
        return np.zeros_like(c_s), np.zeros_like(c_t)
    return (c_s - lo) / (hi - lo), (c_t - lo) / (hi - lo)


def selection_score(
    c_s: CentralityVector,
    c_t: CentralityVector,
    gamma: float = 1.0,
    bins: int = 10,
    delta: float = 1e-9,
) -> float:
    """Score a measure for a graph pair.

    Both value vectors are min-max normalized to a shared [0, 1] range; the
    score combines their variances with the KL divergence of their
    equal-width histograms. A degenerate shared range gives variance 0 and
    KL 0, hence exp(-1).
    """
    if c_s.measure != c_t.measure:
        raise ValueError(f"measure mismatch: {c_s.measure} vs {c_t.measure}")
    a_s, a_t = _joint_unit_scale(c_s.values, c_t.values)
    var_s = float(np.var(a_s))
    var_t = float(np.var(a_t))
    h_s = centrality_histogram(a_s, 0.0, 1.0, bins, delta)
    h_t = centrality_histogram(a_t, 0.0, 1.0, bins, delta)
    return selection_score_core(var_s, var_t, kl_divergence(h_s, h_t), gamma)


@dataclass
class SelectionResult:
    measure: str
    scores: dict[str, float | None]
    values_s: CentralityVector
    values_t: CentralityVector
    all_values: dict[str, tuple[CentralityVector, CentralityVector]] = field(default_factory=dict)


def select_centrality(
    g_s: Graph,
    g_t: Graph,
    gamma: float = 1.0,
    bins: int = 10,
    params: CentralityParams | None = None,
) -> SelectionResult:
    """Score all six measures on the pair and keep the argmax.

    A measure whose computation fails on either graph is excluded with a
    warning; ties keep the earlier measure in the fixed order. All six
    scores (None for excluded measures) are reported.
    """
    scores: dict[str, float | None] = {}
    values: dict[str, tuple[CentralityVector, CentralityVector]] = {}
    for measure in MEASURES:
        try:
            c_s = compute_centrality(g_s, measure, params)
            c_t = compute_centrality(g_t, measure, params)
        except (ConvergenceError, KatzDivergenceError, ValueError) as exc:
            warnings.warn(f"excluding {measure}: {exc}", RuntimeWarning, stacklevel=2)
            scores[measure] = None
            continue
        scores[measure] = selection_score(c_s, c_t, gamma, bins)
        values[measure] = (c_s, c_t)
    best: str | None = None
    for measure in MEASURES:
        score = scores[measure]
        if score is None:
            continue
        if best is None or score > scores[best]:
            best = measure
    if best is None:
        raise RuntimeError("every centrality measure failed on this pair")
    return SelectionResult(best, scores, values[best][0], values[best][1], values)
