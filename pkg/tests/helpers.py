"""Shared oracles and builders used across the test suite."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from netalign.embedding import GnnParams, total_loss_and_gradient
from netalign.graphs import Graph


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 12):
    n = draw(st.integers(min_n, max_n))
    possible = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if possible:
        edges = draw(st.lists(st.sampled_from(possible), unique=True, max_size=len(possible)))
    else:
        edges = []
    return Graph.from_edges(n, edges)


@st.composite
def graphs_with_perm(draw, min_n: int = 1, max_n: int = 10):
    g = draw(graphs(min_n=min_n, max_n=max_n))
    perm = draw(st.permutations(range(g.node_count)))
    return g, list(perm)


def bfs_counts(g: Graph, s: int) -> tuple[list[int], list[int]]:
    """Distances and shortest-path counts from one source (exact integers)."""
    n = g.node_count
    dist = [-1] * n
    sigma = [0] * n
    dist[s] = 0
    sigma[s] = 1
    queue: deque[int] = deque([s])
    while queue:
        v = queue.popleft()
        for w in g.neighbors[v]:
            w = int(w)
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def brute_betweenness(g: Graph) -> np.ndarray:
    """Betweenness by explicit enumeration of all unordered pairs.

    Rational arithmetic throughout, converted to float once at the end.
    """
    n = g.node_count
    dist = []
    sigma = []
    for s in range(n):
        d, sg = bfs_counts(g, s)
        dist.append(d)
        sigma.append(sg)
    total = [Fraction(0)] * n
    for u in range(n):
        for v in range(u + 1, n):
            if dist[u][v] < 0:
                continue
            for i in range(n):
                if i in (u, v):
                    continue
                if dist[u][i] >= 0 and dist[i][v] >= 0 and dist[u][i] + dist[i][v] == dist[u][v]:
                    total[i] += Fraction(sigma[u][i] * sigma[v][i], sigma[u][v])
    return np.array([float(x) for x in total])


def random_regular(rng: np.random.Generator, n: int, r: int = 3) -> Graph:
    """Random r-regular simple graph via the pairing model with rejection."""
    assert (n * r) % 2 == 0
    while True:
        stubs = np.repeat(np.arange(n), r)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges: set[tuple[int, int]] = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v:
                ok = False
                break
            key = (min(u, v), max(u, v))
            if key in edges:
                ok = False
                break
            edges.add(key)
        if ok:
            return Graph.from_edges(n, edges)


def gcn_preactivation(w: np.ndarray, g: Graph, x: np.ndarray, r: int) -> np.ndarray:
    """Rows h_u = W (x_u + (1/r) sum over neighbors of x)."""
    agg = x + (g.adjacency_dense() @ x) / r
    return agg @ w.T


def fd_violation(
    params: GnnParams,
    g_s: Graph,
    g_t: Graph,
    x_s: np.ndarray,
    x_t: np.ndarray,
    step: float = 1e-5,
    rel_tol: float = 1e-4,
    abs_floor: float = 1e-8,
) -> float:
    """Worst ratio of |fd - grad| to its allowance over every parameter.

    A return value below 1.0 means every coordinate satisfies
    |fd - grad| <= max(rel_tol * max(|fd|, |grad|), abs_floor) with central
    differences of the given step.
    """
    _, grads = total_loss_and_gradient(params, g_s, g_t, x_s, x_t)
    arrays = list(params.weights) + (
        list(params.biases) if params.biases is not None else []
    )
    grad_arrays = list(grads.weights) + (
        list(grads.biases) if grads.biases is not None else []
    )
    worst = 0.0
    for a, ga in zip(arrays, grad_arrays):
        it = np.nditer(a, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = a[idx]
            a[idx] = orig + step
            lp, _ = total_loss_and_gradient(params, g_s, g_t, x_s, x_t)
            a[idx] = orig - step
            lm, _ = total_loss_and_gradient(params, g_s, g_t, x_s, x_t)
            a[idx] = orig
            fd = (lp - lm) / (2.0 * step)
            allowance = max(rel_tol * max(abs(fd), abs(ga[idx])), abs_floor)
            worst = max(worst, abs(fd - ga[idx]) / allowance)
    return worst
