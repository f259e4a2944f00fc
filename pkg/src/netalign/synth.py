"""Synthetic benchmark pairs: noisy permuted copies and Erdos-Renyi graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, NodeMapping, permute_graph


@dataclass(frozen=True)
class NoiseSpec:
    """Noise protocol for a permuted copy.

    edge_noise removes floor(edge_noise * |E|) edges from the copy,
    feature_noise zeroes floor(feature_noise * n) feature rows of the copy.
    """

    edge_noise: float = 0.0
    feature_noise: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.edge_noise <= 1.0):
            raise ValueError(f"edge_noise must be in [0, 1], got {self.edge_noise}")
        if not (0.0 <= self.feature_noise <= 1.0):
            raise ValueError(f"feature_noise must be in [0, 1], got {self.feature_noise}")


def noisy_copy(g: Graph, spec: NoiseSpec) -> tuple[Graph, NodeMapping]:
    """Permuted copy of g with edge and feature noise, plus the ground truth.

    Draws a uniform random node permutation, removes the requested number of
    edges from the permuted copy (uniformly, without replacement), then zeroes
    the requested number of feature rows. The source graph is untouched; the
    returned mapping pairs every source node with its copy.
    """
    if g.node_count == 0:
        raise ValueError("cannot copy an empty graph")
    rng = np.random.default_rng(spec.seed)
    n = g.node_count
    perm = rng.permutation(n)
    copy = permute_graph(g, perm)

    edges = copy.edge_list()
    drop = math.floor(spec.edge_noise * len(edges))
    if drop:
        removed = rng.choice(len(edges), size=drop, replace=False)
        keep = np.ones(len(edges), dtype=bool)
        keep[removed] = False
        edges = edges[keep]

    features = copy.features
    if features is not None:
        features = features.copy()
        zeroed = math.floor(spec.feature_noise * n)
        if zeroed:
            rows = rng.choice(n, size=zeroed, replace=False)
            features[rows] = 0.0

    target = Graph.from_edges(n, edges, features)
    mapping = NodeMapping([(u, int(perm[u])) for u in range(n)])
    return target, mapping


def er_graph(n: int, m: int, seed: int = 0) -> Graph:
    """Uniform random simple graph with exactly n nodes and m distinct edges."""
    if n < 1:
        raise ValueError("n must be >= 1")
    limit = n * (n - 1) // 2
    if not (0 <= m <= limit):
        raise ValueError(f"m must be in [0, {limit}] for n={n}, got {m}")
    rng = np.random.default_rng(seed)
    chosen: set[int] = set()
    edges: list[tuple[int, int]] = []
    while len(edges) < m:
        batch = max(1024, 2 * (m - len(edges)))
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        for u, v in zip(us, vs):
            if u == v:
                continue
            a, b = (int(u), int(v)) if u < v else (int(v), int(u))
            key = a * n + b
            if key in chosen:
                continue
            chosen.add(key)
            edges.append((a, b))
            if len(edges) == m:
                break
    return Graph.from_edges(n, edges)
