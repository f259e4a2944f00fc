"""Gradual matching driven by embedding similarity and matched-neighbor counts.

Each round multiplies the fixed embedding similarity by a structural term
derived from the current partial mapping, picks the next batch of pairs
greedily, and repeats with the enlarged mapping. The structural term is
(count + eps)^p where count(u, v) is the number of neighbors of u already
mapped into the neighborhood of v; the jaccard variant divides the count by
the size of the union of the mapped neighbor images and the neighborhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, NodeMapping


@dataclass(frozen=True)
class AlignConfig:
    p: float = 1.5
    acn_eps: float = 1.0
    iterations: int = 10
    similarity: str = "acn"
    debug_full_recompute: bool = False

    def __post_init__(self) -> None:
        if self.p <= 0:
            raise ValueError("p must be positive")
        if self.acn_eps < 0:
            raise ValueError("acn_eps must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.similarity not in ("acn", "jaccard"):
            raise ValueError(f"unknown similarity {self.similarity!r}")


@dataclass
class AlignState:
    mapping: list[tuple[int, int]]
    matched_s: np.ndarray
    matched_t: np.ndarray

    @classmethod
    def initial(cls, n_s: int, n_t: int, seeds: NodeMapping) -> "AlignState":
        matched_s = np.zeros(n_s, dtype=bool)
        matched_t = np.zeros(n_t, dtype=bool)
        for u, v in seeds.pairs:
            if not (0 <= u < n_s and 0 <= v < n_t):
                raise ValueError(f"seed pair ({u}, {v}) outside graph sizes")
            matched_s[u] = True
            matched_t[v] = True
        return cls(list(seeds.pairs), matched_s, matched_t)


def acn_counts(g_s: Graph, g_t: Graph, mapping: NodeMapping) -> np.ndarray:
    """count(u, v) = number of neighbors of u mapped onto neighbors of v."""
    counts = np.zeros((g_s.node_count, g_t.node_count), dtype=np.int32)
    for a, b in mapping.pairs:
        na = g_s.neighbors[a]
        nb = g_t.neighbors[b]
        if len(na) and len(nb):
            counts[np.ix_(na, nb)] += 1
    return counts


def acn_similarity(counts: np.ndarray, p: float = 1.5, eps: float = 1.0) -> np.ndarray:
    """(count + eps)^p, elementwise."""
    return np.power(counts.astype(np.float64) + eps, p)


def jaccard_similarity(g_s: Graph, g_t: Graph, mapping: NodeMapping) -> np.ndarray:
    """count(u, v) / |images of mapped neighbors of u, union, neighbors of v|.

    Entries with an empty union are 0.
    """
    counts = acn_counts(g_s, g_t, mapping).astype(np.float64)
    mapped_s = np.zeros(g_s.node_count, dtype=np.float64)
    for u, _ in mapping.pairs:
        mapped_s[u] = 1.0
    mapped_nbrs = np.array(
        [mapped_s[nb].sum() if len(nb) else 0.0 for nb in g_s.neighbors]
    )
    deg_t = g_t.degrees.astype(np.float64)
    denom = mapped_nbrs[:, None] + deg_t[None, :] - counts
    out = np.zeros_like(counts)
    np.divide(counts, denom, out=out, where=denom > 0)
    return out


def combined_similarity(s_emb: np.ndarray, s_struct: np.ndarray) -> np.ndarray:
    """Elementwise product of the embedding and structural similarities."""
    if s_emb.shape != s_struct.shape:
        raise ValueError(f"shape mismatch: {s_emb.shape} vs {s_struct.shape}")
    return s_emb * s_struct


def greedy_select(
    s: np.ndarray, state: AlignState, count: int
) -> list[tuple[int, int]]:
    """Pick up to count pairs by repeated global argmax over unmatched rows
    and columns; ties resolve to the smallest (row, col) pair."""
    n_s, n_t = s.shape
    masked = s.copy()
    masked[state.matched_s, :] = -np.inf
    masked[:, state.matched_t] = -np.inf
    # stable sort of the negated values keeps ties in row-major order,
    # which is exactly the repeated-argmax tie rule
    order = np.argsort(-masked, axis=None, kind="stable")
    picks: list[tuple[int, int]] = []
    for idx in order:
        if len(picks) == count:
            break
        u, v = divmod(int(idx), n_t)
        if state.matched_s[u] or state.matched_t[v]:
            continue
        if masked[u, v] == -np.inf:
            break
        state.matched_s[u] = True
        state.matched_t[v] = True
        state.mapping.append((u, v))
        picks.append((u, v))
    return picks


@dataclass
class GradualAlignResult:
    mapping: NodeMapping
    final_similarity: np.ndarray
    iteration_pairs: list[list[tuple[int, int]]] = field(default_factory=list)


def _structural(
    g_s: Graph,
    g_t: Graph,
    counts: np.ndarray,
    mapped_nbrs: np.ndarray,
    cfg: AlignConfig,
) -> np.ndarray:
    if cfg.similarity == "acn":
        return acn_similarity(counts, cfg.p, cfg.acn_eps)
    deg_t = g_t.degrees.astype(np.float64)
    denom = mapped_nbrs[:, None] + deg_t[None, :] - counts
    out = np.zeros(counts.shape, dtype=np.float64)
    np.divide(counts, denom, out=out, where=denom > 0)
    return out


def gradual_align(
    g_s: Graph,
    g_t: Graph,
    s_emb: np.ndarray,
    seeds: NodeMapping,
    pairs_total: int,
    cfg: AlignConfig | None = None,
) -> GradualAlignResult:
    """Grow a node mapping in ceil(pairs_total / batch) rounds.

    batch = ceil(pairs_total / cfg.iterations) pairs are added per round.
    With no seeds the first round scores pairs by embedding similarity
    alone; every later round multiplies in the structural similarity of the
    current mapping. The final mapping holds the seeds plus pairs_total
    discovered pairs, and the similarity used after the last round is
    returned for ranking metrics.
    """
    cfg = cfg or AlignConfig()
    n_s, n_t = g_s.node_count, g_t.node_count
    if s_emb.shape != (n_s, n_t):
        raise ValueError(f"similarity shape {s_emb.shape} does not match ({n_s}, {n_t})")
    available = min(n_s, n_t) - len(seeds)
    if not (1 <= pairs_total <= available):
        raise ValueError(
            f"pairs_total must be in [1, {available}] given {len(seeds)} seeds, "
            f"got {pairs_total}"
        )

    state = AlignState.initial(n_s, n_t, seeds)
    counts = acn_counts(g_s, g_t, seeds).astype(np.float64)
    mapped_nbrs = np.zeros(n_s)
    for a, _ in seeds.pairs:
        mapped_nbrs[g_s.neighbors[a]] += 1.0

    if len(seeds) == 0:
        s = s_emb.copy()
    else:
        s = combined_similarity(s_emb, _structural(g_s, g_t, counts, mapped_nbrs, cfg))

    batch = math.ceil(pairs_total / cfg.iterations)
    remaining = pairs_total
    iteration_pairs: list[list[tuple[int, int]]] = []
    while remaining > 0:
        picks = greedy_select(s, state, min(batch, remaining))
        if not picks:
            raise RuntimeError("no selectable pairs remain")
        remaining -= len(picks)
        iteration_pairs.append(picks)
        for a, b in picks:
            na = g_s.neighbors[a]
            nb = g_t.neighbors[b]
            if len(na) and len(nb):
                counts[np.ix_(na, nb)] += 1.0
            if len(na):
                mapped_nbrs[na] += 1.0
        if cfg.debug_full_recompute:
            full = acn_counts(g_s, g_t, NodeMapping(list(state.mapping)))
            assert np.array_equal(counts, full.astype(np.float64)), "incremental counts drifted"
        s = combined_similarity(s_emb, _structural(g_s, g_t, counts, mapped_nbrs, cfg))

    return GradualAlignResult(NodeMapping(state.mapping), s, iteration_pairs)
