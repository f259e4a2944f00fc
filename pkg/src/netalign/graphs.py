"""Graph data model, file formats, and shared adjacency transforms.

Graphs are undirected, simple (no self loops, no multi-edges), with dense
integer node ids starting at 0. Node features are an optional dense float
matrix with one row per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised for malformed graph, feature, or mapping files."""


@dataclass
class Graph:
    """Undirected simple graph stored as per-node sorted neighbor arrays."""

    neighbors: list[np.ndarray]
    features: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.ndim != 2 or self.features.shape[0] != self.node_count:
                raise GraphFormatError(
                    "feature matrix must have one row per node "
                    f"(got shape {self.features.shape} for {self.node_count} nodes)"
                )
            if not np.all(np.isfinite(self.features)):
                raise GraphFormatError("feature matrix contains non-finite entries")

    @property
    def node_count(self) -> int:
        return len(self.neighbors)

    @property
    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.int64)

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int]],
        features: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from an edge iterable, deduplicating symmetric pairs."""
        adj: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in edges:
            u = int(u)
            v = int(v)
            if u == v:
                raise GraphFormatError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphFormatError(f"edge ({u}, {v}) outside node range [0, {node_count})")
            adj[u].add(v)
            adj[v].add(u)
        neighbors = [np.array(sorted(s), dtype=np.int64) for s in adj]
        return cls(neighbors, features)

    def edge_list(self) -> np.ndarray:
        """All edges as a (m, 2) array with u < v, sorted lexicographically."""
        rows = []
        for u, nb in enumerate(self.neighbors):
            upper = nb[nb > u]
            if len(upper):
                rows.append(np.stack([np.full(len(upper), u, dtype=np.int64), upper], axis=1))
        if not rows:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate(rows, axis=0)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, v in self.edge_list():
            yield int(u), int(v)

    def adjacency_dense(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=np.float64)
        for u, nb in enumerate(self.neighbors):
            a[u, nb] = 1.0
        return a

    def adjacency_csr(self) -> sp.csr_matrix:
        n = self.node_count
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u, nb in enumerate(self.neighbors):
            indptr[u + 1] = indptr[u] + len(nb)
        indices = (
            np.concatenate(self.neighbors) if indptr[-1] else np.zeros(0, dtype=np.int64)
        )
        data = np.ones(indptr[-1], dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(n, n))

    def with_features(self, features: np.ndarray | None) -> "Graph":
        return Graph(self.neighbors, features)

    def copy(self) -> "Graph":
        feats = None if self.features is None else self.features.copy()
        return Graph([nb.copy() for nb in self.neighbors], feats)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.node_count != other.node_count:
            return False
        if any(not np.array_equal(a, b) for a, b in zip(self.neighbors, other.neighbors)):
            return False
        if (self.features is None) != (other.features is None):
            return False
        if self.features is not None and not np.array_equal(self.features, other.features):
            return False
        return True


@dataclass
class NodeMapping:
    """Injective partial mapping from source node ids to target node ids."""

    pairs: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.pairs = [(int(u), int(v)) for u, v in self.pairs]
        sources = [u for u, _ in self.pairs]
        targets = [v for _, v in self.pairs]
        if len(set(sources)) != len(sources):
            raise GraphFormatError("mapping repeats a source node")
        if len(set(targets)) != len(targets):
            raise GraphFormatError("mapping repeats a target node")

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def inverse_dict(self) -> dict[int, int]:
        return {v: u for u, v in self.pairs}


def _parse_id(token: str, path: Path, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: non-integer id {token!r}") from None
    if value < 0:
        raise GraphFormatError(f"{path}:{lineno}: negative id {value}")
    return value


def load_edgelist(path: str | Path) -> Graph:
    """Load a graph from an edge-list file.

    Lines starting with "#" are comments, except a "#n <count>" header which
    declares the node count (covers trailing isolated nodes). Each data line
    holds two whitespace-separated node ids. Self-loops are rejected,
    duplicate edges are merged.
    """
    path = Path(path)
    declared: int | None = None
    edges: list[tuple[int, int]] = []
    max_id = -1
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts and parts[0] == "n":
                    if len(parts) != 2:
                        raise GraphFormatError(f"{path}:{lineno}: malformed node-count header")
                    declared = _parse_id(parts[1], path, lineno)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two ids, got {line!r}")
            u = _parse_id(parts[0], path, lineno)
            v = _parse_id(parts[1], path, lineno)
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop at node {u}")
            edges.append((u, v))
            max_id = max(max_id, u, v)
    node_count = max_id + 1
    if declared is not None:
        if declared < node_count:
            raise GraphFormatError(
                f"{path}: declared node count {declared} smaller than max id {max_id}"
            )
        node_count = declared
    return Graph.from_edges(node_count, edges)


def save_edgelist(g: Graph, path: str | Path) -> None:
    """Write a graph in the canonical edge-list form read by load_edgelist."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"#n {g.node_count}\n")
        for u, v in g.edge_list():
            fh.write(f"{u} {v}\n")


def load_feature_matrix(path: str | Path) -> np.ndarray:
    """Load a dense float feature matrix from comma-separated text."""
    path = Path(path)
    rows: list[list[float]] = []
    width: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-numeric feature entry") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise GraphFormatError(
                    f"{path}:{lineno}: ragged row, expected {width} columns, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise GraphFormatError(f"{path}: empty feature matrix")
    matrix = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise GraphFormatError(f"{path}: non-finite feature entry")
    return matrix


def save_feature_matrix(matrix: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    matrix = np.asarray(matrix, dtype=np.float64)
    with path.open("w", encoding="utf-8") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_mapping(path: str | Path) -> NodeMapping:
    """Load an injective node mapping, one "source target" pair per line."""
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two ids, got {line!r}")
            u = _parse_id(parts[0], path, lineno)
            v = _parse_id(parts[1], path, lineno)
            pairs.append((u, v))
    try:
        return NodeMapping(pairs)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None


def save_mapping(mapping: NodeMapping, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for u, v in mapping.pairs:
            fh.write(f"{u} {v}\n")


def permute_graph(g: Graph, perm: Sequence[int] | np.ndarray) -> Graph:
    """Relabel nodes so that node u of the input becomes node perm[u].

    Features rows move with their nodes.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = g.node_count
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    neighbors: list[np.ndarray] = [np.zeros(0, dtype=np.int64)] * n
    for u, nb in enumerate(g.neighbors):
        neighbors[perm[u]] = np.sort(perm[nb])
    features = None
    if g.features is not None:
        features = np.empty_like(g.features)
        features[perm] = g.features
    return Graph(neighbors, features)


def normalized_adjacency_target(g: Graph, l: int) -> np.ndarray:
    """Symmetrically normalized multi-hop adjacency.

    With B = A + I, accumulates T = sum of B^k for k = 1..l, then returns
    D^{-1/2} T D^{-1/2} where D holds the row sums of T. Row sums are
    strictly positive because B has a unit diagonal.
    """
    if l < 1:
        raise ValueError("layer index must be >= 1")
    n = g.node_count
    if n == 0:
        raise ValueError("graph has no nodes")
    b = g.adjacency_dense()
    b[np.diag_indices(n)] += 1.0
    acc = b.copy()
    power = b
    for _ in range(2, l + 1):
        power = power @ b
        acc += power
    d = acc.sum(axis=1)
    # dividing by sqrt(d_i * d_j) keeps the result bitwise symmetric
    return acc / np.sqrt(np.outer(d, d))
