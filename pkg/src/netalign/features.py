"""Centrality-binned one-hot node features.

Both networks share one equal-width binning of a centrality measure, so
nodes with matching centrality land on identical one-hot rows regardless of
which network they belong to.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .centrality import CentralityVector


class DegenerateBinningWarning(UserWarning):
    """All centrality values coincide, every node falls in the first bin."""


@dataclass
class AugmentedFeatures:
    """One-hot binned features for one network.

    bin_indices holds the 1-based bin of each node; matrix holds the
    corresponding one-hot rows (n x dim).
    """

    matrix: np.ndarray
    bin_indices: np.ndarray
    bin_width: float
    c_min: float
    c_max: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def _bin_indices(values: np.ndarray, c_min: float, width: float, dim: int) -> np.ndarray:
    if width == 0.0:
        return np.ones(len(values), dtype=np.int64)
    raw = np.ceil((values - c_min) / width).astype(np.int64)
    return np.clip(raw, 1, dim)


def augment_features(
    c_s: CentralityVector, c_t: CentralityVector, dim: int = 15
) -> tuple[AugmentedFeatures, AugmentedFeatures]:
    """Bin a centrality measure into shared one-hot features for a pair.

    The bin width is (c_max - c_min) / dim with extremes taken over the
    union of both networks' values; node u gets bin
    clamp(ceil((c_u - c_min) / w), 1, dim). A degenerate value range puts
    every node in bin 1 and emits DegenerateBinningWarning.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if c_s.measure != c_t.measure:
        raise ValueError(f"measure mismatch: {c_s.measure} vs {c_t.measure}")
    if len(c_s.values) == 0 or len(c_t.values) == 0:
        raise ValueError("empty centrality vector")
    c_min = float(min(c_s.values.min(), c_t.values.min()))
    c_max = float(max(c_s.values.max(), c_t.values.max()))
    width = (c_max - c_min) / dim
    if width == 0.0:
        warnings.warn(
            "degenerate centrality range, all nodes assigned to bin 1",
            DegenerateBinningWarning,
            stacklevel=2,
        )
    out = []
    for vec in (c_s, c_t):
        idx = _bin_indices(vec.values, c_min, width, dim)
        matrix = np.zeros((len(idx), dim))
        matrix[np.arange(len(idx)), idx - 1] = 1.0
        out.append(AugmentedFeatures(matrix, idx, width, c_min, c_max))
    return out[0], out[1]


def bin_index(value: float, c_min: float, c_max: float, dim: int) -> int:
    """Bin of a single value under the shared binning (1-based)."""
    width = (c_max - c_min) / dim
    if width == 0.0:
        return 1
    return int(min(max(math.ceil((value - c_min) / width), 1), dim))
