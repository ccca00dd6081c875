"""Cosine-similarity correspondence matrices between feature sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMap
from .errors import DimMismatch, GridTooLarge, IndexOutOfRange

# Largest grid side for which a full grid-by-grid matrix may be materialized.
FULL_GRID_CAP = 64


@dataclass(frozen=True)
class CorrespondenceMatrix:
    """L x M cosine similarities, values clamped to [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"similarity matrix must be 2-D, got {arr.shape}")
        arr = np.clip(arr, -1.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def _unit_rows(feats: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; zero rows stay zero (similarity 0 convention)."""
    feats = np.asarray(feats, dtype=np.float64)
    norms = np.linalg.norm(feats, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return feats / norms


def cosine_sim_matrix(src: np.ndarray, dst: np.ndarray) -> CorrespondenceMatrix:
    """Pairwise cosine similarity between src (L, C) and dst (M, C) rows."""
    src = np.atleast_2d(np.asarray(src, dtype=np.float64))
    dst = np.atleast_2d(np.asarray(dst, dtype=np.float64))
    if src.shape[1] != dst.shape[1]:
        raise DimMismatch(f"channel dims differ: {src.shape[1]} vs {dst.shape[1]}")
    if src.shape[0] < 1 or dst.shape[0] < 1:
        raise DimMismatch("both feature sets need at least one row")
    sims = _unit_rows(src) @ _unit_rows(dst).T
    return CorrespondenceMatrix(values=sims)


def full_correspondence(ref: FeatureMap, target: FeatureMap) -> CorrespondenceMatrix:
    """Full HW x HW correspondence between two grids (capped; see FULL_GRID_CAP)."""
    for fm in (ref, target):
        if max(fm.height, fm.width) > FULL_GRID_CAP:
            raise GridTooLarge(
                f"grid {fm.height}x{fm.width} exceeds the {FULL_GRID_CAP} "
                "materialization cap; use row-restricted similarities"
            )
    return cosine_sim_matrix(ref.flat_features(), target.flat_features())


def submatrix_rows(matrix: CorrespondenceMatrix, idx) -> CorrespondenceMatrix:
    """Row-restricted copy: output row i is input row idx[i]."""
    idx = list(idx)
    for i in idx:
        if not 0 <= i < matrix.rows:
            raise IndexOutOfRange(f"row index {i} outside [0, {matrix.rows})")
    if not idx:
        return CorrespondenceMatrix(values=np.empty((0, matrix.cols)))
    return CorrespondenceMatrix(values=matrix.values[np.asarray(idx, dtype=np.intp), :])
