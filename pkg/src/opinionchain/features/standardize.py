"""Per-dimension z-scoring fitted on training folds only.

Population standard deviation (ddof = 0); zero-variance dimensions are
centered but not scaled, so constant columns map to exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # 0.0 marks a centered-only dimension

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise InvalidInputError("mean and std must be equal-length vectors")
        if (std < 0).any() or not np.isfinite(mean).all() or not np.isfinite(std).all():
            raise InvalidInputError("std must be finite and non-negative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != self.dim:
            raise InvalidInputError(
                f"matrix width {matrix.shape[-1]} != standardizer dim {self.dim}"
            )
        centered = matrix - self.mean
        divisor = np.where(self.std > 0, self.std, 1.0)
        return centered / divisor


def fit_standardizer(train_matrix: np.ndarray) -> Standardizer:
    matrix = np.asarray(train_matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise InvalidInputError("need a nonempty 2-D matrix to fit")
    return Standardizer(mean=matrix.mean(axis=0), std=matrix.std(axis=0, ddof=0))
