"""Document-level logistic regression over averaged sequence features.

The baseline collapses each observation sequence to the mean of its
per-segment vectors and fits a binary ℓ2-regularized logistic model
with the shared quasi-Newton optimizer.  The intercept is left out of
the penalty so that heavy regularization falls back to the majority
class rather than to a coin flip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InvalidInputError
from .model import ObservationSequence
from .optimize import minimize

# inverse regularization strengths swept by the reference protocol
DEFAULT_C_GRID = (0.1, 0.5, 1.0, 10.0, 100.0)


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray  # (D,)
    intercept: float
    c: float  # inverse regularization strength used to fit

    def __post_init__(self):
        if self.weights.ndim != 1:
            raise InvalidInputError("weights must be one-dimensional")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.intercept):
            raise InvalidInputError("logistic model has non-finite parameters")
        if self.c <= 0:
            raise InvalidInputError("inverse regularization strength must be positive")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def aggregate_document_vector(seq: ObservationSequence) -> np.ndarray:
    """Mean of the per-segment feature vectors."""
    return seq.features.mean(axis=0)


def _objective_factory(matrix, targets, c):
    n_features = matrix.shape[1]

    def fun(x):
        w, b = x[:n_features], x[n_features]
        z = matrix @ w + b
        value = float(np.sum(np.logaddexp(0.0, z)) - targets @ z)
        value += 0.5 / c * float(w @ w)
        residual = expit(z) - targets
        grad = np.empty_like(x)
        grad[:n_features] = matrix.T @ residual + w / c
        grad[n_features] = residual.sum()
        return value, grad

    return fun


def train_logreg(
    doc_vectors: np.ndarray,
    labels,
    c: float = 1.0,
    seed: int = 0,
    max_iterations: int = 500,
) -> LogRegModel:
    """Fit by minimizing cross-entropy + ‖w‖²/(2c), intercept unpenalized."""
    matrix = np.asarray(doc_vectors, dtype=np.float64)
    targets = np.asarray(labels, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise InvalidInputError("doc_vectors must be a nonempty (N, D) matrix")
    if targets.shape != (matrix.shape[0],):
        raise InvalidInputError("labels must align with doc_vectors rows")
    present = set(np.unique(targets).tolist())
    if not present <= {0.0, 1.0}:
        raise InvalidInputError("labels must be 0 or 1")
    if len(present) < 2:
        raise InvalidInputError("training data contains a single class")
    if c <= 0:
        raise InvalidInputError("inverse regularization strength must be positive")

    rng = np.random.default_rng(seed)
    x0 = 0.01 * rng.standard_normal(matrix.shape[1] + 1)
    result = minimize(
        _objective_factory(matrix, targets, c),
        x0,
        max_iterations=max_iterations,
        grad_tolerance=1e-8,
    )
    return LogRegModel(
        weights=result.x[:-1].copy(), intercept=float(result.x[-1]), c=float(c)
    )


def predict_logreg(model: LogRegModel, doc_vector: np.ndarray) -> tuple[int, float]:
    """(label, probability of label 1); probability exactly 0.5 → label 0."""
    vec = np.asarray(doc_vector, dtype=np.float64)
    if vec.shape != (model.dim,):
        raise InvalidInputError(
            f"expected a vector of dimension {model.dim}, got shape {vec.shape}"
        )
    prob = float(expit(model.weights @ vec + model.intercept))
    return (1 if prob > 0.5 else 0), prob


def predict_logreg_batch(model: LogRegModel, matrix: np.ndarray):
    """Vectorized form of predict_logreg over the rows of ``matrix``."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != model.dim:
        raise InvalidInputError(
            f"expected an (N, {model.dim}) matrix, got shape {mat.shape}"
        )
    probs = expit(mat @ model.weights + model.intercept)
    return (probs > 0.5).astype(np.int64), probs


@dataclass(frozen=True, eq=False)
class LogRegPredictor:
    """Sequence-in, label-out wrapper: average the segments, then score."""

    model: LogRegModel

    def predict(self, seq: ObservationSequence) -> int:
        label, _ = predict_logreg(self.model, aggregate_document_vector(seq))
        return label

    def predict_proba(self, seq: ObservationSequence) -> float:
        return predict_logreg(self.model, aggregate_document_vector(seq))[1]

    def describe(self) -> dict:
        return {"model": "logreg", "c": self.model.c}
