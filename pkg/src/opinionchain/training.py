"""Regularized sequence-likelihood training.

The objective is the negative log-likelihood of the gold labels plus
(lambda/2) * squared Frobenius norm over all parameter blocks, so the
regularizer's gradient is exactly lambda * theta.  The likelihood
gradient is the usual expected-count difference: conditional state and
pair posteriors weighted by (P(y|x) - 1[y = gold]).

Sequences are grouped by length and each group's forward-backward runs
vectorized over the group; grouping follows dataset order and groups are
reduced in sorted-length order, so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidInputError
from .model import HcrfParameters, ObservationSequence, posterior, predict
from .optimize import TraceEntry, minimize

Dataset = list[tuple[ObservationSequence, int]]


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for one training run.

    Reference grids swept elsewhere: hidden states {2..5}, context
    window {0,1,2}, lambda {0.01, 0.05, 0.075, 0.1, 0.25, 0.5, 1}.
    None of the grids is enforced here.
    """

    num_hidden_states: int = 3
    context_window: int = 0
    l2_lambda: float = 0.1
    max_iterations: int = 200
    grad_tolerance: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.num_hidden_states < 1:
            raise InvalidInputError("num_hidden_states must be >= 1")
        if self.context_window < 0:
            raise InvalidInputError("context_window must be >= 0")
        if self.l2_lambda <= 0:
            raise InvalidInputError("l2_lambda must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if self.grad_tolerance <= 0:
            raise InvalidInputError("grad_tolerance must be positive")


@dataclass
class TrainingTrace:
    entries: list[TraceEntry]
    status: str

    @property
    def objectives(self) -> list[float]:
        return [e.objective for e in self.entries]


def apply_context_window(x: ObservationSequence, window: int) -> ObservationSequence:
    """Concatenate the 2w+1 neighboring vectors at each position.

    Boundaries are zero-padded, so the output dimension is (2w+1) * D
    regardless of position.  w=0 is the identity.
    """
    if window < 0:
        raise InvalidInputError("window must be >= 0")
    if window == 0:
        return x
    length, dim = x.features.shape
    padded = np.zeros((length + 2 * window, dim))
    padded[window : window + length] = x.features
    stacked = np.hstack([padded[k : k + length] for k in range(2 * window + 1)])
    return ObservationSequence(doc_id=x.doc_id, features=stacked)


def _validate_dataset(dataset: Dataset, num_labels: int, feature_dim: int):
    if not dataset:
        raise InvalidInputError("dataset must be nonempty")
    for x, y in dataset:
        if x.dim != feature_dim:
            raise InvalidInputError(
                f"{x.doc_id}: feature dim {x.dim} != expected {feature_dim}"
            )
        if not 0 <= y < num_labels:
            raise InvalidInputError(f"{x.doc_id}: label {y} out of range [0, {num_labels})")


def _length_groups(dataset: Dataset) -> list[tuple[np.ndarray, np.ndarray]]:
    """Partition into same-length groups: [(features (N,L,D), labels (N,))]
    ordered by ascending length, preserving dataset order within a group."""
    by_length: dict[int, list[int]] = {}
    for idx, (x, _) in enumerate(dataset):
        by_length.setdefault(x.length, []).append(idx)
    groups = []
    for length in sorted(by_length):
        idxs = by_length[length]
        feats = np.stack([dataset[i][0].features for i in idxs])
        labels = np.array([dataset[i][1] for i in idxs], dtype=np.intp)
        groups.append((feats, labels))
    return groups


def _group_objective_gradient(
    feats: np.ndarray,
    labels: np.ndarray,
    theta: HcrfParameters,
    grad_obs: np.ndarray,
    grad_state: np.ndarray,
    grad_trans: np.ndarray,
) -> float:
    """One length-group's NLL; expected-count gradient accumulated in place."""
    num, length, _ = feats.shape
    num_labels = theta.num_labels
    num_h = theta.num_hidden_states
    emis = feats @ theta.theta_obs.T  # (N, L, H)

    log_z = np.empty((num, num_labels))
    state_sums = np.empty((num_labels, num, num_h))  # sum_j P(h_j | y, x)
    state_full = np.empty((num_labels, num, length, num_h))
    pair_sums = np.empty((num_labels, num, num_h, num_h)) if length > 1 else None

    for y in range(num_labels):
        trans = theta.theta_trans[y]
        node = emis + theta.theta_state[y][None, None, :]
        alpha = np.empty_like(node)
        alpha[:, 0] = node[:, 0]
        for j in range(1, length):
            alpha[:, j] = (
                logsumexp(alpha[:, j - 1][:, :, None] + trans[None, :, :], axis=1)
                + node[:, j]
            )
        beta = np.zeros_like(node)
        for j in range(length - 2, -1, -1):
            beta[:, j] = logsumexp(
                trans[None, :, :] + (node[:, j + 1] + beta[:, j + 1])[:, None, :], axis=2
            )
        log_z_y = logsumexp(alpha[:, -1], axis=1)
        log_z[:, y] = log_z_y

        state = np.exp(alpha + beta - log_z_y[:, None, None])
        state_full[y] = state
        state_sums[y] = state.sum(axis=1)
        if length > 1:
            acc = np.zeros((num, num_h, num_h))
            for j in range(length - 1):
                acc += np.exp(
                    alpha[:, j][:, :, None]
                    + trans[None, :, :]
                    + (node[:, j + 1] + beta[:, j + 1])[:, None, :]
                    - log_z_y[:, None, None]
                )
            pair_sums[y] = acc

    log_total = logsumexp(log_z, axis=1)
    nll = float(-(log_z[np.arange(num), labels] - log_total).sum())

    posterior = np.exp(log_z - log_total[:, None])  # (N, Y)
    for y in range(num_labels):
        coeff = posterior[:, y] - (labels == y)  # (N,)
        grad_state[y] += coeff @ state_sums[y]
        grad_obs += np.einsum("n,nlh,nld->hd", coeff, state_full[y], feats)
        if length > 1:
            grad_trans[y] += np.einsum("n,nhk->hk", coeff, pair_sums[y])
    return nll


def objective_and_gradient(
    dataset: Dataset, theta: HcrfParameters, l2_lambda: float
) -> tuple[float, HcrfParameters]:
    """Value and parameter-shaped gradient of the regularized NLL."""
    if l2_lambda < 0:
        raise InvalidInputError("l2_lambda must be >= 0")
    _validate_dataset(dataset, theta.num_labels, theta.feature_dim)

    grad_obs = np.zeros_like(theta.theta_obs)
    grad_state = np.zeros_like(theta.theta_state)
    grad_trans = np.zeros_like(theta.theta_trans)
    nll = 0.0
    for feats, labels in _length_groups(dataset):
        nll += _group_objective_gradient(
            feats, labels, theta, grad_obs, grad_state, grad_trans
        )

    sq_norm = float(
        (theta.theta_obs**2).sum()
        + (theta.theta_state**2).sum()
        + (theta.theta_trans**2).sum()
    )
    value = nll + 0.5 * l2_lambda * sq_norm
    grad = HcrfParameters(
        grad_obs + l2_lambda * theta.theta_obs,
        grad_state + l2_lambda * theta.theta_state,
        grad_trans + l2_lambda * theta.theta_trans,
    )
    return value, grad


def objective(dataset: Dataset, theta: HcrfParameters, l2_lambda: float) -> float:
    return objective_and_gradient(dataset, theta, l2_lambda)[0]


def gradient(dataset: Dataset, theta: HcrfParameters, l2_lambda: float) -> HcrfParameters:
    return objective_and_gradient(dataset, theta, l2_lambda)[1]


def infer_num_labels(dataset: Dataset) -> int:
    return max(2, max(y for _, y in dataset) + 1)


def train(
    dataset: Dataset, config: TrainingConfig, num_labels: int | None = None
) -> tuple[HcrfParameters, TrainingTrace]:
    """Fit parameters by quasi-Newton minimization of the objective.

    The context window from ``config`` is applied here, so the returned
    parameters expect windowed inputs of dimension (2w+1) * D.  Every
    label in [0, num_labels) must occur in the dataset.
    """
    if not dataset:
        raise InvalidInputError("dataset must be nonempty")
    if num_labels is None:
        num_labels = infer_num_labels(dataset)
    present = {y for _, y in dataset}
    missing = sorted(set(range(num_labels)) - present)
    if missing:
        raise InvalidInputError(f"no training example for label(s) {missing}")

    windowed = [(apply_context_window(x, config.context_window), y) for x, y in dataset]
    dim = windowed[0][0].dim
    _validate_dataset(windowed, num_labels, dim)

    rng = np.random.default_rng(config.seed)
    init = HcrfParameters.random(config.num_hidden_states, num_labels, dim, rng)

    def fun(vec: np.ndarray) -> tuple[float, np.ndarray]:
        params = HcrfParameters.from_vector(vec, config.num_hidden_states, num_labels, dim)
        value, grad = objective_and_gradient(windowed, params, config.l2_lambda)
        return value, grad.as_vector()

    result = minimize(
        fun,
        init.as_vector(),
        max_iterations=config.max_iterations,
        grad_tolerance=config.grad_tolerance,
    )
    theta = HcrfParameters.from_vector(
        result.x, config.num_hidden_states, num_labels, dim
    )
    return theta, TrainingTrace(entries=result.trace, status=result.status)


@dataclass(frozen=True, eq=False)
class HcrfPredictor:
    """Trained parameters plus the context window they were fit under.

    The window is replayed at prediction time, so callers hand in
    sequences with the raw pipeline dimension.
    """

    params: HcrfParameters
    config: TrainingConfig

    def _windowed(self, x: ObservationSequence) -> ObservationSequence:
        x = apply_context_window(x, self.config.context_window)
        if x.dim != self.params.feature_dim:
            raise InvalidInputError(
                f"{x.doc_id}: windowed dim {x.dim} != model dim {self.params.feature_dim}"
            )
        return x

    def predict(self, x: ObservationSequence) -> int:
        return predict(self._windowed(x), self.params)

    def posterior(self, x: ObservationSequence) -> np.ndarray:
        return posterior(self._windowed(x), self.params)

    def describe(self) -> dict:
        return {
            "model": "hcrf",
            "num_hidden_states": self.config.num_hidden_states,
            "context_window": self.config.context_window,
            "l2_lambda": self.config.l2_lambda,
        }


def fit_predictor(
    dataset: Dataset, config: TrainingConfig, num_labels: int | None = None
) -> tuple[HcrfPredictor, TrainingTrace]:
    """train() packaged with the window replay needed at prediction time."""
    theta, trace = train(dataset, config, num_labels)
    return HcrfPredictor(params=theta, config=config), trace
